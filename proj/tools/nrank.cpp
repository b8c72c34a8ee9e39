// nrank: learning-to-rank toolkit for nested feeds.
//
// Pipeline: simulate a nested-feed world with a position-based click
// model, build labeled ranking datasets from the logs, train boosted
// rankers per label variant, and evaluate them offline (percent loss
// in DCG) and online (simulated metric Q).

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nrank/pipeline.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::string label = "s3";
  std::int64_t seed = -1;
  int threads = -1;
};

nrank::RunConfig load_config(const GlobalArgs& args) {
  nrank::RunConfig config = args.config_path.empty()
                                ? nrank::RunConfig{}
                                : nrank::RunConfig::from_file(args.config_path);
  if (args.seed >= 0) config.master_seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.threads >= 0) config.threads = args.threads;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nested-feed learning-to-rank toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalArgs args;
  app.add_option("--config", args.config_path, "config file (key = value, see configs/)");
  app.add_option("--seed", args.seed, "master seed override");
  app.add_option("--out", args.out_dir, "output directory override");
  app.add_option("--threads", args.threads, "worker threads override");

  auto* simulate = app.add_subcommand("simulate", "build the world and write session logs");
  auto* prepare =
      app.add_subcommand("prepare", "label logs and write train/validation/test datasets");
  auto* train = app.add_subcommand("train", "hyperparameter search + fit for one label");
  train->add_option("--label", args.label, "label column: s1|s2|s3|likes|shares|favs|clicks")
      ->required();
  auto* eval_offline =
      app.add_subcommand("evaluate-offline", "percent-loss-in-DCG matrix on the test split");
  auto* eval_online =
      app.add_subcommand("evaluate-online", "simulated A/B comparison of the label variants");
  auto* reproduce = app.add_subcommand(
      "reproduce", "full chain: simulate, prepare, train all labels, both evaluations");

  CLI11_PARSE(app, argc, argv);

  try {
    const nrank::RunConfig config = load_config(args);
    if (simulate->parsed()) {
      const auto s = nrank::run_simulate(config);
      std::cout << "sessions: " << s.sessions << "\nimpressions: " << s.impressions
                << "\npositive_rate: " << s.positive_rate
                << "\nclick_through_rate: " << s.click_through_rate << '\n';
    } else if (prepare->parsed()) {
      const auto p = nrank::run_prepare(config);
      for (int i = 0; i < 3; ++i) {
        std::cout << nrank::split_name(static_cast<nrank::Split>(i))
                  << ": examples=" << p.examples_per_split[i]
                  << " groups=" << p.groups_per_split[i]
                  << " positive_rate=" << p.positive_rate_per_split[i] << '\n';
      }
    } else if (train->parsed()) {
      const auto t = nrank::run_train(config, nrank::label_kind_from_name(args.label));
      std::cout << "label: " << nrank::label_kind_name(t.label) << "\ntrials: " << t.trials
                << "\nmodel_trees: " << t.model_trees
                << "\nvalidation_dcg: " << t.validation_dcg << '\n';
    } else if (eval_offline->parsed()) {
      nrank::run_eval_offline(config);
      const nrank::RunPaths paths{config.out_dir};
      std::cout << "wrote " << paths.matrix_tsv() << " and " << paths.matrix_text() << '\n';
    } else if (eval_online->parsed()) {
      nrank::run_eval_online(config);
      const nrank::RunPaths paths{config.out_dir};
      std::cout << "wrote " << paths.online_tsv() << " and " << paths.online_text() << '\n';
    } else if (reproduce->parsed()) {
      const nrank::OrderingChecks checks = nrank::run_reproduce(config);
      return checks.passed() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
