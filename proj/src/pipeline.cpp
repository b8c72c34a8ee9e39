#include "nrank/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

namespace {

using nlohmann::json;

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

json meta_json(const RunConfig& config) {
  std::ostringstream hash;
  hash << std::hex << config.config_hash();
  return json{{"tool_version", std::string(kToolVersion)},
              {"master_seed", config.master_seed},
              {"config_hash", hash.str()}};
}

[[noreturn]] void stage_error(const std::string& stage, const std::exception& e) {
  throw std::runtime_error("[" + stage + "] " + e.what());
}

}  // namespace

std::string RunPaths::world() const { return out_dir + "/world.json"; }
std::string RunPaths::logs() const { return out_dir + "/logs.jsonl"; }
std::string RunPaths::simulate_summary() const { return out_dir + "/simulate_summary.json"; }
std::string RunPaths::dataset(Split split) const {
  return out_dir + "/dataset_" + std::string(split_name(split)) + ".tsv";
}
std::string RunPaths::dataset_meta() const { return out_dir + "/dataset_meta.json"; }
std::string RunPaths::model(LabelKind label) const {
  return out_dir + "/model_" + std::string(label_kind_name(label)) + ".json";
}
std::string RunPaths::trial_log(LabelKind label) const {
  return out_dir + "/trials_" + std::string(label_kind_name(label)) + ".tsv";
}
std::string RunPaths::matrix_tsv() const { return out_dir + "/offline_matrix.tsv"; }
std::string RunPaths::matrix_text() const { return out_dir + "/offline_matrix.txt"; }
std::string RunPaths::online_tsv() const { return out_dir + "/online_report.tsv"; }
std::string RunPaths::online_text() const { return out_dir + "/online_report.txt"; }
std::string RunPaths::reproduce_summary() const { return out_dir + "/reproduce_summary.txt"; }
std::string RunPaths::effective_config() const { return out_dir + "/effective_config.cfg"; }

SimulateSummary run_simulate(const RunConfig& config) {
  config.validate();
  const RunPaths paths{config.out_dir};
  ensure_dir(config.out_dir);
  try {
    const World world = build_world(config.world, config.stage_seed("world"));
    save_world(paths.world(), world);

    std::ofstream out(paths.logs(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + paths.logs());
    out << json{{"meta", meta_json(config)}}.dump() << '\n';

    const std::uint64_t sim_seed = config.stage_seed("simulate");
    const RankingPolicy logging_policy = random_policy(derive_seed(sim_seed, "policy"));
    const int num_items = static_cast<int>(world.items.size());

    SimulateSummary summary;
    summary.sessions = config.sessions;
    std::int64_t positives = 0, examined = 0, clicks = 0;
    for (int s = 0; s < config.sessions; ++s) {
      Rng rng(derive_seed(sim_seed, "draw", static_cast<std::uint64_t>(s)));
      const auto user = static_cast<UserId>(
          rng.uniform_int(0, static_cast<int>(world.users.size()) - 1));
      std::vector<ItemId> slate(static_cast<std::size_t>(num_items));
      std::iota(slate.begin(), slate.end(), 0);
      if (num_items > config.world.slate_size) {
        std::shuffle(slate.begin(), slate.end(), rng.engine());
        slate.resize(static_cast<std::size_t>(config.world.slate_size));
      }
      const NestedSessionLog log =
          simulate_session(world, user, slate, derive_seed(sim_seed, "session", s));
      write_session_logs(out, std::span<const NestedSessionLog>(&log, 1));

      summary.impressions += static_cast<std::int64_t>(log.l1_slate.size());
      for (std::size_t i = 0; i < log.l1_slate.size(); ++i) {
        positives += log.l1_observations[i].any_positive() ? 1 : 0;
        examined += log.examined_l1[i] ? 1 : 0;
        clicks += log.l1_observations[i].clicks;
      }
    }
    summary.positive_rate = summary.impressions > 0
                                ? static_cast<double>(positives) /
                                      static_cast<double>(summary.impressions)
                                : 0.0;
    summary.click_through_rate =
        examined > 0 ? static_cast<double>(clicks) / static_cast<double>(examined) : 0.0;

    json j;
    j["meta"] = meta_json(config);
    j["sessions"] = summary.sessions;
    j["impressions"] = summary.impressions;
    j["positive_rate"] = summary.positive_rate;
    j["click_through_rate"] = summary.click_through_rate;
    write_json(paths.simulate_summary(), j);

    std::ofstream cfg(paths.effective_config(), std::ios::binary);
    cfg << "# " << config.meta_comment() << '\n' << config.canonical_text();
    return summary;
  } catch (const std::exception& e) {
    stage_error("simulate", e);
  }
}

PrepareSummary run_prepare(const RunConfig& config) {
  config.validate();
  const RunPaths paths{config.out_dir};
  try {
    const World world = load_world(paths.world());
    std::ifstream in(paths.logs(), std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + paths.logs() + " (run simulate first)");
    const std::vector<NestedSessionLog> logs = read_session_logs(in);

    std::vector<LabeledExample> examples = build_examples(
        world, logs, config.weights_l1, config.weights_l2, config.labeling.debias_l1);
    examples = negative_sample(std::move(examples), config.labeling.target_positive_rate,
                               config.stage_seed("negative-sample"));
    const auto splits = stratified_split(examples, config.labeling.split_ratios,
                                         config.stage_seed("stratified-split"));

    PrepareSummary summary;
    json meta;
    meta["meta"] = meta_json(config);
    for (const RankingDataset& split : splits) {
      const auto s = static_cast<std::size_t>(split.split);
      summary.examples_per_split[s] = split.examples.size();
      summary.groups_per_split[s] = split.num_groups();
      summary.positive_rate_per_split[s] = split.positive_rate;
      write_dataset(paths.dataset(split.split), split, config.meta_comment());
      meta[std::string(split_name(split.split))] =
          json{{"examples", split.examples.size()},
               {"groups", split.num_groups()},
               {"positive_rate", split.positive_rate}};
    }
    write_json(paths.dataset_meta(), meta);
    return summary;
  } catch (const std::exception& e) {
    stage_error("prepare", e);
  }
}

TrainSummary run_train(const RunConfig& config, LabelKind label) {
  config.validate();
  const RunPaths paths{config.out_dir};
  try {
    const RankingDataset train = read_dataset(paths.dataset(Split::Train), Split::Train);
    const RankingDataset validation =
        read_dataset(paths.dataset(Split::Validation), Split::Validation);

    SearchResult search = hyperparameter_search(
        train, validation, label, config.search_space, config.search_trials,
        config.stage_seed("search", static_cast<std::uint64_t>(label)), config.train);

    save_model(paths.model(label), search.best_model, config.meta_comment());
    write_trial_log(paths.trial_log(label), search.trials, config.meta_comment());

    TrainSummary summary;
    summary.label = label;
    summary.validation_dcg = search.best_model.meta.best_validation_dcg;
    summary.model_trees = static_cast<int>(search.best_model.trees.size());
    summary.trials = static_cast<int>(search.trials.size());
    return summary;
  } catch (const std::exception& e) {
    stage_error("train", e);
  }
}

std::map<LabelKind, BoostedRanker> load_all_models(const RunPaths& paths) {
  std::map<LabelKind, BoostedRanker> models;
  for (LabelKind kind : kAllLabelKinds) {
    models.emplace(kind, load_model(paths.model(kind)));
  }
  return models;
}

EvaluationMatrix run_eval_offline(const RunConfig& config) {
  config.validate();
  const RunPaths paths{config.out_dir};
  try {
    const RankingDataset test = read_dataset(paths.dataset(Split::Test), Split::Test);
    const auto models = load_all_models(paths);
    const EvaluationMatrix matrix = build_matrix(models, test, config.eval.ks);
    write_matrix_reports(paths.matrix_tsv(), paths.matrix_text(), matrix, config.meta_comment());
    return matrix;
  } catch (const std::exception& e) {
    stage_error("evaluate-offline", e);
  }
}

OnlineReport run_eval_online(const RunConfig& config) {
  config.validate();
  const RunPaths paths{config.out_dir};
  try {
    const World world = load_world(paths.world());
    std::map<LabelKind, BoostedRanker> models;
    for (LabelKind kind : kPredictorLabels) models.emplace(kind, load_model(paths.model(kind)));
    EvalOptions options = config.eval;
    // Per-seed evaluation streams branch off the master seed so two
    // runs with the same config are bit-identical.
    std::vector<std::uint64_t> derived;
    derived.reserve(options.seeds.size());
    for (std::uint64_t s : options.seeds) derived.push_back(config.stage_seed("eval-online", s));
    options.seeds = std::move(derived);
    OnlineReport report =
        online_compare(world, models, config.weights_l1, config.weights_l2, options);
    report.seeds = config.eval.seeds;  // report the configured labels, not the derived streams
    write_online_reports(paths.online_tsv(), paths.online_text(), report, config.meta_comment());
    return report;
  } catch (const std::exception& e) {
    stage_error("evaluate-online", e);
  }
}

OrderingChecks evaluate_ordering_checks(const RunConfig& config, const EvaluationMatrix& matrix,
                                        const OnlineReport& online) {
  OrderingChecks checks;
  if (config.world.l2_size == 0) {
    checks.degenerate_world = true;
    checks.notice =
        "degenerate world (l2_size = 0): S1/S2/S3 labels coincide; ordering checks skipped";
    return checks;
  }

  checks.matrix_ok = true;
  for (int k : matrix.ks) {
    for (LabelKind truth : {LabelKind::S2, LabelKind::S3}) {
      const double s3_loss = matrix.at(k, LabelKind::S3, truth);
      const double s1_loss = matrix.at(k, LabelKind::S1, truth);
      if (!(s3_loss < s1_loss)) checks.matrix_ok = false;
    }
    for (LabelKind diag : kPredictorLabels) {
      if (matrix.at(k, diag, diag) != 0.0) checks.matrix_ok = false;
    }
  }

  checks.online_ok = !online.verdicts.empty();
  for (const PairVerdict& verdict : online.verdicts) {
    if (!verdict.significant || !verdict.direction_ok) checks.online_ok = false;
  }

  std::ostringstream notice;
  notice << "ordering checks: offline matrix "
         << (checks.matrix_ok ? "OK" : "FAILED (S3 predictor does not dominate S1 on "
                                       "L2-bearing truths at every cutoff)")
         << "; online Q ordering "
         << (checks.online_ok ? "OK" : "FAILED (Q(S3) > Q(S2) > Q(S1) not significant)");
  checks.notice = notice.str();
  return checks;
}

OrderingChecks run_reproduce(const RunConfig& config) {
  const SimulateSummary sim = run_simulate(config);
  std::cout << "[simulate] sessions=" << sim.sessions << " impressions=" << sim.impressions
            << " positive_rate=" << sim.positive_rate << " ctr=" << sim.click_through_rate
            << '\n';
  const PrepareSummary prep = run_prepare(config);
  for (int s = 0; s < 3; ++s) {
    std::cout << "[prepare] " << split_name(static_cast<Split>(s))
              << ": examples=" << prep.examples_per_split[s]
              << " groups=" << prep.groups_per_split[s]
              << " positive_rate=" << prep.positive_rate_per_split[s] << '\n';
  }
  for (LabelKind label : kAllLabelKinds) {
    const TrainSummary t = run_train(config, label);
    std::cout << "[train] label=" << label_kind_name(label) << " trees=" << t.model_trees
              << " validation_dcg=" << t.validation_dcg << '\n';
  }
  const EvaluationMatrix matrix = run_eval_offline(config);
  const OnlineReport online = run_eval_online(config);

  const OrderingChecks checks = evaluate_ordering_checks(config, matrix, online);
  const RunPaths paths{config.out_dir};
  std::ofstream out(paths.reproduce_summary(), std::ios::binary);
  out << "# " << config.meta_comment() << '\n';
  out << checks.notice << '\n';
  out << "result: " << (checks.passed() ? "PASS" : "FAIL") << '\n';
  std::cout << checks.notice << '\n';
  return checks;
}

}  // namespace nrank
