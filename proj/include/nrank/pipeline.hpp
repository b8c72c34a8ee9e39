#pragma once

#include <map>
#include <string>

#include "nrank/config.hpp"

namespace nrank {

// Stable file layout under RunConfig.out_dir; each stage reads the
// previous stage's files, so any command can be rerun in isolation.
struct RunPaths {
  std::string out_dir;

  std::string world() const;
  std::string logs() const;
  std::string simulate_summary() const;
  std::string dataset(Split split) const;
  std::string dataset_meta() const;
  std::string model(LabelKind label) const;
  std::string trial_log(LabelKind label) const;
  std::string matrix_tsv() const;
  std::string matrix_text() const;
  std::string online_tsv() const;
  std::string online_text() const;
  std::string reproduce_summary() const;
  std::string effective_config() const;
};

struct SimulateSummary {
  int sessions = 0;
  std::int64_t impressions = 0;
  double positive_rate = 0.0;   // share of L1 impressions with any signal
  double click_through_rate = 0.0;  // clicks per examined L1 impression
};

struct PrepareSummary {
  std::array<std::size_t, 3> examples_per_split{};
  std::array<std::size_t, 3> groups_per_split{};
  std::array<double, 3> positive_rate_per_split{};
};

struct TrainSummary {
  LabelKind label = LabelKind::S1;
  double validation_dcg = 0.0;
  int model_trees = 0;
  int trials = 0;
};

// Outcome of the reproduce ordering checks on one run.
struct OrderingChecks {
  bool degenerate_world = false;  // l2_size == 0: checks skipped
  bool matrix_ok = false;         // S3 predictor beats S1 on L2-bearing truths, diagonals 0
  bool online_ok = false;         // Q(S3) > Q(S2) > Q(S1), Bonferroni-significant
  std::string notice;

  bool passed() const { return degenerate_world || (matrix_ok && online_ok); }
};

SimulateSummary run_simulate(const RunConfig& config);
PrepareSummary run_prepare(const RunConfig& config);
TrainSummary run_train(const RunConfig& config, LabelKind label);
EvaluationMatrix run_eval_offline(const RunConfig& config);
OnlineReport run_eval_online(const RunConfig& config);

// Full chain: simulate, prepare, train all seven labels, offline
// matrix, online comparison, ordering checks. Returns the checks;
// callers map `passed()` to the process exit code.
OrderingChecks run_reproduce(const RunConfig& config);

OrderingChecks evaluate_ordering_checks(const RunConfig& config, const EvaluationMatrix& matrix,
                                        const OnlineReport& online);

std::map<LabelKind, BoostedRanker> load_all_models(const RunPaths& paths);

}  // namespace nrank
