#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nrank/core.hpp"
#include "nrank/labeling.hpp"
#include "nrank/ranker.hpp"
#include "nrank/simulator.hpp"

namespace nrank {

struct EvalOptions {
  std::vector<int> ks = {3, 5, 10};
  int sessions_per_seed = 4000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int candidate_pool = 60;

  void validate() const;
};

// Mean over groups of DCG@k when each group is ranked by descending
// model score (ties by ascending item id) and gains are taken from
// `gain_label`.
double mean_group_dcg(const BoostedRanker& model, const RankingDataset& dataset,
                      LabelKind gain_label, int k);

// 100 * (base - pred) / base. Requires base > 0.
double percent_loss(double dcg_base, double dcg_pred);

inline constexpr std::array<LabelKind, 3> kPredictorLabels = {LabelKind::S1, LabelKind::S2,
                                                              LabelKind::S3};

// Percent loss in DCG of each predictor model, against a model trained
// on each true relevance signal, per cutoff. Diagonal entries (same
// model both sides) are exactly zero.
struct EvaluationMatrix {
  std::vector<int> ks;
  // entries[k_index][predictor (S1..S3)][true label (all 7 kinds)]
  std::vector<std::array<std::array<double, kNumLabelKinds>, 3>> entries;

  double at(int k, LabelKind predictor, LabelKind truth) const;
};

EvaluationMatrix build_matrix(const std::map<LabelKind, BoostedRanker>& models,
                              const RankingDataset& test, const std::vector<int>& ks);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Two-sided Welch t-test for a difference in means.
WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);

struct VariantStats {
  LabelKind label = LabelKind::S1;
  double q_mean = 0.0;
  double q_stderr = 0.0;  // across seeds
  double l1_mean = 0.0;
  double l2_mean = 0.0;
  double clicks_mean = 0.0;
  std::vector<QEstimate> per_seed;
};

struct PairVerdict {
  LabelKind high = LabelKind::S1;  // variant expected to win
  LabelKind low = LabelKind::S1;
  double mean_difference = 0.0;  // Q(high) - Q(low)
  WelchResult welch;
  double p_adjusted = 1.0;  // Bonferroni over the three comparisons
  bool significant = false;
  bool direction_ok = false;  // mean_difference > 0
};

struct OnlineReport {
  std::vector<VariantStats> variants;  // S1, S2, S3
  std::vector<PairVerdict> verdicts;   // S2>S1, S3>S1, S3>S2
  std::vector<std::uint64_t> seeds;
  int sessions_per_seed = 0;
  int candidate_pool = 0;
};

// Simulated A/B comparison: per seed and per variant, rank identical
// candidate slates with the variant's model and measure true_q. Welch
// verdicts are Bonferroni-corrected at alpha = 0.05.
OnlineReport online_compare(const World& world, const std::map<LabelKind, BoostedRanker>& models,
                            const ScalarizationWeights& weights_l1,
                            const ScalarizationWeights& weights_l2, const EvalOptions& options);

// Model scores for every (user, item) pair, row-major by user; lets
// online evaluation rank sessions by table lookup.
std::vector<double> score_table(const World& world, const BoostedRanker& model);
RankingPolicy table_policy(const World& world, std::vector<double> scores);

void write_matrix_reports(const std::string& tsv_path, const std::string& text_path,
                          const EvaluationMatrix& matrix, const std::string& meta_comment);
void write_online_reports(const std::string& tsv_path, const std::string& text_path,
                          const OnlineReport& report, const std::string& meta_comment);

}  // namespace nrank
