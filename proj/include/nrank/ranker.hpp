#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrank/core.hpp"
#include "nrank/labeling.hpp"

namespace nrank {

enum class Objective : int { Pointwise = 0, LambdaRank = 1 };

std::string_view objective_name(Objective objective);
Objective objective_from_name(std::string_view name);

struct TrainConfig {
  Objective objective = Objective::LambdaRank;
  int num_trees_max = 200;
  int max_depth = 5;
  int min_examples_per_leaf = 20;
  double learning_rate = 0.1;
  int histogram_bins = 64;
  // <= 0 means "auto": #negative / #positive on the training split.
  double scale_pos_weight = 0.0;
  int early_stopping_patience = 50;
  int early_stopping_dcg_k = 10;
  double sigma = 1.0;   // pairwise sigmoid sharpness
  double l2_reg = 1.0;  // leaf denominator regularizer
  double base_score = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Binary regression tree node; feature < 0 marks a leaf. Routing:
// feature value <= threshold goes left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> features) const;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  LabelKind label = LabelKind::S1;
  int iterations_run = 0;
  int best_iteration = 0;  // tree count of the returned snapshot
  double best_validation_dcg = 0.0;
  std::string warning;  // empty, or a degenerate-training note
};

// score(x) = base_score + learning_rate * sum_t tree_t(x).
struct BoostedRanker {
  Objective objective = Objective::LambdaRank;
  int feature_dim = 0;
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::vector<std::vector<double>> bin_edges;  // per feature, ascending
  std::vector<Tree> trees;
  TrainingMeta meta;

  double score(std::span<const double> features) const;
};

// |gain_a - gain_b| * |disc(a) - disc(b)| for swapping the items at
// 1-based positions a and b of a ranked gain list, where disc(p) is
// 1/log2(1+p) inside the cutoff and 0 beyond it.
double delta_dcg(std::span<const double> gains_in_rank_order, Position pos_a, Position pos_b,
                 int k);

struct GradientPair {
  double grad = 0.0;
  double hess = 0.0;
};

// LambdaRank-style pseudo-gradients for one group. For each pair with
// gains[i] > gains[j]:
//   rho   = 1 / (1 + exp(sigma * (s_i - s_j)))
//   grad_i -= sigma * rho * dDCG,  grad_j += sigma * rho * dDCG
//   hess_{i,j} += sigma^2 * rho * (1 - rho) * dDCG
// with dDCG taken at the current descending-score ranking. Gradient
// contributions are snapped to a 2^-40 grid so the per-group gradient
// sum cancels exactly.
std::vector<GradientPair> lambda_gradients(std::span<const double> scores,
                                           std::span<const double> gains, int k, double sigma);

// fit() trains on `label`, evaluating mean per-group DCG@k on the
// validation split after every tree (gains = the training label), and
// returns the snapshot of the best validation iteration. Stops early
// after `early_stopping_patience` iterations without improvement.
BoostedRanker fit(const RankingDataset& train, const RankingDataset& validation, LabelKind label,
                  const TrainConfig& config);

struct HyperparameterSpace {
  double learning_rate_min = 0.05;
  double learning_rate_max = 0.3;
  int max_depth_min = 3;
  int max_depth_max = 6;
  int num_trees_max_min = 150;
  int num_trees_max_max = 300;
  int min_examples_per_leaf_min = 10;
  int min_examples_per_leaf_max = 100;

  void validate() const;
};

struct TrialResult {
  int trial = 0;
  TrainConfig config;
  double validation_dcg = 0.0;
  int model_trees = 0;
};

struct SearchResult {
  TrainConfig best_config;
  BoostedRanker best_model;
  std::vector<TrialResult> trials;
};

// Seeded random search: samples `n_trials` configs from `space` (other
// fields copied from `base`), trains each, and selects by validation
// DCG; ties broken by fewer trees, then lower depth, then trial order.
SearchResult hyperparameter_search(const RankingDataset& train, const RankingDataset& validation,
                                   LabelKind label, const HyperparameterSpace& space, int n_trials,
                                   std::uint64_t seed, const TrainConfig& base);

// Versioned self-describing model file (JSON); lossless round-trip.
void save_model(const std::string& path, const BoostedRanker& model,
                const std::string& provenance = "");
BoostedRanker load_model(const std::string& path);

void write_trial_log(const std::string& path, std::span<const TrialResult> trials,
                     const std::string& meta_comment = "");

}  // namespace nrank
