#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrank/core.hpp"
#include "nrank/simulator.hpp"

namespace nrank {

struct LabeledExample {
  GroupId group_id = 0;
  ItemId item_id = 0;
  std::vector<double> features;
  LabelValues labels{};  // indexed by LabelKind
  bool positive = false;  // union of the raw signal columns

  double label(LabelKind kind) const { return labels[static_cast<int>(kind)]; }
};

enum class Split : int { Train = 0, Validation = 1, Test = 2 };

std::string_view split_name(Split split);

// Grouped labeled examples for one split. Examples of a group are
// contiguous; groups never straddle splits.
struct RankingDataset {
  Split split = Split::Train;
  int feature_dim = 0;
  double positive_rate = 0.0;
  std::vector<LabeledExample> examples;

  // [begin, end) example ranges, one per group, in storage order.
  std::vector<std::pair<std::size_t, std::size_t>> group_ranges() const;
  std::size_t num_groups() const;
  void recompute_positive_rate();
};

struct LabelingOptions {
  double target_positive_rate = 0.05;
  std::array<double, 3> split_ratios = {0.70, 0.15, 0.15};
  bool debias_l1 = false;

  void validate() const;
};

// Per-L1-item label columns for one session log:
//   S1 = scalarized L1 observation,
//   S2 = S1 + position-discounted sum of scalarized L2 observations,
//   S3 = S1 + plain sum of scalarized L2 observations,
// plus the raw signal columns copied from y_i0. With debias_l1 the L1
// component is inverse-propensity scaled by its slate position.
std::vector<LabelValues> make_labels(const NestedSessionLog& log,
                                     const ScalarizationWeights& weights_l1,
                                     const ScalarizationWeights& weights_l2,
                                     bool debias_l1 = false);

// Fixed-layout feature vector for a (user, item) pair:
// user latent, item latent, dot product, user's affinity for the item
// genre, popularity, fatigue, signup recency, genre one-hot, language
// one-hot.
std::vector<double> extract_features(const World& world, UserId user, ItemId item);
int feature_dim(const WorldConfig& config);
std::vector<std::string> feature_names(const WorldConfig& config);

// One example per logged slate position; group id = index of the log.
std::vector<LabeledExample> build_examples(const World& world,
                                           std::span<const NestedSessionLog> logs,
                                           const ScalarizationWeights& weights_l1,
                                           const ScalarizationWeights& weights_l2,
                                           bool debias_l1 = false);

// Keeps every positive example and uniformly subsamples zero-signal
// examples until the positive rate reaches the target. Input order is
// preserved. Throws if there are no positives.
std::vector<LabeledExample> negative_sample(std::vector<LabeledExample> examples,
                                            double target_positive_rate, std::uint64_t seed);

// Group-level split; strata are "group contains a positive example"
// vs not; per-stratum allocation uses largest-remainder rounding of
// the ratios. Groups are never divided.
std::array<RankingDataset, 3> stratified_split(std::span<const LabeledExample> examples,
                                               std::array<double, 3> ratios, std::uint64_t seed);

// Tab-separated dataset file with a header row; doubles serialized in
// shortest round-trip decimal form, so write -> read is bit-exact.
void write_dataset(const std::string& path, const RankingDataset& dataset,
                   const std::string& meta_comment = "");
RankingDataset read_dataset(const std::string& path, Split split);

}  // namespace nrank
