#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nrank {

using ItemId = std::int32_t;
using UserId = std::int32_t;
using GroupId = std::int64_t;

// Raw engagement counts for one impression. Binary in practice for a
// single impression; kept as counts so aggregated views stay valid.
struct SignalVector {
  int likes = 0;
  int shares = 0;
  int favs = 0;
  int clicks = 0;

  bool all_zero() const { return likes == 0 && shares == 0 && favs == 0 && clicks == 0; }
  // Union of the individual signals; defines a "positive" impression.
  bool any_positive() const { return !all_zero(); }
  void validate() const;  // throws std::invalid_argument on negative counts
};

// Linear weights mapping raw signals to a scalar relevance value.
// L1 and L2 each carry their own instance.
struct ScalarizationWeights {
  double likes = 1.0;
  double shares = 1.0;
  double favs = 1.0;
  double clicks = 1.0;

  void validate() const;  // non-negative, at least one positive
};

// 1-based rank. Position 0 does not exist anywhere in this codebase;
// the constructor enforces it so off-by-one bugs fail loudly.
class Position {
 public:
  explicit Position(int index);
  int index() const { return index_; }

 private:
  int index_;
};

// Label column identifiers: the three synthetic labels plus the raw
// signal columns they are cross-evaluated against.
enum class LabelKind : int {
  S1 = 0,
  S2 = 1,
  S3 = 2,
  Likes = 3,
  Shares = 4,
  Favs = 5,
  Clicks = 6,
};

inline constexpr int kNumLabelKinds = 7;
inline constexpr std::array<LabelKind, kNumLabelKinds> kAllLabelKinds = {
    LabelKind::S1,    LabelKind::S2,   LabelKind::S3,    LabelKind::Likes,
    LabelKind::Shares, LabelKind::Favs, LabelKind::Clicks};

std::string_view label_kind_name(LabelKind kind);
LabelKind label_kind_from_name(std::string_view name);  // throws on unknown name

using LabelValues = std::array<double, kNumLabelKinds>;

inline double label_value(const LabelValues& v, LabelKind k) {
  return v[static_cast<int>(k)];
}

// P(user views rank i) under the position-based model: 1/log2(1+i).
// Equals 1 at the top position and is strictly decreasing.
double examination_probability(Position pos);

// Sum of gains[i]/log2(1+i) over the first min(k, n) positions.
// Gains are consumed in the given order; sorting and tie handling are
// the caller's business.
double dcg_at_k(std::span<const double> gains, int k);

// Dot product of signal counts and weights.
double scalarize(const SignalVector& signals, const ScalarizationWeights& weights);

// Inverse-propensity correction: observed reward divided by the
// examination probability of the position it was logged at.
double debias(double observed_reward, Position pos);

// Indices of `scores` in descending-score order, ties broken by
// ascending item id. The one ranking rule used everywhere (training
// metric, offline evaluation, online policies) so results reproduce
// bit-for-bit.
std::vector<std::size_t> rank_by_score(std::span<const double> scores,
                                       std::span<const ItemId> item_ids);

// DCG@k of `gains` when ordered by rank_by_score(scores, item_ids).
double ranked_dcg_at_k(std::span<const double> scores, std::span<const double> gains,
                       std::span<const ItemId> item_ids, int k);

}  // namespace nrank
