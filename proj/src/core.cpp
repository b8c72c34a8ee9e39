#include "nrank/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nrank {

void SignalVector::validate() const {
  if (likes < 0 || shares < 0 || favs < 0 || clicks < 0) {
    throw std::invalid_argument("SignalVector: counts must be non-negative");
  }
}

void ScalarizationWeights::validate() const {
  if (likes < 0 || shares < 0 || favs < 0 || clicks < 0) {
    throw std::invalid_argument("ScalarizationWeights: weights must be non-negative");
  }
  if (likes == 0 && shares == 0 && favs == 0 && clicks == 0) {
    throw std::invalid_argument("ScalarizationWeights: at least one weight must be positive");
  }
}

Position::Position(int index) : index_(index) {
  if (index < 1) {
    throw std::invalid_argument("Position: index must be >= 1, got " + std::to_string(index));
  }
}

std::string_view label_kind_name(LabelKind kind) {
  switch (kind) {
    case LabelKind::S1: return "s1";
    case LabelKind::S2: return "s2";
    case LabelKind::S3: return "s3";
    case LabelKind::Likes: return "likes";
    case LabelKind::Shares: return "shares";
    case LabelKind::Favs: return "favs";
    case LabelKind::Clicks: return "clicks";
  }
  throw std::invalid_argument("label_kind_name: bad enum value");
}

LabelKind label_kind_from_name(std::string_view name) {
  for (LabelKind k : kAllLabelKinds) {
    if (label_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown label kind: " + std::string(name));
}

double examination_probability(Position pos) {
  return 1.0 / std::log2(1.0 + static_cast<double>(pos.index()));
}

double dcg_at_k(std::span<const double> gains, int k) {
  if (gains.empty()) {
    throw std::invalid_argument("dcg_at_k: gains must be non-empty");
  }
  if (k < 1) {
    throw std::invalid_argument("dcg_at_k: k must be >= 1, got " + std::to_string(k));
  }
  const std::size_t limit = std::min<std::size_t>(gains.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t i = 0; i < limit; ++i) {
    if (gains[i] < 0.0) {
      throw std::invalid_argument("dcg_at_k: gains must be non-negative");
    }
    dcg += gains[i] / std::log2(2.0 + static_cast<double>(i));
  }
  return dcg;
}

double scalarize(const SignalVector& signals, const ScalarizationWeights& weights) {
  signals.validate();
  weights.validate();
  return signals.likes * weights.likes + signals.shares * weights.shares +
         signals.favs * weights.favs + signals.clicks * weights.clicks;
}

double debias(double observed_reward, Position pos) {
  if (observed_reward < 0.0) {
    throw std::invalid_argument("debias: reward must be non-negative");
  }
  return observed_reward / examination_probability(pos);
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores,
                                       std::span<const ItemId> item_ids) {
  if (scores.size() != item_ids.size()) {
    throw std::invalid_argument("rank_by_score: scores/item_ids size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return item_ids[a] < item_ids[b];
  });
  return order;
}

double ranked_dcg_at_k(std::span<const double> scores, std::span<const double> gains,
                       std::span<const ItemId> item_ids, int k) {
  if (scores.size() != gains.size()) {
    throw std::invalid_argument("ranked_dcg_at_k: scores/gains size mismatch");
  }
  const std::vector<std::size_t> order = rank_by_score(scores, item_ids);
  std::vector<double> ordered_gains(gains.size());
  for (std::size_t r = 0; r < order.size(); ++r) ordered_gains[r] = gains[order[r]];
  return dcg_at_k(ordered_gains, k);
}

}  // namespace nrank
