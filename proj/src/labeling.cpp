#include "nrank/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  throw std::invalid_argument("split_name: bad enum value");
}

std::vector<std::pair<std::size_t, std::size_t>> RankingDataset::group_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= examples.size(); ++i) {
    if (i == examples.size() || examples[i].group_id != examples[begin].group_id) {
      ranges.emplace_back(begin, i);
      begin = i;
    }
  }
  return ranges;
}

std::size_t RankingDataset::num_groups() const { return group_ranges().size(); }

void RankingDataset::recompute_positive_rate() {
  if (examples.empty()) {
    positive_rate = 0.0;
    return;
  }
  std::size_t positives = 0;
  for (const LabeledExample& e : examples) positives += e.positive ? 1 : 0;
  positive_rate = static_cast<double>(positives) / static_cast<double>(examples.size());
}

void LabelingOptions::validate() const {
  if (!(target_positive_rate > 0.0 && target_positive_rate < 1.0)) {
    throw std::invalid_argument("labeling: target_positive_rate must be in (0, 1)");
  }
  double sum = 0.0;
  for (double r : split_ratios) {
    if (r <= 0.0) throw std::invalid_argument("labeling: split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("labeling: split ratios must sum to 1");
  }
}

std::vector<LabelValues> make_labels(const NestedSessionLog& log,
                                     const ScalarizationWeights& weights_l1,
                                     const ScalarizationWeights& weights_l2, bool debias_l1) {
  log.validate();
  const std::size_t n = log.l1_slate.size();
  std::vector<LabelValues> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SignalVector& y = log.l1_observations[i];
    double l1 = scalarize(y, weights_l1);
    if (debias_l1) l1 = debias(l1, Position(static_cast<int>(i) + 1));

    double l2_sum = 0.0;
    double l2_dcg = 0.0;
    const auto& nested = log.l2_observations[i];
    for (std::size_t j = 0; j < nested.size(); ++j) {
      const double r = scalarize(nested[j], weights_l2);
      l2_sum += r;
      l2_dcg += r / std::log2(2.0 + static_cast<double>(j));
    }

    LabelValues& row = labels[i];
    row[static_cast<int>(LabelKind::S1)] = l1;
    row[static_cast<int>(LabelKind::S2)] = l1 + l2_dcg;
    row[static_cast<int>(LabelKind::S3)] = l1 + l2_sum;
    row[static_cast<int>(LabelKind::Likes)] = y.likes;
    row[static_cast<int>(LabelKind::Shares)] = y.shares;
    row[static_cast<int>(LabelKind::Favs)] = y.favs;
    row[static_cast<int>(LabelKind::Clicks)] = y.clicks;
  }
  return labels;
}

int feature_dim(const WorldConfig& config) {
  return 2 * config.latent_dim + 5 + config.num_genres + config.num_languages;
}

std::vector<std::string> feature_names(const WorldConfig& config) {
  std::vector<std::string> names;
  for (int d = 0; d < config.latent_dim; ++d) names.push_back("user_latent_" + std::to_string(d));
  for (int d = 0; d < config.latent_dim; ++d) names.push_back("item_latent_" + std::to_string(d));
  names.push_back("dot_product");
  names.push_back("genre_affinity");
  names.push_back("popularity");
  names.push_back("fatigue");
  names.push_back("signup_recency");
  for (int g = 0; g < config.num_genres; ++g) names.push_back("genre_" + std::to_string(g));
  for (int l = 0; l < config.num_languages; ++l) names.push_back("language_" + std::to_string(l));
  return names;
}

std::vector<double> extract_features(const World& world, UserId user, ItemId item) {
  if (user < 0 || user >= static_cast<UserId>(world.users.size())) {
    throw std::invalid_argument("extract_features: unknown user id " + std::to_string(user));
  }
  if (item < 0 || item >= static_cast<ItemId>(world.items.size())) {
    throw std::invalid_argument("extract_features: unknown item id " + std::to_string(item));
  }
  const UserProfile& u = world.users[user];
  const ItemProfile& a = world.items[item];
  const WorldConfig& cfg = world.config;

  std::vector<double> f;
  f.reserve(feature_dim(cfg));
  f.insert(f.end(), u.latent.begin(), u.latent.end());
  f.insert(f.end(), a.latent.begin(), a.latent.end());
  double dot = 0.0;
  for (int d = 0; d < cfg.latent_dim; ++d) dot += u.latent[d] * a.latent[d];
  f.push_back(dot);
  f.push_back(u.genre_affinity[a.genre]);
  f.push_back(a.popularity);
  f.push_back(u.fatigue);
  f.push_back(u.signup_recency);
  for (int g = 0; g < cfg.num_genres; ++g) f.push_back(g == a.genre ? 1.0 : 0.0);
  for (int l = 0; l < cfg.num_languages; ++l) f.push_back(l == u.language ? 1.0 : 0.0);
  return f;
}

std::vector<LabeledExample> build_examples(const World& world,
                                           std::span<const NestedSessionLog> logs,
                                           const ScalarizationWeights& weights_l1,
                                           const ScalarizationWeights& weights_l2,
                                           bool debias_l1) {
  std::vector<LabeledExample> examples;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    const NestedSessionLog& log = logs[s];
    const std::vector<LabelValues> labels = make_labels(log, weights_l1, weights_l2, debias_l1);
    for (std::size_t i = 0; i < log.l1_slate.size(); ++i) {
      LabeledExample e;
      e.group_id = static_cast<GroupId>(s);
      e.item_id = log.l1_slate[i];
      e.features = extract_features(world, log.user_id, log.l1_slate[i]);
      e.labels = labels[i];
      e.positive = log.l1_observations[i].any_positive();
      examples.push_back(std::move(e));
    }
  }
  return examples;
}

std::vector<LabeledExample> negative_sample(std::vector<LabeledExample> examples,
                                            double target_positive_rate, std::uint64_t seed) {
  if (!(target_positive_rate > 0.0 && target_positive_rate < 1.0)) {
    throw std::invalid_argument("negative_sample: target rate must be in (0, 1)");
  }
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].positive) {
      ++positives;
    } else {
      negatives.push_back(i);
    }
  }
  if (positives == 0) {
    throw std::invalid_argument("negative_sample: no positive examples in the input");
  }
  const auto keep_limit = static_cast<std::size_t>(
      std::floor(static_cast<double>(positives) * (1.0 - target_positive_rate) /
                 target_positive_rate));
  if (negatives.size() <= keep_limit) return examples;  // already at or above target

  Rng rng(derive_seed(seed, "negative-sample"));
  std::shuffle(negatives.begin(), negatives.end(), rng.engine());
  std::vector<char> keep(examples.size(), 0);
  for (std::size_t i = 0; i < examples.size(); ++i) keep[i] = examples[i].positive ? 1 : 0;
  for (std::size_t i = 0; i < keep_limit; ++i) keep[negatives[i]] = 1;

  std::vector<LabeledExample> out;
  out.reserve(positives + keep_limit);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (keep[i]) out.push_back(std::move(examples[i]));
  }
  return out;
}

namespace {

// Largest-remainder apportionment of `total` into shares `ratios`;
// ties go to the earlier split.
std::array<std::size_t, 3> largest_remainder(std::size_t total, std::array<double, 3> ratios) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> fractions{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = static_cast<double>(total) * ratios[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    fractions[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fractions[a] != fractions[b]) return fractions[a] > fractions[b];
    return a < b;
  });
  for (std::size_t r = 0; r < total - assigned; ++r) counts[order[r % 3]] += 1;
  return counts;
}

}  // namespace

std::array<RankingDataset, 3> stratified_split(std::span<const LabeledExample> examples,
                                               std::array<double, 3> ratios, std::uint64_t seed) {
  double ratio_sum = 0.0;
  for (double r : ratios) {
    if (r <= 0.0) throw std::invalid_argument("stratified_split: ratios must be positive");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("stratified_split: ratios must sum to 1");
  }

  // Group ids in first-appearance order, with their example indices.
  std::vector<GroupId> group_order;
  std::map<GroupId, std::vector<std::size_t>> members;
  std::map<GroupId, bool> group_positive;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    GroupId g = examples[i].group_id;
    auto [it, inserted] = members.try_emplace(g);
    if (inserted) group_order.push_back(g);
    it->second.push_back(i);
    group_positive[g] = group_positive[g] || examples[i].positive;
  }
  if (group_order.size() < 3) {
    throw std::invalid_argument("stratified_split: need at least 3 groups");
  }

  std::array<std::vector<GroupId>, 2> strata;  // [0]=has positive, [1]=all negative
  for (GroupId g : group_order) strata[group_positive[g] ? 0 : 1].push_back(g);

  std::array<std::vector<GroupId>, 3> split_groups;
  Rng rng(derive_seed(seed, "stratified-split"));
  for (auto& stratum : strata) {
    if (stratum.empty()) continue;
    if (stratum.size() < 3) {
      throw std::invalid_argument(
          "stratified_split: a stratum has fewer than 3 groups; cannot populate all splits");
    }
    std::shuffle(stratum.begin(), stratum.end(), rng.engine());
    const auto counts = largest_remainder(stratum.size(), ratios);
    std::size_t offset = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < counts[s]; ++c) split_groups[s].push_back(stratum[offset++]);
    }
  }

  std::array<RankingDataset, 3> out;
  for (int s = 0; s < 3; ++s) {
    out[s].split = static_cast<Split>(s);
    out[s].feature_dim = examples.empty() ? 0 : static_cast<int>(examples[0].features.size());
    std::sort(split_groups[s].begin(), split_groups[s].end());
    for (GroupId g : split_groups[s]) {
      for (std::size_t idx : members[g]) out[s].examples.push_back(examples[idx]);
    }
    out[s].recompute_positive_rate();
  }
  return out;
}

void write_dataset(const std::string& path, const RankingDataset& dataset,
                   const std::string& meta_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
  if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
  out << "group_id\titem_id";
  for (int f = 0; f < dataset.feature_dim; ++f) out << "\tfeature_" << f;
  for (LabelKind k : kAllLabelKinds) out << "\tlabel_" << label_kind_name(k);
  out << '\n';
  for (const LabeledExample& e : dataset.examples) {
    out << e.group_id << '\t' << e.item_id;
    for (double f : e.features) out << '\t' << format_double(f);
    for (double l : e.labels) out << '\t' << format_double(l);
    out << '\n';
  }
}

RankingDataset read_dataset(const std::string& path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path);

  RankingDataset dataset;
  dataset.split = split;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (std::string_view col : split_fields(line)) header.emplace_back(col);
    break;
  }
  const std::size_t expected_tail = kNumLabelKinds;
  if (header.size() < 2 + expected_tail || header[0] != "group_id" || header[1] != "item_id") {
    throw std::runtime_error("read_dataset: unexpected header in " + path);
  }
  dataset.feature_dim = static_cast<int>(header.size() - 2 - expected_tail);
  for (int f = 0; f < dataset.feature_dim; ++f) {
    if (header[2 + f] != "feature_" + std::to_string(f)) {
      throw std::runtime_error("read_dataset: unexpected feature column order in " + path);
    }
  }

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("read_dataset: bad column count in " + path);
    }
    LabeledExample e;
    e.group_id = parse_int<GroupId>(fields[0]);
    e.item_id = parse_int<ItemId>(fields[1]);
    e.features.reserve(dataset.feature_dim);
    for (int f = 0; f < dataset.feature_dim; ++f) {
      double v = parse_double(fields[2 + f]);
      if (!std::isfinite(v)) {
        throw std::runtime_error("read_dataset: non-finite feature value in " + path);
      }
      e.features.push_back(v);
    }
    for (int l = 0; l < kNumLabelKinds; ++l) {
      double v = parse_double(fields[2 + dataset.feature_dim + l]);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::runtime_error("read_dataset: bad label value in " + path);
      }
      e.labels[l] = v;
    }
    e.positive = e.label(LabelKind::Likes) > 0 || e.label(LabelKind::Shares) > 0 ||
                 e.label(LabelKind::Favs) > 0 || e.label(LabelKind::Clicks) > 0;
    dataset.examples.push_back(std::move(e));
  }
  dataset.recompute_positive_rate();
  return dataset;
}

}  // namespace nrank
