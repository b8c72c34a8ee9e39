#include "nrank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

namespace {

using nlohmann::json;

// Snap to a 2^-40 grid. Pair contributions quantized this way sum to
// an exact multiple of 2^-40 per item, so the per-group gradient sum
// cancels to exactly zero regardless of accumulation order.
double snap(double x) { return std::ldexp(std::nearbyint(std::ldexp(x, 40)), -40); }

double discount_at(int position, int k) {
  if (position > k) return 0.0;
  return 1.0 / std::log2(1.0 + static_cast<double>(position));
}

}  // namespace

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::Pointwise: return "pointwise";
    case Objective::LambdaRank: return "lambdarank";
  }
  throw std::invalid_argument("objective_name: bad enum value");
}

Objective objective_from_name(std::string_view name) {
  if (name == "pointwise") return Objective::Pointwise;
  if (name == "lambdarank") return Objective::LambdaRank;
  throw std::invalid_argument("unknown objective: " + std::string(name));
}

void TrainConfig::validate() const {
  if (num_trees_max < 1) throw std::invalid_argument("train: num_trees_max must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("train: max_depth must be >= 1");
  if (min_examples_per_leaf < 1) {
    throw std::invalid_argument("train: min_examples_per_leaf must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (histogram_bins < 2 || histogram_bins > 256) {
    throw std::invalid_argument("train: histogram_bins must be in [2, 256]");
  }
  if (early_stopping_patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  if (early_stopping_dcg_k < 1) throw std::invalid_argument("train: dcg cutoff must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("train: sigma must be > 0");
  if (l2_reg < 0.0) throw std::invalid_argument("train: l2_reg must be >= 0");
}

void HyperparameterSpace::validate() const {
  if (!(learning_rate_min > 0) || learning_rate_max < learning_rate_min) {
    throw std::invalid_argument("search: bad learning_rate range");
  }
  if (max_depth_min < 1 || max_depth_max < max_depth_min) {
    throw std::invalid_argument("search: bad max_depth range");
  }
  if (num_trees_max_min < 1 || num_trees_max_max < num_trees_max_min) {
    throw std::invalid_argument("search: bad num_trees_max range");
  }
  if (min_examples_per_leaf_min < 1 || min_examples_per_leaf_max < min_examples_per_leaf_min) {
    throw std::invalid_argument("search: bad min_examples_per_leaf range");
  }
}

double Tree::predict(std::span<const double> features) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = features[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

double BoostedRanker::score(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim) {
    throw std::invalid_argument("score: feature dimension mismatch");
  }
  double sum = 0.0;
  for (const Tree& tree : trees) sum += tree.predict(features);
  return base_score + learning_rate * sum;
}

double delta_dcg(std::span<const double> gains_in_rank_order, Position pos_a, Position pos_b,
                 int k) {
  const int n = static_cast<int>(gains_in_rank_order.size());
  if (pos_a.index() > n || pos_b.index() > n) {
    throw std::invalid_argument("delta_dcg: position outside the list");
  }
  if (pos_a.index() == pos_b.index()) {
    throw std::invalid_argument("delta_dcg: positions must differ");
  }
  if (k < 1) throw std::invalid_argument("delta_dcg: k must be >= 1");
  const double gain_a = gains_in_rank_order[pos_a.index() - 1];
  const double gain_b = gains_in_rank_order[pos_b.index() - 1];
  return std::abs(gain_a - gain_b) *
         std::abs(discount_at(pos_a.index(), k) - discount_at(pos_b.index(), k));
}

namespace {

// Shared by the public op and fit(); `positive`/`pos_weight` scale
// pairs whose higher-gain member is a positive example.
std::vector<GradientPair> lambda_gradients_weighted(std::span<const double> scores,
                                                    std::span<const double> gains, int k,
                                                    double sigma,
                                                    std::span<const std::uint8_t> positive,
                                                    double pos_weight,
                                                    std::span<const ItemId> item_ids) {
  if (scores.size() != gains.size()) {
    throw std::invalid_argument("lambda_gradients: scores/gains length mismatch");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("lambda_gradients: sigma must be > 0");
  const std::size_t n = scores.size();
  std::vector<GradientPair> out(n);
  if (n < 2) return out;

  std::vector<ItemId> ids(item_ids.begin(), item_ids.end());
  if (ids.empty()) {
    ids.resize(n);
    std::iota(ids.begin(), ids.end(), 0);
  }
  const std::vector<std::size_t> order = rank_by_score(scores, ids);
  std::vector<int> position_of(n);
  for (std::size_t r = 0; r < n; ++r) position_of[order[r]] = static_cast<int>(r) + 1;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(gains[i] > gains[j])) continue;  // equal gains contribute nothing
      const double dd = std::abs(discount_at(position_of[i], k) - discount_at(position_of[j], k));
      if (dd == 0.0) continue;
      double delta = std::abs(gains[i] - gains[j]) * dd;
      if (!positive.empty() && positive[i]) delta *= pos_weight;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double lambda = snap(sigma * rho * delta);
      out[i].grad -= lambda;
      out[j].grad += lambda;
      const double hess = sigma * sigma * rho * (1.0 - rho) * delta;
      out[i].hess += hess;
      out[j].hess += hess;
    }
  }
  return out;
}

}  // namespace

std::vector<GradientPair> lambda_gradients(std::span<const double> scores,
                                           std::span<const double> gains, int k, double sigma) {
  return lambda_gradients_weighted(scores, gains, k, sigma, {}, 1.0, {});
}

namespace {

// Columnar view of one split, pre-binned for histogram splits.
struct BoundDataset {
  int feature_dim = 0;
  std::size_t rows = 0;
  std::vector<double> labels;
  std::vector<std::uint8_t> positive;
  std::vector<ItemId> item_ids;
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::vector<std::uint8_t> bins;      // rows x features, row-major
  const RankingDataset* source = nullptr;
};

std::vector<std::vector<double>> compute_bin_edges(const RankingDataset& train, int max_bins) {
  const int dim = train.feature_dim;
  const std::size_t rows = train.examples.size();
  std::vector<std::vector<double>> edges(dim);
  std::vector<double> column(rows);
  for (int f = 0; f < dim; ++f) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = train.examples[r].features[f];
    std::sort(column.begin(), column.end());
    std::vector<double>& e = edges[f];
    for (int b = 1; b < max_bins; ++b) {
      const std::size_t idx = rows * static_cast<std::size_t>(b) / static_cast<std::size_t>(max_bins);
      if (idx >= rows) break;
      const double cut = column[idx];
      if (e.empty() || cut > e.back()) e.push_back(cut);
    }
    // Drop a top edge equal to the maximum: the last bin must catch it.
    while (!e.empty() && e.back() >= column.back()) e.pop_back();
  }
  return edges;
}

std::uint8_t bin_of(double value, const std::vector<double>& edges) {
  // First bin whose upper edge is >= value; beyond all edges = last bin.
  const auto it = std::lower_bound(edges.begin(), edges.end(), value);
  return static_cast<std::uint8_t>(it - edges.begin());
}

BoundDataset bind_dataset(const RankingDataset& data, LabelKind label,
                          const std::vector<std::vector<double>>& edges) {
  BoundDataset b;
  b.feature_dim = data.feature_dim;
  b.rows = data.examples.size();
  b.source = &data;
  b.labels.resize(b.rows);
  b.positive.resize(b.rows);
  b.item_ids.resize(b.rows);
  b.bins.resize(b.rows * static_cast<std::size_t>(data.feature_dim));
  for (std::size_t r = 0; r < b.rows; ++r) {
    const LabeledExample& e = data.examples[r];
    if (static_cast<int>(e.features.size()) != data.feature_dim) {
      throw std::invalid_argument("fit: inconsistent feature dimension in dataset");
    }
    b.labels[r] = e.label(label);
    b.positive[r] = e.positive ? 1 : 0;
    b.item_ids[r] = e.item_id;
    for (int f = 0; f < data.feature_dim; ++f) {
      const double v = e.features[f];
      if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite feature value");
      b.bins[r * static_cast<std::size_t>(data.feature_dim) + f] = bin_of(v, edges[f]);
    }
  }
  b.groups = data.group_ranges();
  return b;
}

struct HistogramCell {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

struct SplitChoice {
  int feature = -1;
  int bin = -1;  // go left when bin(value) <= bin
  double gain = 0.0;
};

struct TreeBuilder {
  const BoundDataset& data;
  const std::vector<std::vector<double>>& edges;
  const TrainConfig& config;
  std::span<const double> grad;
  std::span<const double> hess;
  std::vector<std::size_t> row_index;
  Tree tree;

  TreeBuilder(const BoundDataset& d, const std::vector<std::vector<double>>& e,
              const TrainConfig& c, std::span<const double> g, std::span<const double> h)
      : data(d), edges(e), config(c), grad(g), hess(h) {
    row_index.resize(data.rows);
    std::iota(row_index.begin(), row_index.end(), std::size_t{0});
  }

  double leaf_value(double g_sum, double h_sum) const {
    const double denom = h_sum + config.l2_reg;
    return denom > 0.0 ? -g_sum / denom : 0.0;
  }

  double score_part(double g_sum, double h_sum) const {
    const double denom = h_sum + config.l2_reg;
    return denom > 0.0 ? g_sum * g_sum / denom : 0.0;
  }

  SplitChoice best_split(std::size_t begin, std::size_t end, double g_sum, double h_sum) const {
    SplitChoice best;
    const double parent_score = score_part(g_sum, h_sum);
    const std::size_t count = end - begin;
    const auto min_leaf = static_cast<std::size_t>(config.min_examples_per_leaf);
    std::vector<HistogramCell> hist;
    for (int f = 0; f < data.feature_dim; ++f) {
      const std::size_t num_bins = edges[f].size() + 1;
      if (num_bins < 2) continue;
      hist.assign(num_bins, HistogramCell{});
      for (std::size_t p = begin; p < end; ++p) {
        const std::size_t r = row_index[p];
        HistogramCell& cell =
            hist[data.bins[r * static_cast<std::size_t>(data.feature_dim) + f]];
        cell.grad += grad[r];
        cell.hess += hess[r];
        cell.count += 1;
      }
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < num_bins; ++b) {
        gl += hist[b].grad;
        hl += hist[b].hess;
        cl += hist[b].count;
        const std::size_t cr = count - cl;
        if (cl < min_leaf || cr < min_leaf) continue;
        const double gain =
            0.5 * (score_part(gl, hl) + score_part(g_sum - gl, h_sum - hl) - parent_score);
        if (gain > best.gain + 1e-12) {
          best.feature = f;
          best.bin = static_cast<int>(b);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int build_node(std::size_t begin, std::size_t end, int depth) {
    double g_sum = 0.0, h_sum = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      g_sum += grad[row_index[p]];
      h_sum += hess[row_index[p]];
    }
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitChoice split;
    if (depth < config.max_depth &&
        end - begin >= 2 * static_cast<std::size_t>(config.min_examples_per_leaf)) {
      split = best_split(begin, end, g_sum, h_sum);
    }
    if (split.feature < 0) {
      tree.nodes[node_id].value = leaf_value(g_sum, h_sum);
      return node_id;
    }

    const auto mid = std::stable_partition(
        row_index.begin() + static_cast<std::ptrdiff_t>(begin),
        row_index.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
          return data.bins[r * static_cast<std::size_t>(data.feature_dim) + split.feature] <=
                 split.bin;
        });
    const auto mid_idx = static_cast<std::size_t>(mid - row_index.begin());

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = edges[split.feature][static_cast<std::size_t>(split.bin)];
    const int left = build_node(begin, mid_idx, depth + 1);
    const int right = build_node(mid_idx, end, depth + 1);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
  }

  Tree build() {
    build_node(0, data.rows, 0);
    return std::move(tree);
  }
};

double mean_validation_dcg(const BoundDataset& val, std::span<const double> scores, int k) {
  double total = 0.0;
  for (const auto& [begin, end] : val.groups) {
    total += ranked_dcg_at_k(scores.subspan(begin, end - begin),
                             std::span<const double>(val.labels).subspan(begin, end - begin),
                             std::span<const ItemId>(val.item_ids).subspan(begin, end - begin), k);
  }
  return total / static_cast<double>(val.groups.size());
}

void accumulate_gradients(const BoundDataset& train, std::span<const double> scores,
                          const TrainConfig& config, double pos_weight, std::vector<double>& grad,
                          std::vector<double>& hess) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::fill(hess.begin(), hess.end(), 0.0);
  if (config.objective == Objective::Pointwise) {
    for (std::size_t r = 0; r < train.rows; ++r) {
      const double w = train.positive[r] ? pos_weight : 1.0;
      grad[r] = w * (scores[r] - train.labels[r]);
      hess[r] = w;
    }
    return;
  }
  for (const auto& [begin, end] : train.groups) {
    const std::size_t len = end - begin;
    if (len < 2) continue;
    const auto pairs = lambda_gradients_weighted(
        scores.subspan(begin, len), std::span<const double>(train.labels).subspan(begin, len),
        config.early_stopping_dcg_k, config.sigma,
        std::span<const std::uint8_t>(train.positive).subspan(begin, len), pos_weight,
        std::span<const ItemId>(train.item_ids).subspan(begin, len));
    for (std::size_t i = 0; i < len; ++i) {
      grad[begin + i] = pairs[i].grad;
      hess[begin + i] = pairs[i].hess;
    }
  }
}

}  // namespace

BoostedRanker fit(const RankingDataset& train, const RankingDataset& validation, LabelKind label,
                  const TrainConfig& config) {
  config.validate();
  if (train.examples.empty()) throw std::invalid_argument("fit: empty training split");
  if (validation.examples.empty()) throw std::invalid_argument("fit: empty validation split");
  if (train.feature_dim != validation.feature_dim) {
    throw std::invalid_argument("fit: train/validation feature dimension mismatch");
  }

  BoostedRanker model;
  model.objective = config.objective;
  model.feature_dim = train.feature_dim;
  model.learning_rate = config.learning_rate;
  model.base_score = config.base_score;
  model.meta.seed = config.seed;
  model.meta.label = label;

  model.bin_edges = compute_bin_edges(train, config.histogram_bins);
  const BoundDataset bound_train = bind_dataset(train, label, model.bin_edges);
  const BoundDataset bound_val = bind_dataset(validation, label, model.bin_edges);

  double pos_weight = 1.0;
  if (config.scale_pos_weight > 0.0) {
    pos_weight = config.scale_pos_weight;
  } else {
    std::size_t pos = 0;
    for (std::uint8_t p : bound_train.positive) pos += p;
    const std::size_t neg = bound_train.rows - pos;
    if (pos > 0 && neg > 0) pos_weight = static_cast<double>(neg) / static_cast<double>(pos);
  }

  std::vector<double> val_scores(bound_val.rows, config.base_score);

  const double first = bound_train.labels.empty() ? 0.0 : bound_train.labels.front();
  const bool degenerate = std::all_of(bound_train.labels.begin(), bound_train.labels.end(),
                                      [&](double y) { return y == first; });
  if (degenerate) {
    model.meta.warning = "degenerate training labels: all values identical, constant model";
    if (config.objective == Objective::Pointwise) model.base_score = first;
    model.meta.best_validation_dcg =
        mean_validation_dcg(bound_val, val_scores, config.early_stopping_dcg_k);
    return model;
  }

  std::vector<double> train_scores(bound_train.rows, config.base_score);
  std::vector<double> grad(bound_train.rows), hess(bound_train.rows);
  std::vector<double> row_features(static_cast<std::size_t>(train.feature_dim));

  double best_dcg = -std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  int since_best = 0;

  for (int iter = 0; iter < config.num_trees_max; ++iter) {
    accumulate_gradients(bound_train, train_scores, config, pos_weight, grad, hess);
    TreeBuilder builder(bound_train, model.bin_edges, config, grad, hess);
    Tree tree = builder.build();

    for (std::size_t r = 0; r < bound_train.rows; ++r) {
      train_scores[r] += config.learning_rate * tree.predict(train.examples[r].features);
    }
    for (std::size_t r = 0; r < bound_val.rows; ++r) {
      val_scores[r] += config.learning_rate * tree.predict(validation.examples[r].features);
    }
    model.trees.push_back(std::move(tree));
    model.meta.iterations_run = iter + 1;

    const double dcg = mean_validation_dcg(bound_val, val_scores, config.early_stopping_dcg_k);
    if (dcg > best_dcg + 1e-12) {
      best_dcg = dcg;
      best_iteration = iter + 1;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.early_stopping_patience) break;
    }
  }

  model.trees.resize(static_cast<std::size_t>(best_iteration));
  model.meta.best_iteration = best_iteration;
  model.meta.best_validation_dcg = best_dcg;
  return model;
}

SearchResult hyperparameter_search(const RankingDataset& train, const RankingDataset& validation,
                                   LabelKind label, const HyperparameterSpace& space, int n_trials,
                                   std::uint64_t seed, const TrainConfig& base) {
  space.validate();
  if (n_trials < 1) throw std::invalid_argument("hyperparameter_search: n_trials must be >= 1");

  Rng rng(derive_seed(seed, "hyperparameter-search"));
  SearchResult result;
  int best = -1;
  for (int t = 0; t < n_trials; ++t) {
    TrainConfig config = base;
    config.learning_rate = std::exp(
        rng.uniform(std::log(space.learning_rate_min), std::log(space.learning_rate_max)));
    config.max_depth = static_cast<int>(rng.uniform_int(space.max_depth_min, space.max_depth_max));
    config.num_trees_max =
        static_cast<int>(rng.uniform_int(space.num_trees_max_min, space.num_trees_max_max));
    config.min_examples_per_leaf = static_cast<int>(
        rng.uniform_int(space.min_examples_per_leaf_min, space.min_examples_per_leaf_max));
    config.seed = derive_seed(seed, "trial", static_cast<std::uint64_t>(t));

    BoostedRanker model = fit(train, validation, label, config);
    TrialResult trial;
    trial.trial = t;
    trial.config = config;
    trial.validation_dcg = model.meta.best_validation_dcg;
    trial.model_trees = static_cast<int>(model.trees.size());
    result.trials.push_back(trial);

    const auto better = [&](const TrialResult& a, const TrialResult& b) {
      if (a.validation_dcg != b.validation_dcg) return a.validation_dcg > b.validation_dcg;
      if (a.model_trees != b.model_trees) return a.model_trees < b.model_trees;
      if (a.config.max_depth != b.config.max_depth) return a.config.max_depth < b.config.max_depth;
      return a.trial < b.trial;
    };
    if (best < 0 || better(trial, result.trials[static_cast<std::size_t>(best)])) {
      best = t;
      result.best_config = config;
      result.best_model = std::move(model);
    }
  }
  return result;
}

namespace {

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back(json{{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value}});
  }
  return json{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j) {
  Tree tree;
  for (const json& jn : j.at("nodes")) {
    TreeNode n;
    n.feature = jn.at("f").get<int>();
    n.threshold = jn.at("t").get<double>();
    n.left = jn.at("l").get<int>();
    n.right = jn.at("r").get<int>();
    n.value = jn.at("v").get<double>();
    tree.nodes.push_back(n);
  }
  return tree;
}

}  // namespace

void save_model(const std::string& path, const BoostedRanker& model,
                const std::string& provenance) {
  json j;
  j["format"] = "nrank-model";
  j["version"] = 1;
  if (!provenance.empty()) j["provenance"] = provenance;
  j["objective"] = std::string(objective_name(model.objective));
  j["feature_dim"] = model.feature_dim;
  j["learning_rate"] = model.learning_rate;
  j["base_score"] = model.base_score;
  j["bin_edges"] = model.bin_edges;
  json trees = json::array();
  for (const Tree& t : model.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  j["meta"] = json{{"seed", model.meta.seed},
                   {"label", std::string(label_kind_name(model.meta.label))},
                   {"iterations_run", model.meta.iterations_run},
                   {"best_iteration", model.meta.best_iteration},
                   {"best_validation_dcg", model.meta.best_validation_dcg},
                   {"warning", model.meta.warning}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(2) << '\n';
}

BoostedRanker load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j = json::parse(in);
  if (j.at("format") != "nrank-model" || j.at("version") != 1) {
    throw std::runtime_error("load_model: unsupported model file " + path);
  }
  BoostedRanker model;
  model.objective = objective_from_name(j.at("objective").get<std::string>());
  model.feature_dim = j.at("feature_dim").get<int>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.base_score = j.at("base_score").get<double>();
  model.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
  for (const json& jt : j.at("trees")) model.trees.push_back(tree_from_json(jt));
  const json& m = j.at("meta");
  model.meta.seed = m.at("seed").get<std::uint64_t>();
  model.meta.label = label_kind_from_name(m.at("label").get<std::string>());
  model.meta.iterations_run = m.at("iterations_run").get<int>();
  model.meta.best_iteration = m.at("best_iteration").get<int>();
  model.meta.best_validation_dcg = m.at("best_validation_dcg").get<double>();
  model.meta.warning = m.at("warning").get<std::string>();
  return model;
}

void write_trial_log(const std::string& path, std::span<const TrialResult> trials,
                     const std::string& meta_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trial_log: cannot open " + path);
  if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
  out << "trial\tlearning_rate\tmax_depth\tnum_trees_max\tmin_examples_per_leaf\t"
         "model_trees\tvalidation_dcg\n";
  for (const TrialResult& t : trials) {
    out << t.trial << '\t' << format_double(t.config.learning_rate) << '\t'
        << t.config.max_depth << '\t' << t.config.num_trees_max << '\t'
        << t.config.min_examples_per_leaf << '\t' << t.model_trees << '\t'
        << format_double(t.validation_dcg) << '\n';
  }
}

}  // namespace nrank
