#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nrank/evaluation.hpp"
#include "nrank/rng.hpp"

using namespace nrank;

namespace {

// Model whose score equals one feature of the input: a balanced tree
// over the distinct values this fixture uses (multiples of 0.1 in
// [0, 3.5]), learning rate 1, base 0.
BoostedRanker passthrough_model(int feature_dim, int feature_index) {
  BoostedRanker model;
  model.feature_dim = feature_dim;
  model.learning_rate = 1.0;
  model.base_score = 0.0;
  Tree tree;
  // Chain of stumps: walk right until the threshold bracket matches.
  // 36 leaves cover values 0.0, 0.1, ..., 3.5.
  int next = 0;
  for (int v = 0; v < 35; ++v) {
    TreeNode node;
    node.feature = feature_index;
    node.threshold = 0.1 * v + 0.05;
    node.left = next + 1;
    node.right = next + 2;
    tree.nodes.push_back(node);
    TreeNode leaf;
    leaf.feature = -1;
    leaf.value = 0.1 * v;
    tree.nodes.push_back(leaf);
    next += 2;
  }
  TreeNode last;
  last.feature = -1;
  last.value = 3.5;
  tree.nodes.push_back(last);
  // Fix child links: node i at even index splits to leaf (i+1) and
  // next split (i+2).
  for (int i = 0; i < static_cast<int>(tree.nodes.size()) - 1; i += 2) {
    tree.nodes[i].left = i + 1;
    tree.nodes[i].right = i + 2;
  }
  model.trees.push_back(tree);
  return model;
}

struct FixtureRow {
  GroupId group;
  ItemId item;
  double f0;
  double f1;
  double label_all;  // value used for every label column
};

RankingDataset fixture_dataset(const std::vector<FixtureRow>& rows) {
  RankingDataset d;
  d.split = Split::Test;
  d.feature_dim = 2;
  for (const FixtureRow& r : rows) {
    LabeledExample e;
    e.group_id = r.group;
    e.item_id = r.item;
    e.features = {r.f0, r.f1};
    for (LabelKind kind : kAllLabelKinds) e.labels[static_cast<int>(kind)] = r.label_all;
    e.positive = r.label_all > 0;
    d.examples.push_back(std::move(e));
  }
  d.recompute_positive_rate();
  return d;
}

// Independent reimplementation of grouped DCG for the fixtures.
double oracle_mean_dcg(const RankingDataset& d, const BoostedRanker& model, LabelKind label,
                       int k) {
  const auto ranges = d.group_ranges();
  double total = 0.0;
  for (const auto& [begin, end] : ranges) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = begin; i < end; ++i) {
      scored.emplace_back(model.score(d.examples[i].features), i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return d.examples[a.second].item_id < d.examples[b.second].item_id;
    });
    double dcg = 0.0;
    for (std::size_t r = 0; r < scored.size() && static_cast<int>(r) < k; ++r) {
      dcg += d.examples[scored[r].second].label(label) /
             std::log2(2.0 + static_cast<double>(r));
    }
    total += dcg;
  }
  return total / static_cast<double>(ranges.size());
}

World analytic_world() {
  World world;
  world.config.num_users = 1;
  world.config.num_items = 4;
  world.config.slate_size = 3;
  world.config.l2_size = 2;
  world.config.latent_dim = 1;
  world.config.num_genres = 1;
  world.config.gem_front_fraction = 0.0;
  world.config.gem_back_fraction = 0.0;
  world.config.coef_dot = 0.0;
  world.config.coef_genre = 0.0;
  world.config.coef_popularity = 1.0;
  world.config.bias_likes = -1.0;
  world.config.bias_shares = -2.0;
  world.config.bias_favs = -1.5;
  world.config.bias_clicks = -0.5;
  world.seed = 5;
  UserProfile user;
  user.id = 0;
  user.latent = {0.0};
  user.genre_affinity = {0.0};
  world.users.push_back(user);
  for (int a = 0; a < 4; ++a) {
    ItemProfile item;
    item.id = a;
    item.latent = {0.0};
    item.genre = 0;
    item.popularity = 0.3 * a;
    world.items.push_back(item);
  }
  world.l2_attachment = {{1, 2}, {2, 3}, {3, 0}, {0, 1}};
  return world;
}

}  // namespace

TEST_CASE("percent_loss: fixtures") {
  CHECK(percent_loss(1.7, 1.7) == 0.0);
  CHECK(percent_loss(1.0, 0.793) == doctest::Approx(20.7).epsilon(1e-9));
  CHECK(percent_loss(2.0, 1.5) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(percent_loss(3.0, 0.0) == 100.0);
  CHECK_THROWS_AS(percent_loss(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(percent_loss(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("percent_loss: antitone in the predictor DCG") {
  double prev = percent_loss(2.0, 0.0);
  for (double pred = 0.1; pred <= 3.0; pred += 0.1) {
    const double loss = percent_loss(2.0, pred);
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("mean_group_dcg: constant model ranks by item id") {
  const auto d = fixture_dataset({{0, 3, 0.0, 0.0, 1.0},
                                  {0, 1, 0.0, 0.0, 2.0},
                                  {0, 2, 0.0, 0.0, 0.5}});
  BoostedRanker constant;
  constant.feature_dim = 2;
  constant.base_score = 0.4;
  // Id order 1, 2, 3 -> gains 2.0, 0.5, 1.0.
  const double expected = 2.0 + 0.5 / std::log2(3.0) + 1.0 / 2.0;
  CHECK(mean_group_dcg(constant, d, LabelKind::S1, 3) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mean_group_dcg: two-group hand fixture") {
  const auto d = fixture_dataset({{0, 1, 0.3, 0.0, 1.0},
                                  {0, 2, 0.9, 0.0, 2.0},
                                  {0, 3, 0.5, 0.0, 0.0},
                                  {1, 4, 0.2, 0.0, 1.0},
                                  {1, 5, 0.2, 0.0, 3.0}});
  const BoostedRanker model = passthrough_model(2, 0);
  // Group 0 by score: item2 (0.9) -> 2, item3 (0.5) -> 0, item1 (0.3) -> 1.
  const double g0 = 2.0 + 0.0 + 1.0 / 2.0;
  // Group 1: tie at 0.2 -> id order item4 (1), item5 (3).
  const double g1 = 1.0 + 3.0 / std::log2(3.0);
  CHECK(mean_group_dcg(model, d, LabelKind::S1, 3) ==
        doctest::Approx(0.5 * (g0 + g1)).epsilon(1e-12));
  CHECK(mean_group_dcg(model, d, LabelKind::S1, 3) ==
        doctest::Approx(oracle_mean_dcg(d, model, LabelKind::S1, 3)).epsilon(1e-12));
}

TEST_CASE("mean_group_dcg: oracle scorer attains the sorted-gains upper bound") {
  std::vector<FixtureRow> rows;
  Rng rng(derive_seed(201, "bound"));
  for (int g = 0; g < 10; ++g) {
    for (int i = 0; i < 5; ++i) {
      const double label = 0.1 * static_cast<double>(rng.uniform_int(0, 30));
      rows.push_back({g, g * 5 + i, label, 0.1 * static_cast<double>(rng.uniform_int(0, 30)),
                      label});
    }
  }
  const auto d = fixture_dataset(rows);
  const BoostedRanker oracle = passthrough_model(2, 0);   // score == gain
  const BoostedRanker other = passthrough_model(2, 1);    // unrelated scorer
  BoostedRanker constant;
  constant.feature_dim = 2;
  for (int k : {1, 3, 5}) {
    const double best = mean_group_dcg(oracle, d, LabelKind::S1, k);
    CHECK(best >= mean_group_dcg(other, d, LabelKind::S1, k) - 1e-12);
    CHECK(best >= mean_group_dcg(constant, d, LabelKind::S1, k) - 1e-12);
  }
}

TEST_CASE("mean_group_dcg: rejects empty input and wrong dimensions") {
  RankingDataset empty;
  empty.feature_dim = 2;
  BoostedRanker model;
  model.feature_dim = 2;
  CHECK_THROWS_AS(mean_group_dcg(model, empty, LabelKind::S1, 3), std::invalid_argument);
  const auto d = fixture_dataset({{0, 1, 0.0, 0.0, 1.0}});
  model.feature_dim = 5;
  CHECK_THROWS_AS(mean_group_dcg(model, d, LabelKind::S1, 3), std::invalid_argument);
}

TEST_CASE("build_matrix: coinciding labels and oracle models give an all-zero matrix") {
  std::vector<FixtureRow> rows;
  Rng rng(derive_seed(202, "zeros"));
  for (int g = 0; g < 6; ++g) {
    for (int i = 0; i < 4; ++i) {
      const double label = 0.1 * static_cast<double>(rng.uniform_int(0, 30));
      rows.push_back({g, g * 4 + i, label, label, label});
    }
  }
  const auto d = fixture_dataset(rows);
  std::map<LabelKind, BoostedRanker> models;
  for (LabelKind kind : kAllLabelKinds) models.emplace(kind, passthrough_model(2, 0));
  const EvaluationMatrix matrix = build_matrix(models, d, {3, 5, 10});
  for (int k : {3, 5, 10}) {
    for (LabelKind p : kPredictorLabels) {
      for (LabelKind t : kAllLabelKinds) CHECK(matrix.at(k, p, t) == 0.0);
    }
  }
}

TEST_CASE("build_matrix: hand fixture with two scorers") {
  // S1/S2/S3 models score by f0; raw-signal baselines score by f1.
  std::vector<FixtureRow> rows;
  Rng rng(derive_seed(203, "hand"));
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < 4; ++i) {
      rows.push_back({g, g * 4 + i, 0.1 * static_cast<double>(rng.uniform_int(0, 30)),
                      0.1 * static_cast<double>(rng.uniform_int(0, 30)),
                      0.1 * static_cast<double>(rng.uniform_int(0, 20))});
    }
  }
  const auto d = fixture_dataset(rows);
  std::map<LabelKind, BoostedRanker> models;
  for (LabelKind kind : kPredictorLabels) models.emplace(kind, passthrough_model(2, 0));
  for (LabelKind kind : {LabelKind::Likes, LabelKind::Shares, LabelKind::Favs, LabelKind::Clicks}) {
    models.emplace(kind, passthrough_model(2, 1));
  }
  const EvaluationMatrix matrix = build_matrix(models, d, {3});

  const BoostedRanker by_f0 = passthrough_model(2, 0);
  const BoostedRanker by_f1 = passthrough_model(2, 1);
  for (LabelKind truth : {LabelKind::Likes, LabelKind::Clicks}) {
    const double base = oracle_mean_dcg(d, by_f1, truth, 3);
    const double pred = oracle_mean_dcg(d, by_f0, truth, 3);
    const double expected = 100.0 * (base - pred) / base;
    for (LabelKind p : kPredictorLabels) {
      CHECK(matrix.at(3, p, truth) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  // Diagonals: same model on both sides.
  for (LabelKind p : kPredictorLabels) CHECK(matrix.at(3, p, p) == 0.0);

  std::map<LabelKind, BoostedRanker> incomplete = models;
  incomplete.erase(LabelKind::Favs);
  CHECK_THROWS_AS(build_matrix(incomplete, d, {3}), std::invalid_argument);
}

TEST_CASE("welch_t_test: frozen scipy fixture") {
  const std::vector<double> a = {1.1, 1.3, 0.9, 1.2, 1.0};
  const std::vector<double> b = {0.8, 0.85, 0.95, 0.9, 0.75};
  const WelchResult r = welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(3.162277660168).epsilon(1e-9));
  CHECK(r.df == doctest::Approx(5.882352941176).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.020038891119).epsilon(1e-9));
}

TEST_CASE("welch_t_test: identical constant samples show no difference") {
  const std::vector<double> a = {2.0, 2.0, 2.0};
  const WelchResult equal = welch_t_test(a, a);
  CHECK(equal.p == 1.0);
  const std::vector<double> b = {3.0, 3.0, 3.0};
  const WelchResult sure = welch_t_test(a, b);
  CHECK(sure.p == 0.0);
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1.0}, a), std::invalid_argument);
}

TEST_CASE("score_table and table_policy: lookups match direct scoring") {
  const World world = analytic_world();
  const BoostedRanker model = passthrough_model(feature_dim(world.config), 2 * 1 + 2);  // popularity
  const auto table = score_table(world, model);
  REQUIRE(table.size() == world.users.size() * world.items.size());
  for (ItemId a = 0; a < 4; ++a) {
    CHECK(table[a] == model.score(extract_features(world, 0, a)));
  }
  const RankingPolicy policy = table_policy(world, table);
  const auto ranked = policy(world, 0, {0, 1, 2, 3});
  // Popularity 0.0, 0.3, 0.6, 0.9 -> descending order 3, 2, 1, 0.
  CHECK(ranked == std::vector<ItemId>{3, 2, 1, 0});
}

TEST_CASE("online_compare: identical models give identical Q and no significance") {
  const World world = analytic_world();
  std::map<LabelKind, BoostedRanker> models;
  for (LabelKind kind : kPredictorLabels) {
    models.emplace(kind, passthrough_model(feature_dim(world.config), 0));
  }
  EvalOptions options;
  options.sessions_per_seed = 400;
  options.seeds = {11, 12, 13, 14};
  options.candidate_pool = 0;
  const ScalarizationWeights w;
  const OnlineReport report = online_compare(world, models, w, w, options);

  REQUIRE(report.variants.size() == 3);
  for (std::size_t seed = 0; seed < options.seeds.size(); ++seed) {
    const double q0 = report.variants[0].per_seed[seed].mean;
    CHECK(report.variants[1].per_seed[seed].mean == q0);
    CHECK(report.variants[2].per_seed[seed].mean == q0);
  }
  for (const PairVerdict& verdict : report.verdicts) {
    CHECK_FALSE(verdict.significant);
    CHECK(verdict.mean_difference == 0.0);
  }
  // Decomposition identity.
  for (const VariantStats& v : report.variants) {
    CHECK(v.q_mean == doctest::Approx(v.l1_mean + v.l2_mean).epsilon(1e-9));
  }
}

TEST_CASE("oracle policy beats a random policy significantly") {
  WorldConfig config;
  config.num_users = 25;
  config.num_items = 80;
  config.slate_size = 10;
  config.l2_size = 5;
  config.latent_dim = 4;
  const World world = build_world(config, 301);
  const ScalarizationWeights w1{1.0, 1.5, 1.2, 0.5};
  const ScalarizationWeights w2{1.0, 1.5, 1.2, 0.0};

  std::vector<double> oracle_q, random_q;
  const RankingPolicy oracle = oracle_policy(w1, w2);
  const RankingPolicy random = random_policy(9);
  for (std::uint64_t seed : {501, 502, 503, 504, 505}) {
    oracle_q.push_back(true_q(world, oracle, w1, w2, 4000, seed, 30).mean);
    random_q.push_back(true_q(world, random, w1, w2, 4000, seed, 30).mean);
  }
  const WelchResult r = welch_t_test(oracle_q, random_q);
  const double mean_oracle =
      std::accumulate(oracle_q.begin(), oracle_q.end(), 0.0) / static_cast<double>(oracle_q.size());
  const double mean_random =
      std::accumulate(random_q.begin(), random_q.end(), 0.0) / static_cast<double>(random_q.size());
  CHECK(mean_oracle > mean_random);
  CHECK(r.p < 0.05 / 3.0);  // significant even after Bonferroni
}

TEST_CASE("report writers: deterministic output files") {
  const auto d = fixture_dataset({{0, 1, 0.3, 0.1, 1.0},
                                  {0, 2, 0.9, 0.2, 2.0},
                                  {1, 3, 0.5, 0.3, 0.0},
                                  {1, 4, 0.2, 0.4, 1.0},
                                  {2, 5, 0.1, 0.5, 3.0},
                                  {2, 6, 0.6, 0.6, 0.5}});
  std::map<LabelKind, BoostedRanker> models;
  for (LabelKind kind : kAllLabelKinds) models.emplace(kind, passthrough_model(2, 0));
  const EvaluationMatrix matrix = build_matrix(models, d, {3, 5});

  const std::string tsv = "/tmp/nrank_matrix.tsv", txt = "/tmp/nrank_matrix.txt";
  write_matrix_reports(tsv, txt, matrix, "meta");
  write_matrix_reports(tsv + "2", txt + "2", matrix, "meta");
  for (const auto& pair : {std::pair{tsv, tsv + "2"}, std::pair{txt, txt + "2"}}) {
    std::ifstream fa(pair.first), fb(pair.second);
    std::stringstream ba, bb;
    ba << fa.rdbuf();
    bb << fb.rdbuf();
    REQUIRE(ba.str().size() > 0);
    CHECK(ba.str() == bb.str());
    std::remove(pair.first.c_str());
    std::remove(pair.second.c_str());
  }
}
