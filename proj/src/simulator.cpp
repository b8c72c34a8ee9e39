#include "nrank/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

namespace {

using nlohmann::json;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool is_gem(const ItemProfile& item) { return item.gem != GemKind::None; }

// n distinct values in [0, pool) via Floyd's sampling; insertion order
// is kept as the sample order.
std::vector<ItemId> sample_distinct(Rng& rng, int pool, int n) {
  std::vector<ItemId> out;
  out.reserve(n);
  std::unordered_set<ItemId> seen;
  for (int i = pool - n; i < pool; ++i) {
    auto v = static_cast<ItemId>(rng.uniform_int(0, i));
    if (!seen.insert(v).second) {
      seen.insert(static_cast<ItemId>(i));
      out.push_back(static_cast<ItemId>(i));
    } else {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

void WorldConfig::validate() const {
  if (num_users < 1) throw std::invalid_argument("world: num_users must be >= 1");
  if (num_items < 1) throw std::invalid_argument("world: num_items must be >= 1");
  if (slate_size < 1) throw std::invalid_argument("world: slate_size must be >= 1");
  if (l2_size < 0) throw std::invalid_argument("world: l2_size must be >= 0");
  if (latent_dim < 1) throw std::invalid_argument("world: latent_dim must be >= 1");
  if (num_genres < 1) throw std::invalid_argument("world: num_genres must be >= 1");
  if (num_languages < 1) throw std::invalid_argument("world: num_languages must be >= 1");
  if (slate_size > num_items) {
    throw std::invalid_argument("world: slate_size cannot exceed num_items");
  }
  if (gem_front_fraction < 0 || gem_back_fraction < 0 ||
      gem_front_fraction + gem_back_fraction > 1.0) {
    throw std::invalid_argument("world: gem fractions must be >= 0 and sum to <= 1");
  }
  if ((gem_front_fraction > 0 || gem_back_fraction > 0) && num_genres < 3) {
    throw std::invalid_argument("world: gem worlds need num_genres >= 3");
  }
  if (prob_scale < 0 || prob_scale > 1 || click_prob_scale < 0 || click_prob_scale > 1) {
    throw std::invalid_argument("world: probability scales must lie in [0, 1]");
  }
}

GroundTruth World::ground_truth() const { return GroundTruth(this); }

double GroundTruth::signal_prob(UserId user, ItemId item, Signal signal) const {
  const auto& w = *world_;
  if (user < 0 || user >= static_cast<UserId>(w.users.size())) {
    throw std::invalid_argument("signal_prob: unknown user id " + std::to_string(user));
  }
  if (item < 0 || item >= static_cast<ItemId>(w.items.size())) {
    throw std::invalid_argument("signal_prob: unknown item id " + std::to_string(item));
  }
  const UserProfile& u = w.users[user];
  const ItemProfile& a = w.items[item];
  const WorldConfig& cfg = w.config;

  double dot = 0.0;
  for (int d = 0; d < cfg.latent_dim; ++d) dot += u.latent[d] * a.latent[d];
  double affinity = u.genre_affinity[a.genre];

  double logit = cfg.coef_dot * dot + cfg.coef_genre * affinity;
  switch (signal) {
    case Signal::Likes: logit += cfg.bias_likes; break;
    case Signal::Shares: logit += cfg.bias_shares; break;
    case Signal::Favs: logit += cfg.bias_favs; break;
    case Signal::Clicks: logit += cfg.bias_clicks; break;
  }
  if (signal == Signal::Clicks) {
    // The click is the L2 gate: it tracks user-item affinity but not
    // popularity, and gem items keep their normal click appeal.
    return cfg.prob_scale * cfg.click_prob_scale * sigmoid(logit);
  }
  logit += cfg.coef_popularity * a.popularity;
  if (is_gem(a)) logit -= cfg.gem_l1_penalty;
  return cfg.prob_scale * sigmoid(logit);
}

double GroundTruth::expected_l1_reward(UserId user, ItemId item,
                                       const ScalarizationWeights& weights_l1) const {
  return weights_l1.likes * signal_prob(user, item, Signal::Likes) +
         weights_l1.shares * signal_prob(user, item, Signal::Shares) +
         weights_l1.favs * signal_prob(user, item, Signal::Favs) +
         weights_l1.clicks * signal_prob(user, item, Signal::Clicks);
}

double GroundTruth::expected_l2_reward(UserId user, ItemId item,
                                       const ScalarizationWeights& weights_l2) const {
  return weights_l2.likes * signal_prob(user, item, Signal::Likes) +
         weights_l2.shares * signal_prob(user, item, Signal::Shares) +
         weights_l2.favs * signal_prob(user, item, Signal::Favs);
}

double GroundTruth::expected_item_value(UserId user, ItemId item,
                                        const ScalarizationWeights& weights_l1,
                                        const ScalarizationWeights& weights_l2) const {
  double value = expected_l1_reward(user, item, weights_l1);
  const auto& attached = world_->l2_attachment[item];
  if (!attached.empty()) {
    double l2 = 0.0;
    for (std::size_t j = 0; j < attached.size(); ++j) {
      l2 += examination_probability(Position(static_cast<int>(j) + 1)) *
            expected_l2_reward(user, attached[j], weights_l2);
    }
    value += signal_prob(user, item, Signal::Clicks) * l2;
  }
  return value;
}

double GroundTruth::q_contribution(UserId user, ItemId item, Position pos,
                                   const ScalarizationWeights& weights_l1,
                                   const ScalarizationWeights& weights_l2) const {
  return examination_probability(pos) * expected_item_value(user, item, weights_l1, weights_l2);
}

void NestedSessionLog::validate() const {
  const std::size_t n = l1_slate.size();
  if (l1_observations.size() != n || l2_slates.size() != n || l2_observations.size() != n ||
      examined_l1.size() != n || entered_l2.size() != n) {
    throw std::invalid_argument("session log: ragged field sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    l1_observations[i].validate();
    if (l2_observations[i].size() != l2_slates[i].size()) {
      throw std::invalid_argument("session log: L2 observation/slate size mismatch");
    }
    if (!examined_l1[i] && !l1_observations[i].all_zero()) {
      throw std::invalid_argument("session log: signals on unexamined L1 position " +
                                  std::to_string(i + 1));
    }
    if (l1_observations[i].clicks > 0 && !examined_l1[i]) {
      throw std::invalid_argument("session log: click without examination at position " +
                                  std::to_string(i + 1));
    }
    if (entered_l2[i] != (l1_observations[i].clicks > 0 ? 1 : 0)) {
      throw std::invalid_argument("session log: entered_l2 flag inconsistent with click at " +
                                  std::to_string(i + 1));
    }
    for (const SignalVector& y : l2_observations[i]) {
      y.validate();
      if (!entered_l2[i] && !y.all_zero()) {
        throw std::invalid_argument("session log: L2 signals without entering the feed at " +
                                    std::to_string(i + 1));
      }
    }
  }
}

World build_world(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  World world;
  world.config = config;
  world.seed = seed;

  const double latent_scale = 1.0 / std::sqrt(static_cast<double>(config.latent_dim));

  world.users.resize(config.num_users);
  for (int u = 0; u < config.num_users; ++u) {
    Rng rng(derive_seed(seed, "user", static_cast<std::uint64_t>(u)));
    UserProfile& user = world.users[u];
    user.id = u;
    user.latent.resize(config.latent_dim);
    for (double& x : user.latent) x = rng.normal(0.0, latent_scale);
    user.genre_affinity.resize(config.num_genres);
    for (double& x : user.genre_affinity) x = rng.normal(0.0, 1.0);
    user.signup_recency = rng.uniform();
    user.language = static_cast<int>(rng.uniform_int(0, config.num_languages - 1));
    user.fatigue = rng.uniform();
  }

  world.items.resize(config.num_items);
  for (int a = 0; a < config.num_items; ++a) {
    Rng rng(derive_seed(seed, "item", static_cast<std::uint64_t>(a)));
    ItemProfile& item = world.items[a];
    item.id = a;
    item.latent.resize(config.latent_dim);
    for (double& x : item.latent) x = rng.normal(0.0, latent_scale);
    item.popularity = rng.uniform();
    double gem_draw = rng.uniform();
    if (gem_draw < config.gem_front_fraction) {
      item.gem = GemKind::Front;
      item.genre = 0;
    } else if (gem_draw < config.gem_front_fraction + config.gem_back_fraction) {
      item.gem = GemKind::Back;
      item.genre = 1;
    } else {
      item.gem = GemKind::None;
      int lo = (config.gem_front_fraction > 0 || config.gem_back_fraction > 0) ? 2 : 0;
      item.genre = static_cast<int>(rng.uniform_int(lo, config.num_genres - 1));
    }
  }

  // Attachment pools: non-gem items ranked by popularity. Back gems
  // put the strongest items deep in their fixed L2 list, front gems
  // put middling items up front; everyone else attaches uniformly.
  std::vector<ItemId> regular;
  for (const ItemProfile& item : world.items) {
    if (!is_gem(item)) regular.push_back(item.id);
  }
  if (config.l2_size > 0 && regular.empty()) {
    throw std::invalid_argument("world: no non-gem items left to attach as L2 lists");
  }
  std::sort(regular.begin(), regular.end(), [&](ItemId x, ItemId y) {
    double px = world.items[x].popularity, py = world.items[y].popularity;
    if (px != py) return px > py;
    return x < y;
  });
  const auto tier = [&](double lo_frac, double hi_frac) {
    auto lo = static_cast<std::size_t>(lo_frac * static_cast<double>(regular.size()));
    auto hi = static_cast<std::size_t>(hi_frac * static_cast<double>(regular.size()));
    hi = std::max(hi, lo + 1);
    hi = std::min(hi, regular.size());
    lo = std::min(lo, hi - 1);
    return std::pair<std::size_t, std::size_t>{lo, hi};
  };
  const auto [top_lo, top_hi] = tier(0.0, 0.2);
  const auto [mid_lo, mid_hi] = tier(0.2, 0.5);
  const auto [low_lo, low_hi] = tier(0.5, 1.0);

  world.l2_attachment.resize(config.num_items);
  for (int a = 0; a < config.num_items; ++a) {
    Rng rng(derive_seed(seed, "attach", static_cast<std::uint64_t>(a)));
    auto& list = world.l2_attachment[a];
    list.reserve(config.l2_size);
    const GemKind gem = world.items[a].gem;
    const int half = config.l2_size / 2;
    for (int j = 0; j < config.l2_size; ++j) {
      std::size_t lo = 0, hi = regular.size();
      if (gem == GemKind::Back) {
        if (j < half) {
          lo = low_lo; hi = low_hi;
        } else {
          lo = top_lo; hi = top_hi;
        }
      } else if (gem == GemKind::Front) {
        if (j < half) {
          lo = mid_lo; hi = mid_hi;
        } else {
          lo = low_lo; hi = low_hi;
        }
      }
      auto pick = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi) - 1));
      list.push_back(regular[pick]);
    }
  }
  return world;
}

NestedSessionLog simulate_session(const World& world, UserId user,
                                  std::span<const ItemId> l1_ranking, std::uint64_t seed) {
  if (user < 0 || user >= static_cast<UserId>(world.users.size())) {
    throw std::invalid_argument("simulate_session: unknown user id " + std::to_string(user));
  }
  if (l1_ranking.empty() ||
      l1_ranking.size() > static_cast<std::size_t>(world.config.slate_size)) {
    throw std::invalid_argument("simulate_session: ranking length must be in [1, slate_size]");
  }
  std::unordered_set<ItemId> dedup;
  for (ItemId a : l1_ranking) {
    if (a < 0 || a >= static_cast<ItemId>(world.items.size())) {
      throw std::invalid_argument("simulate_session: unknown item id " + std::to_string(a));
    }
    if (!dedup.insert(a).second) {
      throw std::invalid_argument("simulate_session: duplicate item id " + std::to_string(a));
    }
  }

  const GroundTruth truth = world.ground_truth();
  const std::size_t n = l1_ranking.size();
  NestedSessionLog log;
  log.user_id = user;
  log.l1_slate.assign(l1_ranking.begin(), l1_ranking.end());
  log.l1_observations.assign(n, SignalVector{});
  log.l2_slates.resize(n);
  log.l2_observations.resize(n);
  log.examined_l1.assign(n, 0);
  log.entered_l2.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const ItemId item = l1_ranking[i];
    log.l2_slates[i] = world.l2_attachment[item];
    log.l2_observations[i].assign(log.l2_slates[i].size(), SignalVector{});

    // One stream per L1 position: draws at position i never shift
    // when another position's outcome changes, which keeps paired
    // policy evaluations aligned.
    Rng rng(derive_seed(seed, "pos", static_cast<std::uint64_t>(i)));
    const Position pos(static_cast<int>(i) + 1);
    if (!rng.bernoulli(examination_probability(pos))) continue;
    log.examined_l1[i] = 1;

    SignalVector& y = log.l1_observations[i];
    y.likes = rng.bernoulli(truth.signal_prob(user, item, Signal::Likes)) ? 1 : 0;
    y.shares = rng.bernoulli(truth.signal_prob(user, item, Signal::Shares)) ? 1 : 0;
    y.favs = rng.bernoulli(truth.signal_prob(user, item, Signal::Favs)) ? 1 : 0;
    y.clicks = rng.bernoulli(truth.signal_prob(user, item, Signal::Clicks)) ? 1 : 0;
    if (y.clicks == 0) continue;
    log.entered_l2[i] = 1;

    const auto& nested = log.l2_slates[i];
    for (std::size_t j = 0; j < nested.size(); ++j) {
      const Position l2_pos(static_cast<int>(j) + 1);
      if (!rng.bernoulli(examination_probability(l2_pos))) continue;
      SignalVector& z = log.l2_observations[i][j];
      z.likes = rng.bernoulli(truth.signal_prob(user, nested[j], Signal::Likes)) ? 1 : 0;
      z.shares = rng.bernoulli(truth.signal_prob(user, nested[j], Signal::Shares)) ? 1 : 0;
      z.favs = rng.bernoulli(truth.signal_prob(user, nested[j], Signal::Favs)) ? 1 : 0;
    }
  }
  return log;
}

QEstimate true_q(const World& world, const RankingPolicy& policy,
                 const ScalarizationWeights& weights_l1, const ScalarizationWeights& weights_l2,
                 int n_sessions, std::uint64_t seed, int candidate_pool) {
  if (n_sessions < 1) throw std::invalid_argument("true_q: n_sessions must be >= 1");
  weights_l1.validate();
  weights_l2.validate();
  const int num_items = static_cast<int>(world.items.size());
  const int pool = (candidate_pool <= 0 || candidate_pool > num_items) ? num_items
                                                                       : candidate_pool;

  double q_sum = 0.0, q_sq_sum = 0.0, l1_sum = 0.0, l2_sum = 0.0, click_sum = 0.0;
  for (int s = 0; s < n_sessions; ++s) {
    Rng session_rng(derive_seed(seed, "draw", static_cast<std::uint64_t>(s)));
    const auto user =
        static_cast<UserId>(session_rng.uniform_int(0, static_cast<int>(world.users.size()) - 1));
    std::vector<ItemId> candidates;
    if (pool == num_items) {
      candidates.resize(num_items);
      std::iota(candidates.begin(), candidates.end(), 0);
    } else {
      candidates = sample_distinct(session_rng, num_items, pool);
    }

    std::vector<ItemId> ranked = policy(world, user, std::move(candidates));
    const auto slate_len =
        std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(world.config.slate_size));
    std::span<const ItemId> slate(ranked.data(), slate_len);

    NestedSessionLog log =
        simulate_session(world, user, slate, derive_seed(seed, "session", s));
    double l1 = 0.0, l2 = 0.0;
    int clicks = 0;
    for (std::size_t i = 0; i < slate.size(); ++i) {
      l1 += scalarize(log.l1_observations[i], weights_l1);
      clicks += log.l1_observations[i].clicks;
      for (const SignalVector& z : log.l2_observations[i]) l2 += scalarize(z, weights_l2);
    }
    const double q = l1 + l2;
    q_sum += q;
    q_sq_sum += q * q;
    l1_sum += l1;
    l2_sum += l2;
    click_sum += clicks;
  }

  QEstimate est;
  est.sessions = n_sessions;
  est.mean = q_sum / n_sessions;
  est.l1_mean = l1_sum / n_sessions;
  est.l2_mean = l2_sum / n_sessions;
  est.clicks_mean = click_sum / n_sessions;
  if (n_sessions > 1) {
    double var = (q_sq_sum - n_sessions * est.mean * est.mean) / (n_sessions - 1);
    est.stderr_mean = std::sqrt(std::max(var, 0.0) / n_sessions);
  }
  return est;
}

RankingPolicy random_policy(std::uint64_t seed) {
  return [seed](const World&, UserId user, std::vector<ItemId> candidates) {
    Rng rng(derive_seed(seed, "shuffle", static_cast<std::uint64_t>(user)));
    std::shuffle(candidates.begin(), candidates.end(), rng.engine());
    return candidates;
  };
}

RankingPolicy oracle_policy(const ScalarizationWeights& weights_l1,
                            const ScalarizationWeights& weights_l2) {
  return [weights_l1, weights_l2](const World& world, UserId user, std::vector<ItemId> candidates) {
    const GroundTruth truth = world.ground_truth();
    std::vector<double> values(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      values[i] = truth.expected_item_value(user, candidates[i], weights_l1, weights_l2);
    }
    const auto order = rank_by_score(values, candidates);
    std::vector<ItemId> ranked(candidates.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranked[r] = candidates[order[r]];
    return ranked;
  };
}

namespace {

json signal_to_json(const SignalVector& y) {
  return json::array({y.likes, y.shares, y.favs, y.clicks});
}

SignalVector signal_from_json(const json& j) {
  SignalVector y{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
  y.validate();
  return y;
}

std::vector<int> flags_to_positions(const std::vector<std::uint8_t>& flags) {
  std::vector<int> positions;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) positions.push_back(static_cast<int>(i) + 1);
  }
  return positions;
}

json session_to_json(const NestedSessionLog& log) {
  json j;
  j["user_id"] = log.user_id;
  j["l1_slate"] = log.l1_slate;
  j["l2_slates"] = log.l2_slates;
  json y1 = json::array();
  for (const SignalVector& y : log.l1_observations) y1.push_back(signal_to_json(y));
  j["l1_obs"] = std::move(y1);
  json y2 = json::array();
  for (const auto& row : log.l2_observations) {
    json inner = json::array();
    for (const SignalVector& y : row) inner.push_back(signal_to_json(y));
    y2.push_back(std::move(inner));
  }
  j["l2_obs"] = std::move(y2);
  j["examined_l1"] = flags_to_positions(log.examined_l1);
  j["entered_l2"] = flags_to_positions(log.entered_l2);
  return j;
}

NestedSessionLog session_from_json(const json& j) {
  NestedSessionLog log;
  log.user_id = j.at("user_id").get<UserId>();
  log.l1_slate = j.at("l1_slate").get<std::vector<ItemId>>();
  log.l2_slates = j.at("l2_slates").get<std::vector<std::vector<ItemId>>>();
  for (const json& y : j.at("l1_obs")) log.l1_observations.push_back(signal_from_json(y));
  for (const json& row : j.at("l2_obs")) {
    std::vector<SignalVector> inner;
    for (const json& y : row) inner.push_back(signal_from_json(y));
    log.l2_observations.push_back(std::move(inner));
  }
  log.examined_l1.assign(log.l1_slate.size(), 0);
  log.entered_l2.assign(log.l1_slate.size(), 0);
  for (int pos : j.at("examined_l1").get<std::vector<int>>()) {
    log.examined_l1.at(static_cast<std::size_t>(pos) - 1) = 1;
  }
  for (int pos : j.at("entered_l2").get<std::vector<int>>()) {
    log.entered_l2.at(static_cast<std::size_t>(pos) - 1) = 1;
  }
  log.validate();
  return log;
}

}  // namespace

void write_session_logs(std::ostream& out, std::span<const NestedSessionLog> logs) {
  for (const NestedSessionLog& log : logs) {
    out << session_to_json(log).dump() << '\n';
  }
}

std::vector<NestedSessionLog> read_session_logs(std::istream& in) {
  std::vector<NestedSessionLog> logs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.contains("meta")) continue;  // provenance line, not a session
    logs.push_back(session_from_json(j));
  }
  return logs;
}

namespace {

json world_config_to_json(const WorldConfig& c) {
  return json{{"num_users", c.num_users},
              {"num_items", c.num_items},
              {"slate_size", c.slate_size},
              {"l2_size", c.l2_size},
              {"latent_dim", c.latent_dim},
              {"num_genres", c.num_genres},
              {"num_languages", c.num_languages},
              {"gem_front_fraction", c.gem_front_fraction},
              {"gem_back_fraction", c.gem_back_fraction},
              {"coef_dot", c.coef_dot},
              {"coef_genre", c.coef_genre},
              {"coef_popularity", c.coef_popularity},
              {"bias_likes", c.bias_likes},
              {"bias_shares", c.bias_shares},
              {"bias_favs", c.bias_favs},
              {"bias_clicks", c.bias_clicks},
              {"gem_l1_penalty", c.gem_l1_penalty},
              {"prob_scale", c.prob_scale},
              {"click_prob_scale", c.click_prob_scale}};
}

WorldConfig world_config_from_json(const json& j) {
  WorldConfig c;
  c.num_users = j.at("num_users").get<int>();
  c.num_items = j.at("num_items").get<int>();
  c.slate_size = j.at("slate_size").get<int>();
  c.l2_size = j.at("l2_size").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.num_genres = j.at("num_genres").get<int>();
  c.num_languages = j.at("num_languages").get<int>();
  c.gem_front_fraction = j.at("gem_front_fraction").get<double>();
  c.gem_back_fraction = j.at("gem_back_fraction").get<double>();
  c.coef_dot = j.at("coef_dot").get<double>();
  c.coef_genre = j.at("coef_genre").get<double>();
  c.coef_popularity = j.at("coef_popularity").get<double>();
  c.bias_likes = j.at("bias_likes").get<double>();
  c.bias_shares = j.at("bias_shares").get<double>();
  c.bias_favs = j.at("bias_favs").get<double>();
  c.bias_clicks = j.at("bias_clicks").get<double>();
  c.gem_l1_penalty = j.at("gem_l1_penalty").get<double>();
  c.prob_scale = j.at("prob_scale").get<double>();
  c.click_prob_scale = j.at("click_prob_scale").get<double>();
  return c;
}

}  // namespace

void save_world(const std::string& path, const World& world) {
  json j;
  j["format"] = "nrank-world";
  j["version"] = 1;
  j["seed"] = world.seed;
  j["config"] = world_config_to_json(world.config);
  json users = json::array();
  for (const UserProfile& u : world.users) {
    users.push_back(json{{"id", u.id},
                         {"latent", u.latent},
                         {"genre_affinity", u.genre_affinity},
                         {"signup_recency", u.signup_recency},
                         {"language", u.language},
                         {"fatigue", u.fatigue}});
  }
  j["users"] = std::move(users);
  json items = json::array();
  for (const ItemProfile& a : world.items) {
    items.push_back(json{{"id", a.id},
                         {"latent", a.latent},
                         {"genre", a.genre},
                         {"popularity", a.popularity},
                         {"gem", static_cast<int>(a.gem)}});
  }
  j["items"] = std::move(items);
  j["l2_attachment"] = world.l2_attachment;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_world: cannot open " + path);
  out << j.dump() << '\n';
}

World load_world(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_world: cannot open " + path);
  json j = json::parse(in);
  if (j.at("format") != "nrank-world") throw std::runtime_error("load_world: bad format field");
  World world;
  world.seed = j.at("seed").get<std::uint64_t>();
  world.config = world_config_from_json(j.at("config"));
  for (const json& ju : j.at("users")) {
    UserProfile u;
    u.id = ju.at("id").get<UserId>();
    u.latent = ju.at("latent").get<std::vector<double>>();
    u.genre_affinity = ju.at("genre_affinity").get<std::vector<double>>();
    u.signup_recency = ju.at("signup_recency").get<double>();
    u.language = ju.at("language").get<int>();
    u.fatigue = ju.at("fatigue").get<double>();
    world.users.push_back(std::move(u));
  }
  for (const json& ja : j.at("items")) {
    ItemProfile a;
    a.id = ja.at("id").get<ItemId>();
    a.latent = ja.at("latent").get<std::vector<double>>();
    a.genre = ja.at("genre").get<int>();
    a.popularity = ja.at("popularity").get<double>();
    a.gem = static_cast<GemKind>(ja.at("gem").get<int>());
    world.items.push_back(std::move(a));
  }
  world.l2_attachment = j.at("l2_attachment").get<std::vector<std::vector<ItemId>>>();
  return world;
}

}  // namespace nrank
