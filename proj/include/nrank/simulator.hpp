#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "nrank/core.hpp"

namespace nrank {

// Synthetic-world shape and signal-model coefficients. Engagement
// probabilities are logistic in (user.item dot product, genre
// affinity, popularity, per-signal bias); see GroundTruth.
struct WorldConfig {
  int num_users = 400;
  int num_items = 1500;
  int slate_size = 20;  // n, L1 positions per session
  int l2_size = 10;     // m, fixed L2 list length per L1 item
  int latent_dim = 8;
  int num_genres = 8;
  int num_languages = 4;

  // Fraction of items with weak L1 appeal but strong fixed L2 lists.
  // Front gems concentrate L2 quality at the top of the list, back
  // gems at the bottom; the split is what separates the discounted
  // and undiscounted label variants.
  double gem_front_fraction = 0.125;
  double gem_back_fraction = 0.125;

  double coef_dot = 1.0;
  double coef_genre = 0.5;
  double coef_popularity = 1.5;
  double bias_likes = -2.5;
  double bias_shares = -3.2;
  double bias_favs = -2.8;
  double bias_clicks = -1.4;
  // Subtracted from the like/share/fav logits of gem items.
  double gem_l1_penalty = 2.5;

  // Multiplicative clamps on emitted probabilities; 0 silences a
  // world entirely (handy for degenerate tests).
  double prob_scale = 1.0;
  double click_prob_scale = 1.0;

  void validate() const;
};

struct UserProfile {
  UserId id = 0;
  std::vector<double> latent;          // dimension latent_dim
  std::vector<double> genre_affinity;  // one entry per genre
  double signup_recency = 0.0;         // [0,1], 1 = just signed up
  int language = 0;
  double fatigue = 0.0;  // [0,1]
};

enum class GemKind : int { None = 0, Front = 1, Back = 2 };

struct ItemProfile {
  ItemId id = 0;
  std::vector<double> latent;  // same dimension as UserProfile.latent
  int genre = 0;
  double popularity = 0.0;  // [0,1]
  GemKind gem = GemKind::None;
};

enum class Signal : int { Likes = 0, Shares = 1, Favs = 2, Clicks = 3 };

class GroundTruth;

// Immutable synthetic world: user/item pools plus the fixed L2 list
// attached to every L1 item. Deterministic for a given (config, seed).
struct World {
  WorldConfig config;
  std::uint64_t seed = 0;
  std::vector<UserProfile> users;
  std::vector<ItemProfile> items;
  std::vector<std::vector<ItemId>> l2_attachment;  // [item id] -> m item ids

  GroundTruth ground_truth() const;
};

// View over a World exposing the deterministic signal probabilities
// and the closed-form expectations built from them. These closed forms
// are the analytic oracle the Monte-Carlo estimates are checked
// against.
class GroundTruth {
 public:
  explicit GroundTruth(const World* world) : world_(world) {}

  double signal_prob(UserId user, ItemId item, Signal signal) const;

  // E[scalarized L1 reward | viewed], click included as a signal.
  double expected_l1_reward(UserId user, ItemId item,
                            const ScalarizationWeights& weights_l1) const;
  // E[scalarized L2 reward | viewed]; L2 impressions carry no click.
  double expected_l2_reward(UserId user, ItemId item,
                            const ScalarizationWeights& weights_l2) const;
  // E R_A|view + p_click * sum_j P(view j) * E R_B(b_ij)|view.
  // Ranking by this value in descending order is the Q-optimal policy.
  double expected_item_value(UserId user, ItemId item, const ScalarizationWeights& weights_l1,
                             const ScalarizationWeights& weights_l2) const;
  // expected_item_value discounted by the L1 examination probability:
  // the item's exact contribution to E[Q] when shown at `pos`.
  double q_contribution(UserId user, ItemId item, Position pos,
                        const ScalarizationWeights& weights_l1,
                        const ScalarizationWeights& weights_l2) const;

 private:
  const World* world_;
};

// One logged session: slate, fixed L2 lists, observed signals, and
// which positions were examined / clicked into.
struct NestedSessionLog {
  UserId user_id = 0;
  std::vector<ItemId> l1_slate;
  std::vector<std::vector<ItemId>> l2_slates;
  std::vector<SignalVector> l1_observations;               // y_i0
  std::vector<std::vector<SignalVector>> l2_observations;  // y_ij, j >= 1
  std::vector<std::uint8_t> examined_l1;  // flag per slate position
  std::vector<std::uint8_t> entered_l2;   // flag per slate position

  int slate_length() const { return static_cast<int>(l1_slate.size()); }
  // Throws std::invalid_argument when any structural invariant is
  // violated (signals on unexamined positions, L2 signals without a
  // click, click without examination, or ragged shapes).
  void validate() const;
};

World build_world(const WorldConfig& config, std::uint64_t seed);

// PBM session draw: examine L1 position i w.p. 1/log2(1+i); examined
// positions emit signals from GroundTruth; a click opens the fixed L2
// list, whose positions are examined with the same curve.
NestedSessionLog simulate_session(const World& world, UserId user,
                                  std::span<const ItemId> l1_ranking, std::uint64_t seed);

// Ranks `candidates` for `user`; true_q truncates the result to the
// slate size.
using RankingPolicy =
    std::function<std::vector<ItemId>(const World&, UserId, std::vector<ItemId>)>;

struct QEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double l1_mean = 0.0;      // scalarized L1 reward per session
  double l2_mean = 0.0;      // scalarized L2 reward per session
  double clicks_mean = 0.0;  // L1 clicks per session
  int sessions = 0;
};

// Monte-Carlo estimate of the online metric Q under `policy`:
// per-session sum of scalarized realized signals across both levels.
// Candidate slates are a uniform sample of `candidate_pool` items per
// session (0 = the whole pool), drawn from `seed` alone so that two
// policies evaluated with the same seed see identical sessions.
QEstimate true_q(const World& world, const RankingPolicy& policy,
                 const ScalarizationWeights& weights_l1, const ScalarizationWeights& weights_l2,
                 int n_sessions, std::uint64_t seed, int candidate_pool = 0);

// Uniform random policy over the candidate slate (the logging policy).
RankingPolicy random_policy(std::uint64_t seed);
// Ranks by the closed-form expected item value: the Q-optimal oracle.
RankingPolicy oracle_policy(const ScalarizationWeights& weights_l1,
                            const ScalarizationWeights& weights_l2);

// JSONL export, one session per line; lossless round-trip.
void write_session_logs(std::ostream& out, std::span<const NestedSessionLog> logs);
std::vector<NestedSessionLog> read_session_logs(std::istream& in);

void save_world(const std::string& path, const World& world);
World load_world(const std::string& path);

// Key-value config file (documented schema, unknown keys rejected).
WorldConfig world_config_from_file(const std::string& path);

}  // namespace nrank
