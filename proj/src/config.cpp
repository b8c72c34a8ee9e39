#include "nrank/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

ConfigReader ConfigReader::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

ConfigReader ConfigReader::from_string(const std::string& text, const std::string& origin) {
  ConfigReader reader;
  reader.origin_ = origin;
  int line_no = 0;
  for (std::string_view line : split_fields(text, '\n')) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key(trim(stripped.substr(0, eq)));
    const std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    auto [it, inserted] = reader.entries_.try_emplace(key, Entry{value, line_no, false});
    if (!inserted) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                               key + "' (first at line " + std::to_string(it->second.line) + ")");
    }
  }
  return reader;
}

const ConfigReader::Entry* ConfigReader::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

ConfigReader::Entry* ConfigReader::find(const std::string& key) {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void ConfigReader::fail(const std::string& key, const std::string& message) const {
  const Entry* e = find(key);
  const std::string where =
      e ? origin_ + ":" + std::to_string(e->line) : origin_;
  throw std::runtime_error(where + ": key '" + key + "': " + message);
}

bool ConfigReader::has(const std::string& key) const { return find(key) != nullptr; }

std::string ConfigReader::get_string(const std::string& key, const std::string& fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  return e->value;
}

std::int64_t ConfigReader::get_int(const std::string& key, std::int64_t fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    return parse_int<std::int64_t>(e->value);
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + e->value + "'");
  }
}

std::uint64_t ConfigReader::get_u64(const std::string& key, std::uint64_t fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    return parse_int<std::uint64_t>(e->value);
  } catch (const std::exception&) {
    fail(key, "expected an unsigned integer, got '" + e->value + "'");
  }
}

double ConfigReader::get_double(const std::string& key, double fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    return parse_double(e->value);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + e->value + "'");
  }
}

bool ConfigReader::get_bool(const std::string& key, bool fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  fail(key, "expected true/false, got '" + e->value + "'");
}

std::vector<double> ConfigReader::get_double_list(const std::string& key,
                                                  std::vector<double> fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  std::vector<double> out;
  try {
    for (std::string_view part : split_fields(e->value, ',')) out.push_back(parse_double(trim(part)));
  } catch (const std::exception&) {
    fail(key, "expected a comma-separated list of numbers, got '" + e->value + "'");
  }
  return out;
}

std::vector<int> ConfigReader::get_int_list(const std::string& key, std::vector<int> fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  std::vector<int> out;
  try {
    for (std::string_view part : split_fields(e->value, ',')) out.push_back(parse_int<int>(trim(part)));
  } catch (const std::exception&) {
    fail(key, "expected a comma-separated list of integers, got '" + e->value + "'");
  }
  return out;
}

std::vector<std::uint64_t> ConfigReader::get_u64_list(const std::string& key,
                                                      std::vector<std::uint64_t> fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  std::vector<std::uint64_t> out;
  try {
    for (std::string_view part : split_fields(e->value, ',')) {
      out.push_back(parse_int<std::uint64_t>(trim(part)));
    }
  } catch (const std::exception&) {
    fail(key, "expected a comma-separated list of unsigned integers, got '" + e->value + "'");
  }
  return out;
}

void ConfigReader::finish() const {
  for (const auto& [key, entry] : entries_) {
    if (!entry.consumed) {
      throw std::runtime_error(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                               key + "'");
    }
  }
}

namespace {

ScalarizationWeights read_weights(ConfigReader& reader, const std::string& prefix,
                                  const ScalarizationWeights& defaults) {
  ScalarizationWeights w;
  w.likes = reader.get_double(prefix + ".likes", defaults.likes);
  w.shares = reader.get_double(prefix + ".shares", defaults.shares);
  w.favs = reader.get_double(prefix + ".favs", defaults.favs);
  w.clicks = reader.get_double(prefix + ".clicks", defaults.clicks);
  return w;
}

WorldConfig read_world(ConfigReader& reader, const WorldConfig& d) {
  WorldConfig w;
  w.num_users = static_cast<int>(reader.get_int("world.users", d.num_users));
  w.num_items = static_cast<int>(reader.get_int("world.items", d.num_items));
  w.slate_size = static_cast<int>(reader.get_int("world.slate_size", d.slate_size));
  w.l2_size = static_cast<int>(reader.get_int("world.l2_size", d.l2_size));
  w.latent_dim = static_cast<int>(reader.get_int("world.latent_dim", d.latent_dim));
  w.num_genres = static_cast<int>(reader.get_int("world.genres", d.num_genres));
  w.num_languages = static_cast<int>(reader.get_int("world.languages", d.num_languages));
  w.gem_front_fraction = reader.get_double("world.gem_front_fraction", d.gem_front_fraction);
  w.gem_back_fraction = reader.get_double("world.gem_back_fraction", d.gem_back_fraction);
  w.coef_dot = reader.get_double("world.coef_dot", d.coef_dot);
  w.coef_genre = reader.get_double("world.coef_genre", d.coef_genre);
  w.coef_popularity = reader.get_double("world.coef_popularity", d.coef_popularity);
  w.bias_likes = reader.get_double("world.bias_likes", d.bias_likes);
  w.bias_shares = reader.get_double("world.bias_shares", d.bias_shares);
  w.bias_favs = reader.get_double("world.bias_favs", d.bias_favs);
  w.bias_clicks = reader.get_double("world.bias_clicks", d.bias_clicks);
  w.gem_l1_penalty = reader.get_double("world.gem_l1_penalty", d.gem_l1_penalty);
  w.prob_scale = reader.get_double("world.prob_scale", d.prob_scale);
  w.click_prob_scale = reader.get_double("world.click_prob_scale", d.click_prob_scale);
  return w;
}

RunConfig read_run_config(ConfigReader& reader) {
  RunConfig config;
  config.world = read_world(reader, config.world);
  config.weights_l1 = read_weights(reader, "weights.l1", config.weights_l1);
  config.weights_l2 = read_weights(reader, "weights.l2", config.weights_l2);
  config.sessions = static_cast<int>(reader.get_int("simulate.sessions", config.sessions));

  config.labeling.target_positive_rate =
      reader.get_double("labeling.positive_rate", config.labeling.target_positive_rate);
  const std::vector<double> ratios = reader.get_double_list(
      "labeling.split", {config.labeling.split_ratios[0], config.labeling.split_ratios[1],
                         config.labeling.split_ratios[2]});
  if (ratios.size() != 3) {
    throw std::runtime_error("config: labeling.split must have exactly 3 ratios");
  }
  config.labeling.split_ratios = {ratios[0], ratios[1], ratios[2]};
  config.labeling.debias_l1 = reader.get_bool("labeling.debias_l1", config.labeling.debias_l1);

  TrainConfig& t = config.train;
  t.objective = objective_from_name(
      reader.get_string("train.objective", std::string(objective_name(t.objective))));
  t.num_trees_max = static_cast<int>(reader.get_int("train.num_trees_max", t.num_trees_max));
  t.max_depth = static_cast<int>(reader.get_int("train.max_depth", t.max_depth));
  t.min_examples_per_leaf =
      static_cast<int>(reader.get_int("train.min_examples_per_leaf", t.min_examples_per_leaf));
  t.learning_rate = reader.get_double("train.learning_rate", t.learning_rate);
  t.histogram_bins = static_cast<int>(reader.get_int("train.histogram_bins", t.histogram_bins));
  const std::string spw = reader.get_string("train.scale_pos_weight", "auto");
  if (spw == "auto") {
    t.scale_pos_weight = 0.0;
  } else {
    t.scale_pos_weight = parse_double(spw);
    if (!(t.scale_pos_weight > 0.0)) {
      throw std::runtime_error("config: train.scale_pos_weight must be 'auto' or > 0");
    }
  }
  t.early_stopping_patience =
      static_cast<int>(reader.get_int("train.patience", t.early_stopping_patience));
  t.early_stopping_dcg_k = static_cast<int>(reader.get_int("train.dcg_k", t.early_stopping_dcg_k));
  t.sigma = reader.get_double("train.sigma", t.sigma);
  t.l2_reg = reader.get_double("train.l2_reg", t.l2_reg);

  HyperparameterSpace& s = config.search_space;
  const auto lr = reader.get_double_list("search.learning_rate",
                                         {s.learning_rate_min, s.learning_rate_max});
  const auto depth = reader.get_int_list("search.max_depth", {s.max_depth_min, s.max_depth_max});
  const auto trees =
      reader.get_int_list("search.num_trees_max", {s.num_trees_max_min, s.num_trees_max_max});
  const auto leaf = reader.get_int_list(
      "search.min_examples_per_leaf", {s.min_examples_per_leaf_min, s.min_examples_per_leaf_max});
  if (lr.size() != 2 || depth.size() != 2 || trees.size() != 2 || leaf.size() != 2) {
    throw std::runtime_error("config: search ranges must be 'min,max' pairs");
  }
  s.learning_rate_min = lr[0];
  s.learning_rate_max = lr[1];
  s.max_depth_min = depth[0];
  s.max_depth_max = depth[1];
  s.num_trees_max_min = trees[0];
  s.num_trees_max_max = trees[1];
  s.min_examples_per_leaf_min = leaf[0];
  s.min_examples_per_leaf_max = leaf[1];
  config.search_trials = static_cast<int>(reader.get_int("search.trials", config.search_trials));

  EvalOptions& e = config.eval;
  e.ks = reader.get_int_list("eval.ks", e.ks);
  e.sessions_per_seed = static_cast<int>(reader.get_int("eval.sessions", e.sessions_per_seed));
  e.seeds = reader.get_u64_list("eval.seeds", e.seeds);
  e.candidate_pool = static_cast<int>(reader.get_int("eval.candidates", e.candidate_pool));

  config.master_seed = reader.get_u64("seed", config.master_seed);
  config.threads = static_cast<int>(reader.get_int("threads", config.threads));
  config.out_dir = reader.get_string("out", config.out_dir);

  reader.finish();
  config.validate();
  return config;
}

}  // namespace

void RunConfig::validate() const {
  world.validate();
  weights_l1.validate();
  weights_l2.validate();
  if (sessions < 0) throw std::invalid_argument("config: simulate.sessions must be >= 0");
  labeling.validate();
  train.validate();
  search_space.validate();
  if (search_trials < 1) throw std::invalid_argument("config: search.trials must be >= 1");
  eval.validate();
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("config: out directory must be non-empty");
}

RunConfig RunConfig::from_file(const std::string& path) {
  ConfigReader reader = ConfigReader::from_file(path);
  return read_run_config(reader);
}

RunConfig RunConfig::from_string(const std::string& text) {
  ConfigReader reader = ConfigReader::from_string(text);
  return read_run_config(reader);
}

WorldConfig world_config_from_file(const std::string& path) {
  ConfigReader reader = ConfigReader::from_file(path);
  WorldConfig config = read_world(reader, WorldConfig{});
  reader.finish();
  config.validate();
  return config;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  const auto d = [](double v) { return format_double(v); };
  out << "world.users = " << world.num_users << '\n';
  out << "world.items = " << world.num_items << '\n';
  out << "world.slate_size = " << world.slate_size << '\n';
  out << "world.l2_size = " << world.l2_size << '\n';
  out << "world.latent_dim = " << world.latent_dim << '\n';
  out << "world.genres = " << world.num_genres << '\n';
  out << "world.languages = " << world.num_languages << '\n';
  out << "world.gem_front_fraction = " << d(world.gem_front_fraction) << '\n';
  out << "world.gem_back_fraction = " << d(world.gem_back_fraction) << '\n';
  out << "world.coef_dot = " << d(world.coef_dot) << '\n';
  out << "world.coef_genre = " << d(world.coef_genre) << '\n';
  out << "world.coef_popularity = " << d(world.coef_popularity) << '\n';
  out << "world.bias_likes = " << d(world.bias_likes) << '\n';
  out << "world.bias_shares = " << d(world.bias_shares) << '\n';
  out << "world.bias_favs = " << d(world.bias_favs) << '\n';
  out << "world.bias_clicks = " << d(world.bias_clicks) << '\n';
  out << "world.gem_l1_penalty = " << d(world.gem_l1_penalty) << '\n';
  out << "world.prob_scale = " << d(world.prob_scale) << '\n';
  out << "world.click_prob_scale = " << d(world.click_prob_scale) << '\n';
  out << "weights.l1.likes = " << d(weights_l1.likes) << '\n';
  out << "weights.l1.shares = " << d(weights_l1.shares) << '\n';
  out << "weights.l1.favs = " << d(weights_l1.favs) << '\n';
  out << "weights.l1.clicks = " << d(weights_l1.clicks) << '\n';
  out << "weights.l2.likes = " << d(weights_l2.likes) << '\n';
  out << "weights.l2.shares = " << d(weights_l2.shares) << '\n';
  out << "weights.l2.favs = " << d(weights_l2.favs) << '\n';
  out << "weights.l2.clicks = " << d(weights_l2.clicks) << '\n';
  out << "simulate.sessions = " << sessions << '\n';
  out << "labeling.positive_rate = " << d(labeling.target_positive_rate) << '\n';
  out << "labeling.split = " << d(labeling.split_ratios[0]) << ',' << d(labeling.split_ratios[1])
      << ',' << d(labeling.split_ratios[2]) << '\n';
  out << "labeling.debias_l1 = " << (labeling.debias_l1 ? "true" : "false") << '\n';
  out << "train.objective = " << objective_name(train.objective) << '\n';
  out << "train.num_trees_max = " << train.num_trees_max << '\n';
  out << "train.max_depth = " << train.max_depth << '\n';
  out << "train.min_examples_per_leaf = " << train.min_examples_per_leaf << '\n';
  out << "train.learning_rate = " << d(train.learning_rate) << '\n';
  out << "train.histogram_bins = " << train.histogram_bins << '\n';
  out << "train.scale_pos_weight = "
      << (train.scale_pos_weight > 0.0 ? d(train.scale_pos_weight) : "auto") << '\n';
  out << "train.patience = " << train.early_stopping_patience << '\n';
  out << "train.dcg_k = " << train.early_stopping_dcg_k << '\n';
  out << "train.sigma = " << d(train.sigma) << '\n';
  out << "train.l2_reg = " << d(train.l2_reg) << '\n';
  out << "search.learning_rate = " << d(search_space.learning_rate_min) << ','
      << d(search_space.learning_rate_max) << '\n';
  out << "search.max_depth = " << search_space.max_depth_min << ',' << search_space.max_depth_max
      << '\n';
  out << "search.num_trees_max = " << search_space.num_trees_max_min << ','
      << search_space.num_trees_max_max << '\n';
  out << "search.min_examples_per_leaf = " << search_space.min_examples_per_leaf_min << ','
      << search_space.min_examples_per_leaf_max << '\n';
  out << "search.trials = " << search_trials << '\n';
  out << "eval.ks = ";
  for (std::size_t i = 0; i < eval.ks.size(); ++i) out << (i ? "," : "") << eval.ks[i];
  out << '\n';
  out << "eval.sessions = " << eval.sessions_per_seed << '\n';
  out << "eval.seeds = ";
  for (std::size_t i = 0; i < eval.seeds.size(); ++i) out << (i ? "," : "") << eval.seeds[i];
  out << '\n';
  out << "eval.candidates = " << eval.candidate_pool << '\n';
  out << "seed = " << master_seed << '\n';
  out << "threads = " << threads << '\n';
  out << "out = " << out_dir << '\n';
  return out.str();
}

std::uint64_t RunConfig::config_hash() const {
  // The hash identifies the run's parameters; the output location must
  // not perturb it, or copies of one run would look like different runs.
  std::string text = canonical_text();
  const std::size_t pos = text.rfind("out = ");
  if (pos != std::string::npos) text.resize(pos);
  return fnv1a64(text);
}

std::string RunConfig::meta_comment() const {
  std::ostringstream out;
  out << "nrank " << kToolVersion << " seed=" << master_seed << " config=" << std::hex
      << config_hash();
  return out.str();
}

std::uint64_t RunConfig::stage_seed(std::string_view stage, std::uint64_t counter) const {
  return derive_seed(master_seed, stage, counter);
}

}  // namespace nrank
