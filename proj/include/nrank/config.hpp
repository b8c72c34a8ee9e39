#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nrank/core.hpp"
#include "nrank/evaluation.hpp"
#include "nrank/labeling.hpp"
#include "nrank/ranker.hpp"
#include "nrank/simulator.hpp"

namespace nrank {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Flat `key = value` file with dotted keys, `#` comment lines, and
// hard errors (with line numbers) on unknown keys or bad values.
class ConfigReader {
 public:
  static ConfigReader from_file(const std::string& path);
  static ConfigReader from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback);
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback);
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          std::vector<std::uint64_t> fallback);

  // Throws if any key was never consumed (catches typos).
  void finish() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };

  std::string origin_;
  std::map<std::string, Entry> entries_;

  const Entry* find(const std::string& key) const;
  Entry* find(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
};

// Everything one pipeline run needs; defaults are the desk profile.
struct RunConfig {
  WorldConfig world;
  ScalarizationWeights weights_l1{1.0, 1.5, 1.2, 0.5};
  ScalarizationWeights weights_l2{1.0, 1.5, 1.2, 0.0};
  int sessions = 8000;
  LabelingOptions labeling;
  TrainConfig train;
  HyperparameterSpace search_space;
  int search_trials = 3;
  EvalOptions eval;
  std::uint64_t master_seed = 42;
  int threads = 1;
  std::string out_dir = "runs/out";

  void validate() const;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text);

  // Canonical serialization of the effective config: every key, fixed
  // order, shortest round-trip numbers. Also the schema reference.
  std::string canonical_text() const;
  std::uint64_t config_hash() const;  // FNV-1a of canonical_text()
  // "tool_version seed=... config=..." comment embedded in artifacts.
  std::string meta_comment() const;

  // Deterministic per-stage seed derivation from the master seed.
  std::uint64_t stage_seed(std::string_view stage, std::uint64_t counter = 0) const;
};

}  // namespace nrank
