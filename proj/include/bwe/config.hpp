#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace bwe {

// Every tunable of every command. Defaults mirror the inaugural-address
// setup: tokens seen more than 5 times, window 9, 5 negatives, K = 50.
struct RunConfig {
  // paths
  std::string corpus;
  std::string metadata;
  std::string out;
  std::string model;
  std::string resume;
  std::string anchors;
  std::string scores;
  std::string events;
  std::string series;
  std::string curve;

  // corpus
  int min_count = 6;
  bool lowercase = true;
  int window = 9;
  int negatives = 5;
  double neg_exponent = 0.75;
  bool avoid_collisions = true;
  bool dedupe_pairs = false;
  bool save_cooc = false;

  // variational fit
  int k = 50;
  double c_x0 = 1e-3;
  double d_x0 = 1e-3;
  double c_b0 = 1e-3;
  double d_b0 = 1e-3;
  int max_iters = 200;
  double elbo_tol = 1e-6;
  bool ard_with_trace = true;
  std::uint64_t seed = 1;
  bool verbose = false;

  // identification
  std::string pairs; // "pos neg dim;pos neg dim"
  std::string dissimilarity = "minmax";
  double ridge = 0.0;
  std::string embeddings = "identified";
  int dim = 0;
  bool normalize = false;
  std::string word;
  int n = 8;

  // KS
  std::string label_key;
  std::string group_a;
  std::string group_b;
  std::string split_key;
  double split_at = 0.0;
  std::string direction;
  std::string exclude; // "key=value,key=value"

  // GLM
  std::string date_key = "date";
  std::string reducer = "mean";
  std::string actor;
  std::string action;
  int lag = 1;
  bool drop_outliers = false;
  double cooks_threshold = 0.0;    // 0 = 4/n
  double leverage_threshold = 0.0; // 0 = 2(p+1)/n
  bool intercept_only = false;

  friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

struct ConfigKey {
  std::string name;
  std::string help;
  bool is_bool = false;
  std::function<std::string(const RunConfig &)> get;
  std::function<void(RunConfig &, std::string_view)> set; // throws InputError
};

const std::vector<ConfigKey> &config_keys();
const ConfigKey &config_key(std::string_view name); // throws InputError

// Applies "key=value" lines; '#' comments and blank lines are skipped.
// Unknown keys are an error.
void apply_config_text(RunConfig &config, std::string_view text, const std::string &where);
RunConfig load_config(const std::filesystem::path &path);

// Every key in sorted order, one "key=value" per line.
std::string canonical_config(const RunConfig &config);

} // namespace bwe
