#include "bwe/config.hpp"

#include <algorithm>
#include <map>

#include "bwe/error.hpp"
#include "bwe/io.hpp"

namespace bwe {
namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(std::string_view s, const std::string &key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw InputError("config key '" + key + "': expected true/false, got '" + std::string(s) + "'");
}

ConfigKey string_key(std::string name, std::string RunConfig::*field, std::string help) {
  return {name, std::move(help), false,
          [field](const RunConfig &c) { return c.*field; },
          [field, name](RunConfig &c, std::string_view v) {
            if (v.find('\n') != std::string_view::npos)
              throw InputError("config key '" + name + "': value contains a newline");
            c.*field = std::string(v);
          }};
}

ConfigKey int_key(std::string name, int RunConfig::*field, std::string help) {
  return {name, std::move(help), false,
          [field](const RunConfig &c) { return std::to_string(c.*field); },
          [field, name](RunConfig &c, std::string_view v) {
            c.*field = static_cast<int>(parse_int(v, "config key '" + name + "'"));
          }};
}

ConfigKey u64_key(std::string name, std::uint64_t RunConfig::*field, std::string help) {
  return {name, std::move(help), false,
          [field](const RunConfig &c) { return std::to_string(c.*field); },
          [field, name](RunConfig &c, std::string_view v) {
            c.*field = parse_uint(v, "config key '" + name + "'");
          }};
}

ConfigKey double_key(std::string name, double RunConfig::*field, std::string help) {
  return {name, std::move(help), false,
          [field](const RunConfig &c) { return format_double(c.*field); },
          [field, name](RunConfig &c, std::string_view v) {
            c.*field = parse_double(v, "config key '" + name + "'");
          }};
}

ConfigKey bool_key(std::string name, bool RunConfig::*field, std::string help) {
  return {name, std::move(help), true,
          [field](const RunConfig &c) { return bool_text(c.*field); },
          [field, name](RunConfig &c, std::string_view v) { c.*field = parse_bool(v, name); }};
}

std::vector<ConfigKey> make_keys() {
  using C = RunConfig;
  std::vector<ConfigKey> keys = {
      string_key("corpus", &C::corpus, "corpus file: one document per line, or doc_id<TAB>text (.tsv)"),
      string_key("metadata", &C::metadata, "metadata TSV: doc_id<TAB>key<TAB>value"),
      string_key("out", &C::out, "output directory (train) or file (other commands)"),
      string_key("model", &C::model, "directory written by 'train'"),
      string_key("resume", &C::resume, "state.bin to continue fitting from"),
      string_key("anchors", &C::anchors, "anchor spec TSV (pair/auto lines)"),
      string_key("scores", &C::scores, "document scores CSV written by 'score'"),
      string_key("events", &C::events, "event CSV: date,count or date,actor,action"),
      string_key("series", &C::series, "prepared CSV period,count,covariate (covariate already lagged)"),
      string_key("curve", &C::curve, "fitted-curve CSV output for plotting"),
      int_key("min_count", &C::min_count, "keep tokens occurring at least this often"),
      bool_key("lowercase", &C::lowercase, "lowercase tokens"),
      int_key("window", &C::window, "context half-width in tokens"),
      int_key("negatives", &C::negatives, "negative samples per positive pair"),
      double_key("neg_exponent", &C::neg_exponent, "unigram exponent of the negative-sampling distribution (0 = uniform)"),
      bool_key("avoid_collisions", &C::avoid_collisions, "redraw negatives equal to the true context"),
      bool_key("dedupe_pairs", &C::dedupe_pairs, "keep each distinct (word, context) pair once"),
      bool_key("save_cooc", &C::save_cooc, "also write the co-occurrence cache cooc.bin"),
      int_key("k", &C::k, "embedding dimensions"),
      double_key("c_x0", &C::c_x0, "Gamma shape of the word ARD prior"),
      double_key("d_x0", &C::d_x0, "Gamma rate of the word ARD prior"),
      double_key("c_b0", &C::c_b0, "Gamma shape of the context ARD prior"),
      double_key("d_b0", &C::d_b0, "Gamma rate of the context ARD prior"),
      int_key("max_iters", &C::max_iters, "maximum coordinate-ascent sweeps"),
      double_key("elbo_tol", &C::elbo_tol, "relative ELBO change that counts as converged"),
      bool_key("ard_with_trace", &C::ard_with_trace, "include posterior variances in the ARD rate update"),
      u64_key("seed", &C::seed, "seed for initialization and negative sampling"),
      bool_key("verbose", &C::verbose, "print the ELBO after every sweep"),
      string_key("pairs", &C::pairs, "anchor pairs 'pos neg dim' separated by ';'"),
      string_key("dissimilarity", &C::dissimilarity, "auto-anchor rule: minmax or minsum"),
      double_key("ridge", &C::ridge, "ridge shrinking the affine map toward the identity (0 = exact QR solve)"),
      string_key("embeddings", &C::embeddings, "which embedding to use: identified or raw"),
      int_key("dim", &C::dim, "dimension used to score documents"),
      bool_key("normalize", &C::normalize, "divide document scores by retained-token count"),
      string_key("word", &C::word, "query word for 'similar'"),
      int_key("n", &C::n, "number of neighbours for 'similar'"),
      string_key("label_key", &C::label_key, "metadata key holding the group label"),
      string_key("group_a", &C::group_a, "label value(s) of sample a, comma separated"),
      string_key("group_b", &C::group_b, "label value(s) of sample b, comma separated"),
      string_key("split_key", &C::split_key, "numeric metadata key; a = below split_at, b = the rest"),
      double_key("split_at", &C::split_at, "threshold for split_key"),
      string_key("direction", &C::direction, "KS alternative: greater (sup F_a - F_b) or less"),
      string_key("exclude", &C::exclude, "drop documents matching key=value[,key=value]"),
      string_key("date_key", &C::date_key, "metadata key with ISO-8601 document dates"),
      string_key("reducer", &C::reducer, "per-period aggregation of document scores: mean or sum"),
      string_key("actor", &C::actor, "keep raw events with this actor"),
      string_key("action", &C::action, "keep raw events with this action"),
      int_key("lag", &C::lag, "periods between covariate and counts"),
      bool_key("drop_outliers", &C::drop_outliers, "refit after removing outliers and high-leverage points"),
      double_key("cooks_threshold", &C::cooks_threshold, "Cook's distance cutoff (0 = 4/n)"),
      double_key("leverage_threshold", &C::leverage_threshold, "leverage cutoff (0 = 2(p+1)/n)"),
      bool_key("intercept_only", &C::intercept_only, "fit the intercept-only Poisson model"),
  };
  std::sort(keys.begin(), keys.end(),
            [](const ConfigKey &a, const ConfigKey &b) { return a.name < b.name; });
  return keys;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

const std::vector<ConfigKey> &config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

const ConfigKey &config_key(std::string_view name) {
  const auto &keys = config_keys();
  auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey &k) { return k.name == name; });
  if (it == keys.end()) throw InputError("unknown config key '" + std::string(name) + "'");
  return *it;
}

void apply_config_text(RunConfig &config, std::string_view text, const std::string &where) {
  std::size_t lineno = 0;
  for (const auto &raw : split(text, '\n')) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const auto loc = where + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw InputError(loc + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    try {
      config_key(key).set(config, line.substr(eq + 1));
    } catch (const InputError &e) {
      throw InputError(loc + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path &path) {
  RunConfig config;
  apply_config_text(config, read_file(path), path.string());
  return config;
}

std::string canonical_config(const RunConfig &config) {
  std::string out;
  for (const auto &k : config_keys()) out += k.name + "=" + k.get(config) + "\n";
  return out;
}

} // namespace bwe
