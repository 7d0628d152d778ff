#include "bwe/cli.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "bwe/error.hpp"

namespace bwe::cli {
namespace {

struct Command {
  std::string name;
  std::string description;
  std::vector<std::string> keys;
  void (*handler)(const RunConfig &, std::ostream &);
};

const std::vector<Command> &commands() {
  static const std::vector<Command> list = {
      {"train", "build the vocabulary and co-occurrence data, then fit embeddings",
       {"corpus", "metadata", "out", "resume", "min_count", "lowercase", "window", "negatives",
        "neg_exponent", "avoid_collisions", "dedupe_pairs", "save_cooc", "k", "c_x0", "d_x0",
        "c_b0", "d_b0", "max_iters", "elbo_tol", "ard_with_trace", "seed", "verbose"},
       cmd_train},
      {"anchor", "map a trained embedding onto anchored, labelled dimensions",
       {"model", "out", "anchors", "pairs", "dissimilarity", "ridge"},
       cmd_anchor},
      {"score", "score documents on one embedding dimension",
       {"model", "corpus", "metadata", "out", "embeddings", "dim", "normalize"},
       cmd_score},
      {"similar", "list the words closest to a query word by cosine similarity",
       {"model", "word", "n", "embeddings", "out"},
       cmd_similar},
      {"ks", "one-sided two-sample Kolmogorov-Smirnov test on document scores",
       {"scores", "out", "label_key", "group_a", "group_b", "split_key", "split_at", "direction",
        "exclude"},
       cmd_ks},
      {"glm", "Poisson regression of event counts on lagged per-period scores",
       {"scores", "events", "series", "out", "curve", "date_key", "reducer", "actor", "action",
        "lag", "drop_outliers", "cooks_threshold", "leverage_threshold", "intercept_only"},
       cmd_glm},
  };
  return list;
}

std::string flag_name(const std::string &key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

std::string keys_footer() {
  const RunConfig defaults;
  std::string text = "Config keys (key=value in --config FILE; flags use dashes):\n";
  for (const auto &k : config_keys()) {
    const auto value = k.get(defaults);
    text += "  " + k.name + " = " + (value.empty() ? "\"\"" : value) + "\n";
  }
  return text;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Bayesian word embeddings with anchored dimensions", "bwe"};
  app.require_subcommand(1);
  app.footer(keys_footer());

  struct Bound {
    CLI::App *sub = nullptr;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option *> options;
    bool ard_means_only = false, no_lowercase = false, no_avoid_collisions = false;
    std::vector<std::vector<std::string>> pairs;
  };
  std::vector<Bound> bound(commands().size());
  const RunConfig defaults;

  for (std::size_t c = 0; c < commands().size(); ++c) {
    const auto &cmd = commands()[c];
    auto &b = bound[c];
    b.sub = app.add_subcommand(cmd.name, cmd.description);
    b.sub->add_option("--config", b.config_file, "key=value file applied before flags");
    for (const auto &name : cmd.keys) {
      const auto &key = config_key(name);
      const auto def = key.get(defaults);
      const auto help = key.help + (def.empty() ? "" : " [default: " + def + "]");
      if (key.is_bool)
        b.options[name] = b.sub->add_flag(flag_name(name) + "{true}", b.values[name], help);
      else
        b.options[name] = b.sub->add_option(flag_name(name), b.values[name], help);
    }
    if (cmd.name == "train") {
      b.sub->add_flag("--ard-means-only", b.ard_means_only, "same as --ard-with-trace=false");
      b.sub->add_flag("--no-lowercase", b.no_lowercase, "same as --lowercase=false");
      b.sub->add_flag("--no-avoid-collisions", b.no_avoid_collisions,
                      "same as --avoid-collisions=false");
    }
    if (cmd.name == "anchor")
      b.sub->add_option("--pair", b.pairs, "anchor pair: POSITIVE NEGATIVE DIM (repeatable)")
          ->expected(3)
          ->allow_extra_args(false);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\nrun 'bwe --help' for usage\n";
    return 2;
  }

  for (std::size_t c = 0; c < commands().size(); ++c) {
    auto &b = bound[c];
    if (!b.sub->parsed()) continue;
    try {
      RunConfig config;
      if (!b.config_file.empty()) config = load_config(b.config_file);
      for (const auto &name : commands()[c].keys)
        if (b.options[name]->count() > 0) config_key(name).set(config, b.values[name]);
      if (b.ard_means_only) config.ard_with_trace = false;
      if (b.no_lowercase) config.lowercase = false;
      if (b.no_avoid_collisions) config.avoid_collisions = false;
      for (const auto &triple : b.pairs) {
        if (triple.size() != 3) throw InputError("--pair takes POSITIVE NEGATIVE DIM");
        if (!config.pairs.empty()) config.pairs += ';';
        config.pairs += triple[0] + ' ' + triple[1] + ' ' + triple[2];
      }
      commands()[c].handler(config, out);
      return 0;
    } catch (const InputError &e) {
      err << "error: " << e.what() << '\n';
      return 2;
    } catch (const NumericalError &e) {
      err << "numerical error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception &e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

} // namespace bwe::cli
