#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bwe/cli.hpp"
#include "bwe/corpus.hpp"
#include "bwe/error.hpp"
#include "bwe/identification.hpp"
#include "bwe/io.hpp"
#include "bwe/rng.hpp"
#include "bwe/stats.hpp"
#include "bwe/vb_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace bwe::cli {
namespace {

const std::string &require(const std::string &value, const std::string &key) {
  if (value.empty()) throw InputError("missing required option --" + key);
  return value;
}

fs::path require_file(const fs::path &path, const std::string &hint = {}) {
  if (!fs::exists(path))
    throw InputError("missing artifact: " + path.string() + (hint.empty() ? "" : " (" + hint + ")"));
  return path;
}

vb::Hyperparameters hyperparameters(const RunConfig &c) {
  vb::Hyperparameters h;
  h.k = c.k;
  h.c_x0 = c.c_x0;
  h.d_x0 = c.d_x0;
  h.c_b0 = c.c_b0;
  h.d_b0 = c.d_b0;
  h.max_iters = c.max_iters;
  h.elbo_tol = c.elbo_tol;
  h.seed = c.seed;
  h.ard_with_trace = c.ard_with_trace;
  return h;
}

// Settings the model was trained with; falls back to defaults when the
// model directory has no config.txt.
RunConfig model_config(const fs::path &model) {
  const auto path = model / "config.txt";
  return fs::exists(path) ? load_config(path) : RunConfig{};
}

struct Model {
  Vocabulary vocab;
  Eigen::MatrixXd embeddings;
  fs::path embeddings_path;
};

Model load_model(const RunConfig &c, bool identified) {
  const fs::path dir = require(c.model, "model");
  const auto trained = model_config(dir);
  Model m;
  m.vocab = read_vocabulary(require_file(dir / "vocab.tsv", "run 'bwe train' first"),
                            trained.min_count, trained.lowercase);
  m.embeddings_path = identified ? dir / "identified.tsv" : dir / "embeddings.tsv";
  auto table = vb::read_embeddings_tsv(
      require_file(m.embeddings_path, identified ? "run 'bwe anchor' first" : "run 'bwe train' first"));
  if (table.words != m.vocab.words())
    throw InputError(m.embeddings_path.string() + ": words differ from vocab.tsv");
  m.embeddings = std::move(table.means);
  return m;
}

bool use_identified(const RunConfig &c) {
  if (c.embeddings == "identified") return true;
  if (c.embeddings == "raw") return false;
  throw InputError("--embeddings must be 'identified' or 'raw'");
}

std::vector<ident::AnchorPair> parse_pairs(const std::string &text) {
  std::vector<ident::AnchorPair> pairs;
  for (const auto &item : split(text, ';')) {
    std::vector<std::string> f;
    for (auto &tok : split(item, ' '))
      if (!tok.empty()) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() != 3) throw InputError("anchor pair must be 'positive negative dim', got '" + item + "'");
    pairs.push_back({f[0], f[1], static_cast<int>(parse_int(f[2], "anchor pair dimension"))});
  }
  return pairs;
}

ordered_json glm_json(const stats::GlmFit &fit, std::size_t n) {
  ordered_json j;
  j["n"] = n;
  j["coefficients"]["intercept"] = fit.coefficients[0];
  j["standard_errors"]["intercept"] = fit.standard_errors[0];
  if (fit.coefficients.size() > 1) {
    j["coefficients"]["slope"] = fit.coefficients[1];
    j["standard_errors"]["slope"] = fit.standard_errors[1];
  }
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["loglik"] = fit.loglik;
  j["dispersion"] = fit.dispersion;
  return j;
}

void print_fit(std::ostream &out, const std::string &title, const stats::GlmFit &fit, std::size_t n) {
  out << title << " (n=" << n << ", iterations=" << fit.iterations
      << (fit.converged ? ", converged" : ", NOT converged") << ")\n";
  out << "  intercept " << format_double(fit.coefficients[0]) << " (se "
      << format_double(fit.standard_errors[0]) << ")\n";
  if (fit.coefficients.size() > 1)
    out << "  slope     " << format_double(fit.coefficients[1]) << " (se "
        << format_double(fit.standard_errors[1]) << ")\n";
}

} // namespace

void cmd_train(const RunConfig &c, std::ostream &out) {
  const fs::path corpus_path = require(c.corpus, "corpus");
  const fs::path out_dir = require(c.out, "out");
  const auto hyper = hyperparameters(c);
  vb::validate(hyper);

  std::optional<fs::path> meta;
  if (!c.metadata.empty()) meta = c.metadata;
  const Corpus corpus = read_corpus(corpus_path, meta);
  const Vocabulary vocab = build_vocabulary(corpus.texts, c.min_count, c.lowercase);
  const auto docs = encode_corpus(corpus.texts, vocab);
  auto pairs = extract_pairs(docs, c.window);
  if (c.dedupe_pairs) pairs = dedupe_pairs(pairs);
  NegativeSamplingOptions neg;
  neg.negatives_per_positive = c.negatives;
  neg.exponent = c.neg_exponent;
  neg.avoid_collisions = c.avoid_collisions;
  neg.seed = substream_seed(c.seed, "negatives");
  CooccurrenceSet data = negative_sample(pairs, vocab, neg);
  data.window = c.window;
  if (data.triples.empty()) throw InputError("corpus yields no co-occurrence pairs");

  fs::create_directories(out_dir);
  write_vocabulary(out_dir / "vocab.tsv", vocab);
  write_file(out_dir / "config.txt", canonical_config(c));
  if (c.save_cooc) write_cooccurrence(out_dir / "cooc.bin", data);

  out << "vocabulary: " << vocab.size() << " words; observations: " << data.num_positive()
      << " positive, " << data.num_negative() << " negative\n";

  const vb::ObservationIndex index(data);
  vb::VariationalState state;
  if (!c.resume.empty()) {
    state = vb::read_state(require_file(c.resume));
    out << "resuming from " << c.resume << " after " << state.iterations << " sweeps\n";
  } else {
    state = vb::init_state(hyper, index.num_words(), index.num_contexts());
  }
  vb::ProgressCallback progress;
  if (c.verbose)
    progress = [&out](int it, double elbo, double rel) {
      out << "sweep " << it << " elbo " << format_double(elbo);
      if (!std::isnan(rel)) out << " rel_change " << format_double(rel);
      out << '\n';
    };
  vb::run(state, index, hyper, progress);

  vb::write_embeddings_tsv(out_dir / "embeddings.tsv", state.x_mean, vocab.words());
  vb::write_embeddings_tsv(out_dir / "contexts.tsv", state.b_mean, vocab.words());
  vb::write_alpha_tsv(out_dir / "alpha.tsv", state);
  vb::write_state(out_dir / "state.bin", state);
  vb::write_elbo_csv(out_dir / "elbo.csv", state.elbo_history);

  out << "status: " << (state.converged ? "converged" : "not converged (max iterations)")
      << " after " << state.iterations << " sweeps\n";
  if (!state.elbo_history.empty())
    out << "final ELBO: " << format_double(state.elbo_history.back()) << '\n';
}

void cmd_anchor(const RunConfig &c, std::ostream &out) {
  const Model m = load_model(c, false);
  ident::AnchorSpec spec;
  if (!c.anchors.empty()) spec = ident::read_anchor_spec(c.anchors);
  for (auto &p : parse_pairs(c.pairs)) spec.user_pairs.push_back(std::move(p));
  if (spec.user_pairs.empty() && spec.auto_anchors.empty())
    throw InputError("no anchors given; use --pair POS NEG DIM or --anchors FILE");

  ident::SelectionOptions sel;
  if (c.dissimilarity == "minmax")
    sel.rule = ident::DissimilarityRule::MinMax;
  else if (c.dissimilarity == "minsum")
    sel.rule = ident::DissimilarityRule::MinSum;
  else
    throw InputError("--dissimilarity must be 'minmax' or 'minsum'");

  sel.require_affine_independence = c.ridge == 0.0;
  ident::AnchorSpec full;
  try {
    full = ident::complete_anchor_spec(spec, m.embeddings, m.vocab, sel);
  } catch (const InputError &e) {
    if (c.ridge != 0.0) throw;
    const Eigen::VectorXd scale = m.embeddings.cwiseAbs().rowwise().maxCoeff();
    const auto active = (scale.array() > 1e-8 * scale.maxCoeff()).count();
    throw InputError(std::string(e.what()) + "; the embedding has " + std::to_string(active) +
                     " of " + std::to_string(m.embeddings.rows()) +
                     " dimensions not pruned by ARD, retry with --ridge (e.g. 1e-6)");
  }
  ident::AffineOptions opts;
  opts.ridge = c.ridge;
  const auto id = ident::solve_affine(m.embeddings, m.vocab, full, opts);

  const fs::path out_dir = c.out.empty() ? fs::path(c.model) : fs::path(c.out);
  fs::create_directories(out_dir);
  vb::write_embeddings_tsv(out_dir / "identified.tsv", id.matrix, m.vocab.words());
  ident::write_identified_metadata(out_dir / "identified.json", id);

  out << "anchors: " << full.user_pairs.size() << " pair(s), " << full.auto_anchors.size()
      << " automatic\n";
  for (const auto &p : full.user_pairs)
    out << "  dim " << p.dim << ": " << p.positive << " (+1) / " << p.negative << " (-1)\n";
  out << "anchor residual: " << format_double(id.anchor_residual) << '\n';
  out << "condition number: " << format_double(id.condition_number) << '\n';
}

void cmd_score(const RunConfig &c, std::ostream &out) {
  const Model m = load_model(c, use_identified(c));
  std::optional<fs::path> meta;
  if (!c.metadata.empty()) meta = c.metadata;
  const Corpus corpus = read_corpus(require(c.corpus, "corpus"), meta);
  const auto dtm = build_dtm(corpus.texts, m.vocab, corpus.doc_ids, corpus.metadata);
  const auto scores = ident::score_documents(m.embeddings, dtm, c.dim, c.normalize);
  const fs::path path = c.out.empty() ? fs::path(c.model) / "scores.csv" : fs::path(c.out);
  ident::write_scores_csv(path, scores);

  const auto n_empty = std::count(scores.empty.begin(), scores.empty.end(), true);
  out << "scored " << scores.doc_ids.size() << " documents on dimension " << c.dim << " of "
      << m.embeddings_path.filename().string() << " -> " << path.string() << '\n';
  if (n_empty > 0) out << n_empty << " document(s) have no vocabulary tokens (flagged 'empty')\n";
}

void cmd_similar(const RunConfig &c, std::ostream &out) {
  const Model m = load_model(c, use_identified(c));
  const WordId query = m.vocab.at(require(c.word, "word"));
  if (c.n < 1) throw InputError("--n must be >= 1");
  const auto neighbours = ident::nearest_words(m.embeddings, query, static_cast<std::size_t>(c.n));
  std::string csv = "rank,word,similarity\n";
  for (std::size_t r = 0; r < neighbours.size(); ++r)
    csv += std::to_string(r + 1) + ',' + csv_escape(m.vocab.word(neighbours[r].word)) + ',' +
           format_double(neighbours[r].similarity) + '\n';
  if (c.out.empty()) {
    out << csv;
    return;
  }
  write_file(c.out, csv);
  out << "most similar to '" << c.word << "':\n";
  for (std::size_t r = 0; r < neighbours.size(); ++r)
    out << "  " << (r + 1) << ". " << m.vocab.word(neighbours[r].word) << "  "
        << format_double(neighbours[r].similarity) << '\n';
}

void cmd_ks(const RunConfig &c, std::ostream &out) {
  const auto scores = ident::read_scores_csv(require(c.scores, "scores"));
  const auto direction = stats::parse_ks_direction(require(c.direction, "direction"));

  std::vector<std::pair<std::string, std::string>> excludes;
  for (const auto &item : split(c.exclude, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("--exclude entries must be key=value");
    excludes.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  const bool by_split = !c.split_key.empty();
  if (!by_split) {
    require(c.label_key, "label-key (or --split-key)");
    require(c.group_a, "group-a");
    require(c.group_b, "group-b");
  }
  const auto a_labels = split(c.group_a, ',');
  const auto b_labels = split(c.group_b, ',');
  auto contains = [](const std::vector<std::string> &v, const std::string &s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };

  std::vector<double> a, b;
  std::size_t excluded = 0, unlabeled = 0;
  for (std::size_t d = 0; d < scores.doc_ids.size(); ++d) {
    const auto &meta = scores.metadata[d];
    bool drop = false;
    for (const auto &[k, v] : excludes) {
      auto it = meta.find(k);
      if (it != meta.end() && it->second == v) drop = true;
    }
    if (drop) {
      ++excluded;
      continue;
    }
    const double s = scores.scores[static_cast<Eigen::Index>(d)];
    const auto it = meta.find(by_split ? c.split_key : c.label_key);
    if (it == meta.end()) {
      ++unlabeled;
      continue;
    }
    if (by_split) {
      const double v = parse_double(it->second, "document " + scores.doc_ids[d]);
      (v < c.split_at ? a : b).push_back(s);
    } else if (contains(a_labels, it->second)) {
      a.push_back(s);
    } else if (contains(b_labels, it->second)) {
      b.push_back(s);
    } else {
      ++unlabeled;
    }
  }
  const auto r = stats::ks_one_sided(a, b, direction);

  ordered_json j;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["direction"] = stats::to_string(r.direction);
  j["excluded_documents"] = excluded;
  j["unassigned_documents"] = unlabeled;
  if (c.out.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  write_file(c.out, j.dump(2) + "\n");
  out << "one-sided KS (" << stats::to_string(r.direction) << "): D = " << format_double(r.statistic)
      << ", p = " << format_double(r.p_value) << " (n_a = " << r.n_a << ", n_b = " << r.n_b << ")\n";
  if (excluded + unlabeled > 0)
    out << excluded << " document(s) excluded, " << unlabeled << " without a group\n";
}

void cmd_glm(const RunConfig &c, std::ostream &out) {
  stats::CountSeries series;
  ordered_json report;
  if (!c.series.empty()) {
    series = stats::read_series_csv(c.series, c.lag);
  } else {
    const auto events = stats::read_event_counts(
        require(c.events, "events (or --series)"),
        stats::EventFilter{c.actor.empty() ? std::nullopt : std::optional(c.actor),
                           c.action.empty() ? std::nullopt : std::optional(c.action)});
    const auto scores = ident::read_scores_csv(require(c.scores, "scores"));

    // Documents without a usable date are reported, not fatal.
    ident::DocumentScores dated;
    std::vector<std::string> undated;
    std::vector<double> values;
    for (std::size_t d = 0; d < scores.doc_ids.size(); ++d) {
      auto it = scores.metadata[d].find(c.date_key);
      std::optional<std::int64_t> period;
      if (it != scores.metadata[d].end()) {
        try {
          period = stats::biweekly_period(it->second);
        } catch (const InputError &) {
        }
      }
      if (!period) {
        undated.push_back(scores.doc_ids[d]);
        continue;
      }
      dated.doc_ids.push_back(scores.doc_ids[d]);
      values.push_back(scores.scores[static_cast<Eigen::Index>(d)]);
      dated.metadata.push_back({{"period", std::to_string(*period)}});
    }
    if (dated.doc_ids.empty()) throw InputError("no scored document has a valid '" + c.date_key + "'");
    dated.scores = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    stats::Reducer reducer;
    if (c.reducer == "mean")
      reducer = stats::Reducer::Mean;
    else if (c.reducer == "sum")
      reducer = stats::Reducer::Sum;
    else
      throw InputError("--reducer must be 'mean' or 'sum'");
    const auto agg = stats::aggregate_periods(dated, "period", reducer);

    std::vector<std::int64_t> cov_periods, count_periods;
    std::vector<double> counts;
    for (const auto &p : agg.periods) cov_periods.push_back(parse_int(p, "period"));
    for (const auto &[p, v] : events) {
      count_periods.push_back(p);
      counts.push_back(v);
    }
    auto lagged = stats::lag_align(count_periods, counts, cov_periods, agg.values, c.lag);
    series = std::move(lagged.series);
    report["excluded_documents"] = undated;
    report["unmatched_periods"] = lagged.unmatched_periods;
    if (!undated.empty())
      out << undated.size() << " document(s) without a valid '" << c.date_key << "' excluded\n";
  }

  stats::GlmOptions opts;
  opts.intercept_only = c.intercept_only;
  const auto fit = stats::poisson_glm(series, opts);
  report["lag"] = series.lag;
  report["fit"] = glm_json(fit, series.counts.size());
  print_fit(out, "Poisson GLM", fit, series.counts.size());

  const stats::GlmFit *curve_fit = &fit;
  const stats::CountSeries *curve_series = &series;
  stats::OutlierResult filtered;
  stats::GlmFit refit;
  if (c.drop_outliers) {
    stats::OutlierOptions oo;
    if (c.cooks_threshold > 0.0) oo.cooks_threshold = c.cooks_threshold;
    if (c.leverage_threshold > 0.0) oo.leverage_threshold = c.leverage_threshold;
    filtered = stats::filter_outliers(series, fit, oo);
    refit = stats::poisson_glm(filtered.series, opts);
    report["outliers"]["dropped_periods"] = filtered.dropped_periods;
    report["outliers"]["refit"] = glm_json(refit, filtered.series.counts.size());
    out << "dropped " << filtered.dropped_periods.size() << " outlying/high-leverage period(s)\n";
    print_fit(out, "refit", refit, filtered.series.counts.size());
    curve_fit = &refit;
    curve_series = &filtered.series;
  }

  fs::path curve_path = c.curve;
  if (curve_path.empty() && !c.out.empty()) {
    curve_path = fs::path(c.out);
    curve_path.replace_filename(curve_path.stem().string() + "_curve.csv");
  }
  if (!curve_path.empty()) {
    std::string csv = "period,count,covariate,fitted,lower95,upper95\n";
    for (std::size_t t = 0; t < curve_series->counts.size(); ++t) {
      Eigen::VectorXd row(curve_fit->coefficients.size());
      row[0] = 1.0;
      if (row.size() > 1) row[1] = curve_series->covariate[t];
      const double eta = row.dot(curve_fit->coefficients);
      const double se = std::sqrt(row.dot(curve_fit->covariance * row));
      csv += std::to_string(curve_series->periods[t]) + ',' + format_double(curve_series->counts[t]) +
             ',' + format_double(curve_series->covariate[t]) + ',' + format_double(std::exp(eta)) +
             ',' + format_double(std::exp(eta - 1.959963984540054 * se)) + ',' +
             format_double(std::exp(eta + 1.959963984540054 * se)) + '\n';
    }
    write_file(curve_path, csv);
    report["curve"] = curve_path.string();
  }

  if (c.out.empty())
    out << report.dump(2) << '\n';
  else
    write_file(c.out, report.dump(2) + "\n");
}

} // namespace bwe::cli
