#include "bwe/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "bwe/error.hpp"
#include "bwe/io.hpp"

namespace bwe::stats {

KsDirection parse_ks_direction(std::string_view name) {
  if (name == "greater") return KsDirection::Greater;
  if (name == "less") return KsDirection::Less;
  throw InputError("KS direction must be 'greater' or 'less', got '" + std::string(name) + "'");
}

std::string to_string(KsDirection direction) {
  return direction == KsDirection::Greater ? "greater" : "less";
}

KsResult ks_one_sided(std::span<const double> sample_a, std::span<const double> sample_b,
                      KsDirection direction) {
  if (sample_a.empty() || sample_b.empty()) throw InputError("KS test needs two nonempty samples");
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  for (double v : a)
    if (std::isnan(v)) throw InputError("KS sample contains NaN");
  for (double v : b)
    if (std::isnan(v)) throw InputError("KS sample contains NaN");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  // Walk the pooled breakpoints; the CDF difference is tracked on the
  // integer scale i*n - j*m so the statistic depends on ranks only.
  const auto m = static_cast<std::int64_t>(a.size());
  const auto n = static_cast<std::int64_t>(b.size());
  std::int64_t i = 0, j = 0, best = 0;
  while (i < m || j < n) {
    const double x = (j >= n || (i < m && a[i] <= b[j])) ? a[i] : b[j];
    while (i < m && a[i] == x) ++i;
    while (j < n && b[j] == x) ++j;
    const std::int64_t diff = i * n - j * m;
    best = std::max(best, direction == KsDirection::Greater ? diff : -diff);
  }

  KsResult r;
  r.statistic = static_cast<double>(best) / static_cast<double>(m * n);
  r.n_a = a.size();
  r.n_b = b.size();
  r.direction = direction;
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  r.p_value = std::min(1.0, std::exp(-2.0 * md * nd * r.statistic * r.statistic / (md + nd)));
  return r;
}

std::int64_t biweekly_period(std::string_view iso_date) {
  const std::string where = "date '" + std::string(iso_date) + "'";
  if (iso_date.size() < 10 || iso_date[4] != '-' || iso_date[7] != '-')
    throw InputError(where + ": expected YYYY-MM-DD");
  const auto y = static_cast<int>(parse_int(iso_date.substr(0, 4), where));
  const auto mo = static_cast<unsigned>(parse_int(iso_date.substr(5, 2), where));
  const auto d = static_cast<unsigned>(parse_int(iso_date.substr(8, 2), where));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw InputError(where + ": not a calendar date");
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(std::floor(static_cast<double>(days) / 14.0));
}

PeriodSeries aggregate_periods(const ident::DocumentScores &scores, const std::string &period_key,
                               Reducer reducer) {
  const auto n_docs = scores.doc_ids.size();
  std::vector<std::string> keys(n_docs);
  std::vector<std::string> missing_docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const Metadata empty;
    const auto &meta = d < scores.metadata.size() ? scores.metadata[d] : empty;
    auto it = meta.find(period_key);
    if (it == meta.end() || it->second.empty())
      missing_docs.push_back(scores.doc_ids[d]);
    else
      keys[d] = it->second;
  }
  if (!missing_docs.empty()) {
    std::string list;
    for (std::size_t k = 0; k < missing_docs.size() && k < 20; ++k)
      list += (k ? ", " : "") + missing_docs[k];
    if (missing_docs.size() > 20) list += ", ...";
    throw InputError(std::to_string(missing_docs.size()) + " document(s) lack metadata key '" +
                     period_key + "': " + list);
  }

  bool integer = n_docs > 0;
  std::vector<std::int64_t> as_int(n_docs);
  for (std::size_t d = 0; d < n_docs && integer; ++d) {
    try {
      as_int[d] = parse_int(keys[d], "");
    } catch (const InputError &) {
      integer = false;
    }
  }

  PeriodSeries out;
  out.integer_periods = integer;
  auto reduce = [&](double sum, std::size_t count) {
    return reducer == Reducer::Sum ? sum : sum / static_cast<double>(count);
  };
  if (integer) {
    std::map<std::int64_t, std::pair<double, std::size_t>> groups;
    for (std::size_t d = 0; d < n_docs; ++d) {
      auto &g = groups[as_int[d]];
      g.first += scores.scores[static_cast<Eigen::Index>(d)];
      ++g.second;
    }
    const auto lo = groups.begin()->first;
    const auto hi = groups.rbegin()->first;
    for (auto p = lo; p <= hi; ++p) {
      out.periods.push_back(std::to_string(p));
      auto it = groups.find(p);
      if (it == groups.end()) {
        out.values.push_back(std::numeric_limits<double>::quiet_NaN());
        out.n_docs.push_back(0);
        out.missing.push_back(true);
      } else {
        out.values.push_back(reduce(it->second.first, it->second.second));
        out.n_docs.push_back(it->second.second);
        out.missing.push_back(false);
      }
    }
  } else {
    std::map<std::string, std::pair<double, std::size_t>> groups;
    for (std::size_t d = 0; d < n_docs; ++d) {
      auto &g = groups[keys[d]];
      g.first += scores.scores[static_cast<Eigen::Index>(d)];
      ++g.second;
    }
    for (const auto &[key, g] : groups) {
      out.periods.push_back(key);
      out.values.push_back(reduce(g.first, g.second));
      out.n_docs.push_back(g.second);
      out.missing.push_back(false);
    }
  }
  return out;
}

LagResult lag_align(std::span<const std::int64_t> count_periods, std::span<const double> counts,
                    std::span<const std::int64_t> covariate_periods,
                    std::span<const double> covariate, int lag) {
  if (lag < 0) throw InputError("lag must be >= 0");
  if (count_periods.size() != counts.size() || covariate_periods.size() != covariate.size())
    throw DimensionMismatchError("period and value columns differ in length");
  std::map<std::int64_t, double> cov;
  for (std::size_t k = 0; k < covariate.size(); ++k)
    if (!std::isnan(covariate[k])) cov[covariate_periods[k]] = covariate[k];

  LagResult out;
  out.series.lag = lag;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    if (t > 0 && count_periods[t] <= count_periods[t - 1])
      throw InputError("count periods must be strictly increasing");
    if (counts[t] < 0.0 || !std::isfinite(counts[t]))
      throw InputError("counts must be finite and nonnegative");
    auto it = cov.find(count_periods[t] - lag);
    if (it == cov.end()) {
      out.unmatched_periods.push_back(count_periods[t]);
      continue;
    }
    out.series.periods.push_back(count_periods[t]);
    out.series.counts.push_back(counts[t]);
    out.series.covariate.push_back(it->second);
  }
  return out;
}

GlmFit poisson_glm(const CountSeries &series, const GlmOptions &options) {
  const auto n = static_cast<Eigen::Index>(series.counts.size());
  if (static_cast<std::size_t>(n) != series.covariate.size())
    throw DimensionMismatchError("counts and covariate differ in length");
  if (n < 3) throw InputError("Poisson GLM needs at least 3 observations");
  const Eigen::Map<const Eigen::VectorXd> y(series.counts.data(), n);
  const Eigen::Map<const Eigen::VectorXd> x(series.covariate.data(), n);
  if ((y.array() < 0.0).any() || !y.allFinite() || !x.allFinite())
    throw InputError("counts must be nonnegative and covariates finite");

  const Eigen::Index p = options.intercept_only ? 1 : 2;
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  if (p == 2) {
    design.col(1) = x;
    if (x.maxCoeff() == x.minCoeff())
      throw SingularDesignError("covariate is constant; use the intercept-only model");
  }

  const double mean_y = y.mean();
  if (!(mean_y > 0.0)) throw DivergenceError("all counts are zero; the intercept diverges");

  GlmFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = std::log(mean_y);
  Eigen::VectorXd mu;
  Eigen::MatrixXd info;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd eta = design * beta;
    mu = eta.array().exp();
    info = design.transpose() * mu.asDiagonal() * design;
    const Eigen::VectorXd score = design.transpose() * (y - mu);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
      throw SingularDesignError("information matrix is singular");
    const Eigen::VectorXd step = ldlt.solve(score);
    beta += step;
    fit.iterations = it;
    if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > options.divergence_limit)
      throw DivergenceError("coefficients diverged (|b| > " +
                            format_double(options.divergence_limit) + "); possible separation");
    if (step.cwiseAbs().maxCoeff() < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  mu = (design * beta).array().exp();
  fit.fitted = mu;
  info = design.transpose() * mu.asDiagonal() * design;
  const Eigen::MatrixXd cov = info.inverse();
  fit.covariance = cov;
  fit.standard_errors = cov.diagonal().array().sqrt();
  fit.loglik = 0.0;
  for (Eigen::Index t = 0; t < n; ++t)
    fit.loglik += (y[t] > 0.0 ? y[t] * std::log(mu[t]) : 0.0) - mu[t] - std::lgamma(y[t] + 1.0);

  fit.leverage.resize(n);
  fit.cooks_distance.resize(n);
  Eigen::VectorXd pearson = (y - mu).array() / mu.array().sqrt();
  fit.dispersion = n > p ? pearson.squaredNorm() / static_cast<double>(n - p) : 1.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd row = design.row(t).transpose();
    const double h = mu[t] * row.dot(cov * row);
    fit.leverage[t] = h;
    fit.cooks_distance[t] = pearson[t] * pearson[t] * h /
                            (fit.dispersion * static_cast<double>(p) * (1.0 - h) * (1.0 - h));
  }
  return fit;
}

OutlierResult filter_outliers(const CountSeries &series, const GlmFit &fit,
                              const OutlierOptions &options) {
  const auto n = series.counts.size();
  if (static_cast<std::size_t>(fit.cooks_distance.size()) != n ||
      static_cast<std::size_t>(fit.leverage.size()) != n)
    throw DimensionMismatchError("fit diagnostics do not cover every observation");
  const double nd = static_cast<double>(n);
  const double predictors = static_cast<double>(fit.coefficients.size() - 1);
  const double cooks_cut = options.cooks_threshold.value_or(4.0 / nd);
  const double leverage_cut = options.leverage_threshold.value_or(2.0 * (predictors + 1.0) / nd);

  OutlierResult out;
  out.series.lag = series.lag;
  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    if (fit.cooks_distance[ti] > cooks_cut || fit.leverage[ti] > leverage_cut) {
      out.dropped_periods.push_back(series.periods[t]);
      continue;
    }
    out.series.periods.push_back(series.periods[t]);
    out.series.counts.push_back(series.counts[t]);
    out.series.covariate.push_back(series.covariate[t]);
  }
  if (out.series.counts.empty()) throw InputError("every observation was flagged as an outlier");
  return out;
}

} // namespace bwe::stats
