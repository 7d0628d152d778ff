#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bwe/identification.hpp"

namespace bwe::stats {

// ---- Kolmogorov-Smirnov ----------------------------------------------------

enum class KsDirection {
  Greater, // D+ = sup_x F_a(x) - F_b(x)
  Less,    // D- = sup_x F_b(x) - F_a(x)
};

KsDirection parse_ks_direction(std::string_view name);
std::string to_string(KsDirection direction);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  KsDirection direction = KsDirection::Greater;
};

// One-sided two-sample test with the asymptotic p-value
// exp(-2 m n D^2 / (m + n)).
KsResult ks_one_sided(std::span<const double> sample_a, std::span<const double> sample_b,
                      KsDirection direction);

// ---- period aggregation ----------------------------------------------------

// floor(days since 1970-01-01 / 14) for an ISO-8601 date (YYYY-MM-DD; a
// trailing time part is ignored).
std::int64_t biweekly_period(std::string_view iso_date);

enum class Reducer { Mean, Sum };

struct PeriodSeries {
  std::vector<std::string> periods;
  std::vector<double> values;
  std::vector<std::size_t> n_docs;
  std::vector<bool> missing; // period inside the range with no documents
  bool integer_periods = false;
};

// Groups documents by a metadata key. Integer keys are ordered numerically
// and gaps between the first and last period are emitted as missing; other
// keys are ordered lexicographically.
PeriodSeries aggregate_periods(const ident::DocumentScores &scores, const std::string &period_key,
                               Reducer reducer);

// ---- Poisson regression ----------------------------------------------------

// Counts aligned with the covariate of `lag` periods earlier.
struct CountSeries {
  std::vector<std::int64_t> periods;
  std::vector<double> counts;
  std::vector<double> covariate;
  int lag = 1;
};

struct LagResult {
  CountSeries series;
  // Count periods without a covariate value `lag` periods before.
  std::vector<std::int64_t> unmatched_periods;
};

LagResult lag_align(std::span<const std::int64_t> count_periods, std::span<const double> counts,
                    std::span<const std::int64_t> covariate_periods,
                    std::span<const double> covariate, int lag);

struct GlmOptions {
  bool intercept_only = false;
  int max_iterations = 50;
  double tolerance = 1e-10;
  double divergence_limit = 50.0;
};

struct GlmFit {
  Eigen::VectorXd coefficients;    // intercept[, slope]
  Eigen::VectorXd standard_errors; // Wald, from the final information matrix
  Eigen::MatrixXd covariance;      // inverse information
  int iterations = 0;
  bool converged = false;
  double loglik = 0.0;
  Eigen::VectorXd fitted;
  double dispersion = 1.0;         // Pearson chi^2 / (n - p)
  Eigen::VectorXd leverage;
  Eigen::VectorXd cooks_distance;  // scaled by dispersion
};

// log E[count_t] = b0 + b1 covariate_t by iteratively reweighted least squares.
GlmFit poisson_glm(const CountSeries &series, const GlmOptions &options = {});

struct OutlierOptions {
  std::optional<double> cooks_threshold;    // default 4/n
  std::optional<double> leverage_threshold; // default 2(p+1)/n
};

struct OutlierResult {
  CountSeries series;
  std::vector<std::int64_t> dropped_periods;
};

OutlierResult filter_outliers(const CountSeries &series, const GlmFit &fit,
                              const OutlierOptions &options = {});

// ---- event input -------------------------------------------------------------

struct EventFilter {
  std::optional<std::string> actor;
  std::optional<std::string> action;
};

// Either (date, count) rows or raw (date, actor, action) rows, one event per
// row, summed per biweekly period.
std::vector<std::pair<std::int64_t, double>> read_event_counts(const std::filesystem::path &path,
                                                               const EventFilter &filter = {});

// (period, count, covariate) rows, the covariate already lagged.
CountSeries read_series_csv(const std::filesystem::path &path, int lag);

} // namespace bwe::stats
