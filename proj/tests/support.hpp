#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the code under test except for data types.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "bwe/corpus.hpp"
#include "bwe/vb_engine.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Rng = std::mt19937_64;

inline constexpr double kLog2Pi = 1.8378770664093454836;

// ---- truncated normal -------------------------------------------------------

// Standard normal truncated to (a, inf): naive rejection for a <= 0, the
// exponential proposal with optimal rate otherwise.
inline double sample_lower_truncated(Rng &rng, double a) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  if (a <= 0.0) {
    for (;;) {
      const double x = normal(rng);
      if (x > a) return x;
    }
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  std::exponential_distribution<double> expo(rate);
  for (;;) {
    const double x = a + expo(rng);
    if (unif(rng) <= std::exp(-0.5 * (x - rate) * (x - rate))) return x;
  }
}

// Draw from N(loc, 1) restricted to z > 0 (positive) or z < 0.
inline double sample_truncated(Rng &rng, double loc, bool positive) {
  return positive ? loc + sample_lower_truncated(rng, -loc)
                  : loc - sample_lower_truncated(rng, loc);
}

inline double monte_carlo_truncated_mean(double loc, bool positive, long draws,
                                         std::uint64_t seed) {
  Rng rng(seed);
  long double sum = 0.0L;
  for (long n = 0; n < draws; ++n) sum += sample_truncated(rng, loc, positive);
  return static_cast<double>(sum / static_cast<long double>(draws));
}

struct TruncMoments {
  double log_mass; // log P(region) under N(loc, 1)
  double mean;     // E[z]
  double second;   // E[z^2]
};

// Moments by adaptive Gauss-Kronrod integration of the density, shifted so
// the integrand peaks inside the interval.
inline TruncMoments truncated_moments_quadrature(double loc, bool positive) {
  using boost::math::quadrature::gauss_kronrod;
  // Work with w = |z| and location s, w > 0.
  const double s = positive ? loc : -loc;
  // Scale the density by exp(c) to keep the far-tail mass representable.
  const double peak = std::max(s, 0.0);
  const double c = 0.5 * (peak - s) * (peak - s);
  auto dens = [&](double w) { return std::exp(-0.5 * (w - s) * (w - s) + c) / std::sqrt(2.0 * M_PI); };
  const double upper = peak + 40.0;
  const double m0 = gauss_kronrod<double, 61>::integrate(dens, 0.0, upper, 15, 1e-14);
  const double m1 = gauss_kronrod<double, 61>::integrate([&](double w) { return w * dens(w); },
                                                         0.0, upper, 15, 1e-14);
  const double m2 = gauss_kronrod<double, 61>::integrate(
      [&](double w) { return w * w * dens(w); }, 0.0, upper, 15, 1e-14);
  TruncMoments r;
  r.log_mass = std::log(m0) - c;
  r.mean = (positive ? 1.0 : -1.0) * m1 / m0;
  r.second = m2 / m0;
  return r;
}

// ---- variational objective, written out term by term ------------------------

struct Factors {
  MatrixXd x_mean, b_mean;
  std::vector<MatrixXd> x_cov, b_cov;
  std::vector<double> location; // one q(z) location per triple
  double c_x = 1.0, c_b = 1.0;
  VectorXd d_x, d_b;
};

inline Factors factors_from_state(const bwe::vb::VariationalState &s,
                                  const bwe::vb::ObservationIndex &index) {
  Factors f;
  f.x_mean = s.x_mean;
  f.b_mean = s.b_mean;
  f.x_cov = s.x_cov;
  f.b_cov = s.b_cov;
  f.c_x = s.c_x;
  f.c_b = s.c_b;
  f.d_x = s.d_x;
  f.d_b = s.d_b;
  for (std::size_t t = 0; t < index.num_triples(); ++t)
    f.location.push_back(s.z_star[index.cell_of_triple(t)]);
  return f;
}

inline double gaussian_block(const VectorXd &mean, const MatrixXd &cov, double c,
                             const VectorXd &d) {
  const auto k = mean.size();
  double v = 0.5 * static_cast<double>(k) * (1.0 + kLog2Pi) +
             0.5 * std::log(cov.determinant());
  for (Eigen::Index r = 0; r < k; ++r) {
    const double e_alpha = c / d[r];
    const double e_log_alpha = boost::math::digamma(c) - std::log(d[r]);
    v += -0.5 * kLog2Pi + 0.5 * e_log_alpha - 0.5 * e_alpha * (cov(r, r) + mean[r] * mean[r]);
  }
  return v;
}

inline double gamma_block(double c, const VectorXd &d, double c0, double d0) {
  double v = 0.0;
  for (Eigen::Index r = 0; r < d.size(); ++r) {
    const double e_alpha = c / d[r];
    const double e_log_alpha = boost::math::digamma(c) - std::log(d[r]);
    v += c0 * std::log(d0) - std::lgamma(c0) + (c0 - 1.0) * e_log_alpha - d0 * e_alpha;
    v += c - std::log(d[r]) + std::lgamma(c) + (1.0 - c) * boost::math::digamma(c);
  }
  return v;
}

// E_q[log p(Y, Z, X, B, alpha)] - E_q[log q], one triple at a time.
inline double naive_elbo(const Factors &f, const bwe::CooccurrenceSet &data,
                         const bwe::vb::Hyperparameters &h,
                         const std::vector<TruncMoments> *cached = nullptr) {
  double total = 0.0;
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const auto &tr = data.triples[t];
    const bool pos = tr.label == 1;
    const double m = f.location[t];
    const TruncMoments mo = cached ? (*cached)[t] : truncated_moments_quadrature(m, pos);
    const VectorXd mu = f.x_mean.col(tr.word);
    const VectorXd nu = f.b_mean.col(tr.context);
    const MatrixXd exx = f.x_cov[tr.word] + mu * mu.transpose();
    const MatrixXd ebb = f.b_cov[tr.context] + nu * nu.transpose();
    const double e_prod_sq = (exx * ebb).trace();
    const double e_log_lik =
        -0.5 * kLog2Pi - 0.5 * (mo.second - 2.0 * mo.mean * mu.dot(nu) + e_prod_sq);
    const double e_log_q =
        -0.5 * kLog2Pi - 0.5 * (mo.second - 2.0 * m * mo.mean + m * m) - mo.log_mass;
    total += e_log_lik - e_log_q;
  }
  for (Eigen::Index i = 0; i < f.x_mean.cols(); ++i)
    total += gaussian_block(f.x_mean.col(i), f.x_cov[i], f.c_x, f.d_x);
  for (Eigen::Index j = 0; j < f.b_mean.cols(); ++j)
    total += gaussian_block(f.b_mean.col(j), f.b_cov[j], f.c_b, f.d_b);
  total += gamma_block(f.c_x, f.d_x, h.c_x0, h.d_x0);
  total += gamma_block(f.c_b, f.d_b, h.c_b0, h.d_b0);
  return total;
}

inline std::vector<TruncMoments> moments_for(const Factors &f, const bwe::CooccurrenceSet &data) {
  std::vector<TruncMoments> out;
  for (std::size_t t = 0; t < data.triples.size(); ++t)
    out.push_back(truncated_moments_quadrature(f.location[t], data.triples[t].label == 1));
  return out;
}

// ---- generic maximizer --------------------------------------------------------

// Newton ascent with central-difference gradient and Hessian and a
// backtracking line search; falls back to gradient steps where the Hessian
// is not negative definite.
inline VectorXd maximize(const std::function<double(const VectorXd &)> &f, VectorXd theta,
                         int max_iter = 200) {
  const auto n = theta.size();
  const double hg = 1e-5, hh = 1e-4;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd g(n);
    MatrixXd hess(n, n);
    const double f0 = f(theta);
    for (Eigen::Index a = 0; a < n; ++a) {
      VectorXd tp = theta, tm = theta;
      tp[a] += hg;
      tm[a] -= hg;
      g[a] = (f(tp) - f(tm)) / (2.0 * hg);
    }
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) {
        auto at = [&](double sa, double sb) {
          VectorXd t = theta;
          t[a] += sa;
          t[b] += sb;
          return f(t);
        };
        const double v = (at(hh, hh) - at(hh, -hh) - at(-hh, hh) + at(-hh, -hh)) / (4.0 * hh * hh);
        hess(a, b) = hess(b, a) = v;
      }
    VectorXd step;
    Eigen::LLT<MatrixXd> llt(-hess);
    if (llt.info() == Eigen::Success)
      step = llt.solve(g);
    else
      step = g;
    double scale = 1.0;
    VectorXd next = theta + step;
    while (!(f(next) >= f0 - 1e-13 * std::abs(f0)) && scale > 1e-12) {
      scale *= 0.5;
      next = theta + scale * step;
    }
    const double moved = (next - theta).cwiseAbs().maxCoeff();
    theta = next;
    if (moved < 1e-11) break;
  }
  return theta;
}

// Covariance <-> unconstrained parameters (Cholesky factor, log diagonal).
inline VectorXd pack_cov(const MatrixXd &cov) {
  const MatrixXd l = cov.llt().matrixL();
  const auto k = cov.rows();
  VectorXd p(k * (k + 1) / 2);
  Eigen::Index n = 0;
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) p[n++] = r == c ? std::log(l(r, c)) : l(r, c);
  return p;
}

inline MatrixXd unpack_cov(const VectorXd &p, Eigen::Index k) {
  MatrixXd l = MatrixXd::Zero(k, k);
  Eigen::Index n = 0;
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) l(r, c) = r == c ? std::exp(p[n++]) : p[n++];
  return l * l.transpose();
}

// ---- synthetic data -----------------------------------------------------------

inline bwe::CooccurrenceSet random_triples(Rng &rng, std::size_t words, std::size_t contexts,
                                           std::size_t count) {
  std::uniform_int_distribution<std::uint32_t> wi(0, static_cast<std::uint32_t>(words - 1));
  std::uniform_int_distribution<std::uint32_t> ci(0, static_cast<std::uint32_t>(contexts - 1));
  std::bernoulli_distribution label(0.4);
  bwe::CooccurrenceSet d;
  d.vocab_size = static_cast<std::uint32_t>(std::max(words, contexts));
  for (std::size_t t = 0; t < count; ++t)
    d.triples.push_back({wi(rng), ci(rng), static_cast<std::uint8_t>(label(rng))});
  return d;
}

// Labels drawn from the probit model with rank-`k_true` embeddings of scale
// `scale`; every (word, context) pair is observed `reps` times.
inline bwe::CooccurrenceSet probit_data(std::uint64_t seed, std::size_t n, int k_true,
                                        double scale, int reps) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::uniform_real_distribution<double> unif;
  MatrixXd x(k_true, static_cast<Eigen::Index>(n)), b(k_true, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    for (int r = 0; r < k_true; ++r) {
      x(r, i) = normal(rng);
      b(r, i) = normal(rng);
    }
  bwe::CooccurrenceSet d;
  d.vocab_size = static_cast<std::uint32_t>(n);
  for (int rep = 0; rep < reps; ++rep)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double eta = x.col(static_cast<Eigen::Index>(i)).dot(b.col(static_cast<Eigen::Index>(j)));
        const double p = 0.5 * std::erfc(-eta / std::sqrt(2.0));
        d.triples.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint8_t>(unif(rng) < p)});
      }
  return d;
}

// ---- statistics ------------------------------------------------------------------

// sup over every pooled value of F_a - F_b (or F_b - F_a), counting directly.
inline double ks_breakpoints(const std::vector<double> &a, const std::vector<double> &b,
                             bool greater) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  double best = 0.0;
  for (double x : pooled) {
    double ca = 0, cb = 0;
    for (double v : a) ca += v <= x;
    for (double v : b) cb += v <= x;
    const double diff = ca / static_cast<double>(a.size()) - cb / static_cast<double>(b.size());
    best = std::max(best, greater ? diff : -diff);
  }
  return best;
}

inline double poisson_loglik(const std::vector<double> &y, const std::vector<double> &x, double b0,
                             double b1) {
  double ll = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double eta = b0 + b1 * x[t];
    ll += y[t] * eta - std::exp(eta) - std::lgamma(y[t] + 1.0);
  }
  return ll;
}

// Plain Newton-Raphson on the two-parameter Poisson log-likelihood from the
// origin, halving steps that do not increase it.
inline std::pair<double, double> poisson_newton(const std::vector<double> &y,
                                                const std::vector<double> &x) {
  double b0 = 0.0, b1 = 0.0;
  for (int it = 0; it < 500; ++it) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      const double mu = std::exp(b0 + b1 * x[t]);
      g0 += y[t] - mu;
      g1 += x[t] * (y[t] - mu);
      h00 += mu;
      h01 += mu * x[t];
      h11 += mu * x[t] * x[t];
    }
    const double det = h00 * h11 - h01 * h01;
    double s0 = (h11 * g0 - h01 * g1) / det;
    double s1 = (h00 * g1 - h01 * g0) / det;
    const double before = poisson_loglik(y, x, b0, b1);
    double scale = 1.0;
    while (poisson_loglik(y, x, b0 + scale * s0, b1 + scale * s1) < before && scale > 1e-10)
      scale *= 0.5;
    b0 += scale * s0;
    b1 += scale * s1;
    if (std::abs(scale * s0) + std::abs(scale * s1) < 1e-14) break;
  }
  return {b0, b1};
}

// Gaussian elimination with partial pivoting on a small dense system.
inline MatrixXd solve_dense(MatrixXd a, MatrixXd b) {
  const auto n = a.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    b.row(c).swap(b.row(piv));
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      a.row(r) -= f * a.row(c);
      b.row(r) -= f * b.row(c);
    }
  }
  MatrixXd x(n, b.cols());
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    x.row(r) = b.row(r);
    for (Eigen::Index c = r + 1; c < n; ++c) x.row(r) -= a(r, c) * x.row(c);
    x.row(r) /= a(r, r);
  }
  return x;
}

// ---- coordinate-update oracle ----------------------------------------------------

struct BlockErrors {
  double z = 0.0;       // q(z) locations and truncated means
  double x = 0.0;       // q(x_i) means and covariances
  double b = 0.0;       // q(b_j)
  double alpha_x = 0.0; // q(alpha_x) shape and rates, relative
  double alpha_b = 0.0;
  double max() const { return std::max({z, x, b, alpha_x, alpha_b}); }
};

// Each closed-form block update against the numerical argmax of the
// term-by-term ELBO over that block's parameters, all else held at `s0`.
// `s0` must have current truncated means (update_z applied).
inline BlockErrors coordinate_update_errors(const bwe::CooccurrenceSet &data,
                                            const bwe::vb::Hyperparameters &h,
                                            const bwe::vb::VariationalState &s0) {
  namespace vb = bwe::vb;
  const vb::ObservationIndex index(data, s0.num_words(), s0.num_contexts());
  const Factors f0 = factors_from_state(s0, index);
  const auto moments = moments_for(f0, data);
  const auto k = s0.k();
  BlockErrors err;

  {
    auto s = s0;
    vb::update_z(s, index);
    const auto z = vb::triple_z_means(s, index);
    for (std::size_t t = 0; t < data.triples.size(); ++t) {
      const bool pos = data.triples[t].label == 1;
      auto objective = [&](const VectorXd &m) {
        Factors f = f0;
        f.location[t] = m[0];
        auto mo = moments;
        mo[t] = truncated_moments_quadrature(m[0], pos);
        return naive_elbo(f, data, h, &mo);
      };
      const VectorXd best = maximize(objective, VectorXd::Constant(1, f0.location[t]));
      const double loc = s.z_star[index.cell_of_triple(t)];
      err.z = std::max(err.z, std::abs(best[0] - loc));
      err.z = std::max(err.z, std::abs(truncated_moments_quadrature(best[0], pos).mean - z[static_cast<Eigen::Index>(t)]));
    }
  }

  auto gaussian_side = [&](bool words) {
    auto s = s0;
    if (words)
      vb::update_word_embeddings(s, index);
    else
      vb::update_context_embeddings(s, index);
    const MatrixXd &mean0 = words ? s0.x_mean : s0.b_mean;
    const MatrixXd &mean1 = words ? s.x_mean : s.b_mean;
    const auto &cov0 = words ? s0.x_cov : s0.b_cov;
    const auto &cov1 = words ? s.x_cov : s.b_cov;
    double e = 0.0;
    for (Eigen::Index i = 0; i < mean0.cols(); ++i) {
      VectorXd theta(k + k * (k + 1) / 2);
      theta << mean0.col(i), pack_cov(cov0[i]);
      auto objective = [&](const VectorXd &p) {
        Factors f = f0;
        MatrixXd &m = words ? f.x_mean : f.b_mean;
        auto &c = words ? f.x_cov : f.b_cov;
        m.col(i) = p.head(k);
        c[i] = unpack_cov(p.tail(p.size() - k), k);
        return naive_elbo(f, data, h, &moments);
      };
      const VectorXd best = maximize(objective, theta);
      e = std::max(e, (best.head(k) - mean1.col(i)).cwiseAbs().maxCoeff());
      e = std::max(e, (unpack_cov(best.tail(best.size() - k), k) - cov1[i]).cwiseAbs().maxCoeff());
    }
    return e;
  };
  err.x = gaussian_side(true);
  err.b = gaussian_side(false);

  auto gamma_side = [&](bool words) {
    auto s = s0;
    vb::update_ard(s, h);
    VectorXd theta(k + 1);
    theta[0] = std::log(words ? s0.c_x : s0.c_b);
    theta.tail(k) = (words ? s0.d_x : s0.d_b).array().log();
    auto objective = [&](const VectorXd &p) {
      Factors f = f0;
      (words ? f.c_x : f.c_b) = std::exp(p[0]);
      (words ? f.d_x : f.d_b) = p.tail(k).array().exp();
      return naive_elbo(f, data, h, &moments);
    };
    const VectorXd best = maximize(objective, theta);
    const double c1 = words ? s.c_x : s.c_b;
    const VectorXd d1 = words ? s.d_x : s.d_b;
    double e = std::abs(std::exp(best[0]) - c1) / c1;
    for (int r = 0; r < k; ++r) e = std::max(e, std::abs(std::exp(best[1 + r]) - d1[r]) / d1[r]);
    return e;
  };
  err.alpha_x = gamma_side(true);
  err.alpha_b = gamma_side(false);
  return err;
}

// A tiny instance (I, J <= 3, K <= 2, <= 8 triples) at a generic point of
// the variational parameter space.
struct TinyInstance {
  bwe::CooccurrenceSet data;
  bwe::vb::Hyperparameters hyper;
  bwe::vb::VariationalState state;
};

inline TinyInstance tiny_instance(std::uint64_t seed) {
  namespace vb = bwe::vb;
  Rng rng(seed);
  std::uniform_int_distribution<int> dim(1, 3), kk(1, 2), nt(1, 8);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  const auto words = static_cast<std::size_t>(dim(rng));
  const auto contexts = static_cast<std::size_t>(dim(rng));
  TinyInstance inst;
  inst.data = random_triples(rng, words, contexts, static_cast<std::size_t>(nt(rng)));
  inst.hyper.k = kk(rng);
  inst.hyper.c_x0 = inst.hyper.d_x0 = seed % 2 ? 1e-3 : 1.0;
  inst.hyper.c_b0 = inst.hyper.d_b0 = seed % 2 ? 1e-3 : 0.5;
  inst.hyper.seed = seed;
  auto &s = inst.state;
  s = vb::init_state(inst.hyper, words, contexts);
  const int k = inst.hyper.k;
  auto random_cov = [&] {
    MatrixXd a(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) a(r, c) = 0.4 * normal(rng);
    return MatrixXd(a * a.transpose() + 0.2 * MatrixXd::Identity(k, k));
  };
  for (Eigen::Index i = 0; i < s.x_mean.cols(); ++i) {
    for (int r = 0; r < k; ++r) s.x_mean(r, i) = normal(rng);
    s.x_cov[static_cast<std::size_t>(i)] = random_cov();
  }
  for (Eigen::Index j = 0; j < s.b_mean.cols(); ++j) {
    for (int r = 0; r < k; ++r) s.b_mean(r, j) = normal(rng);
    s.b_cov[static_cast<std::size_t>(j)] = random_cov();
  }
  s.c_x = 1.0 + unif(rng);
  s.c_b = 1.0 + unif(rng);
  for (int r = 0; r < k; ++r) {
    s.d_x[r] = unif(rng);
    s.d_b[r] = unif(rng);
  }
  s.alpha_x = s.c_x / s.d_x.array();
  s.alpha_b = s.c_b / s.d_b.array();
  vb::update_z(s, vb::ObservationIndex(inst.data, words, contexts));
  return inst;
}

// ---- files ------------------------------------------------------------------------

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string &name) {
    path = std::filesystem::temp_directory_path() / ("bwe_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string &name) const { return path / name; }
};

} // namespace oracle
