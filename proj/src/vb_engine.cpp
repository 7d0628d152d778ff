#include "bwe/vb_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/digamma.hpp>

#include "bwe/error.hpp"
#include "bwe/rng.hpp"
#include "bwe/truncnorm.hpp"

namespace bwe::vb {
namespace {

constexpr double kInitScale = 0.1;

// Runs body(i) for i in [0, n). Iterations must be independent; each one
// writes only its own outputs, so the result does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, Body &&body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

// E[v v'] for every column, as Cov + mean mean'.
std::vector<Eigen::MatrixXd> second_moments(const Eigen::MatrixXd &mean,
                                            const std::vector<Eigen::MatrixXd> &cov) {
  std::vector<Eigen::MatrixXd> out(cov.size());
  parallel_for(cov.size(), [&](std::size_t i) {
    out[i] = cov[i];
    out[i].noalias() += mean.col(static_cast<Eigen::Index>(i)) *
                        mean.col(static_cast<Eigen::Index>(i)).transpose();
  });
  return out;
}

void check_dimensions(const VariationalState &state, const ObservationIndex &index) {
  if (state.num_words() != index.num_words() || state.num_contexts() != index.num_contexts())
    throw DimensionMismatchError("state has " + std::to_string(state.num_words()) + " words and " +
                                 std::to_string(state.num_contexts()) + " contexts, data has " +
                                 std::to_string(index.num_words()) + " and " +
                                 std::to_string(index.num_contexts()));
}

void check_z(const VariationalState &state, const ObservationIndex &index) {
  if (static_cast<std::size_t>(state.z_star.size()) != index.num_cells())
    throw InputError("truncated-normal factors are not initialized; run update_z first");
}

// Solves one Gaussian factor: cov = precision^-1, mean = precision^-1 rhs.
void solve_factor(const Eigen::MatrixXd &precision, const Eigen::VectorXd &rhs,
                  Eigen::Ref<Eigen::VectorXd> mean, Eigen::MatrixXd &cov, bool &failed) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    failed = true;
    return;
  }
  mean = llt.solve(rhs);
  const auto k = precision.rows();
  cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  cov = 0.5 * (cov + cov.transpose()).eval();
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense products win once most word/context pairs carry observations, which
// negative sampling makes typical for vocabularies of a few thousand words.
bool use_dense(const ObservationIndex &index) {
  const double full = static_cast<double>(index.num_words()) * static_cast<double>(index.num_contexts());
  return full <= 2.5e7 && static_cast<double>(index.num_cells()) >= 0.05 * full;
}

// I x J matrix with value(cell, c) at each observed (word, context).
template <typename Value>
Eigen::MatrixXd cell_matrix(const ObservationIndex &index, Value &&value) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(index.num_words()),
                                              static_cast<Eigen::Index>(index.num_contexts()));
  const auto &cells = index.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) out(cells[c].word, cells[c].context) = value(cells[c], c);
  return out;
}

Eigen::MatrixXd count_matrix(const ObservationIndex &index) {
  return cell_matrix(index, [](const ObservationIndex::Cell &cell, std::size_t) {
    return static_cast<double>(cell.n_pos) + static_cast<double>(cell.n_neg);
  });
}

Eigen::MatrixXd z_sum_matrix(const VariationalState &state, const ObservationIndex &index) {
  return cell_matrix(index, [&](const ObservationIndex::Cell &cell, std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    return cell.n_pos * state.z_pos[ci] + cell.n_neg * state.z_neg[ci];
  });
}

// Row r holds E[v_r v_r'] flattened column-major.
RowMatrix stacked_moments(const Eigen::MatrixXd &mean, const std::vector<Eigen::MatrixXd> &cov) {
  const auto k = mean.rows();
  RowMatrix out(static_cast<Eigen::Index>(cov.size()), k * k);
  parallel_for(cov.size(), [&](std::size_t r) {
    Eigen::Map<Eigen::MatrixXd> m(out.row(static_cast<Eigen::Index>(r)).data(), k, k);
    m = cov[r];
    m.noalias() += mean.col(static_cast<Eigen::Index>(r)) * mean.col(static_cast<Eigen::Index>(r)).transpose();
  });
  return out;
}

// Factor r gets precision diag(alpha) + quad_r and linear term lin_r.
bool solve_factors(const Eigen::VectorXd &alpha, const RowMatrix &quad, const Eigen::MatrixXd &lin,
                   Eigen::MatrixXd &mean, std::vector<Eigen::MatrixXd> &cov) {
  const auto k = alpha.size();
  std::atomic<bool> failed{false};
  parallel_for(cov.size(), [&](std::size_t r) {
    const auto ri = static_cast<Eigen::Index>(r);
    Eigen::MatrixXd precision = Eigen::Map<const Eigen::MatrixXd>(quad.row(ri).data(), k, k);
    precision.diagonal() += alpha;
    bool bad = false;
    solve_factor(precision, lin.row(ri).transpose(), mean.col(ri), cov[r], bad);
    if (bad) failed = true;
  });
  return !failed;
}

double log_det_spd(const Eigen::MatrixXd &m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// E[log N(v | 0, diag(alpha)^-1)] + H[N(mean, cov)], summed over columns.
double gaussian_prior_terms(const Eigen::MatrixXd &mean, const std::vector<Eigen::MatrixXd> &cov,
                            double c, const Eigen::VectorXd &d, const Eigen::VectorXd &alpha) {
  const auto k = mean.rows();
  const double psi_c = boost::math::digamma(c);
  const double e_log_alpha_sum = (psi_c - d.array().log()).sum();
  std::vector<double> per_col(cov.size());
  parallel_for(cov.size(), [&](std::size_t i) {
    const auto col = mean.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd second = col.array().square() + cov[i].diagonal().array();
    per_col[i] = 0.5 * static_cast<double>(k) + 0.5 * log_det_spd(cov[i]) +
                 0.5 * e_log_alpha_sum - 0.5 * alpha.dot(second);
  });
  return std::accumulate(per_col.begin(), per_col.end(), 0.0);
}

// E[log Gamma(alpha | c0, d0)] + H[Gamma(c, d_k)], summed over k.
double gamma_terms(double c0, double d0, double c, const Eigen::VectorXd &d) {
  const double psi_c = boost::math::digamma(c);
  const double lgamma_c = std::lgamma(c);
  double total = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double log_d = std::log(d[k]);
    const double e_log_alpha = psi_c - log_d;
    const double e_alpha = c / d[k];
    total += c0 * std::log(d0) - std::lgamma(c0) + (c0 - 1.0) * e_log_alpha - d0 * e_alpha;
    total += c - log_d + lgamma_c + (1.0 - c) * psi_c;
  }
  return total;
}

} // namespace

void validate(const Hyperparameters &hyper) {
  if (hyper.k < 1) throw InputError("K must be >= 1");
  for (double v : {hyper.c_x0, hyper.d_x0, hyper.c_b0, hyper.d_b0})
    if (!(v > 0.0) || !std::isfinite(v))
      throw InputError("Gamma hyperparameters must be positive and finite");
  if (!(hyper.elbo_tol > 0.0)) throw InputError("elbo_tol must be positive");
  if (hyper.max_iters < 0) throw InputError("max_iters must be >= 0");
}

// ---- ObservationIndex ------------------------------------------------------

ObservationIndex::ObservationIndex(const CooccurrenceSet &data) {
  build(data, data.vocab_size, data.vocab_size);
}

ObservationIndex::ObservationIndex(const CooccurrenceSet &data, std::size_t num_words,
                                   std::size_t num_contexts) {
  build(data, num_words, num_contexts);
}

void ObservationIndex::build(const CooccurrenceSet &data, std::size_t num_words,
                             std::size_t num_contexts) {
  const auto &triples = data.triples;
  for (const auto &t : triples) {
    if (t.word >= num_words || t.context >= num_contexts)
      throw DimensionMismatchError("triple index outside [0, I) x [0, J)");
    if (t.label > 1) throw InputError("triple label must be 0 or 1");
  }

  // Sort triple ids by (word, context); ties keep triple order.
  std::vector<std::uint32_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto &ta = triples[a];
    const auto &tb = triples[b];
    return ta.word != tb.word ? ta.word < tb.word : ta.context < tb.context;
  });

  triple_cell_.assign(triples.size(), 0);
  triple_label_.resize(triples.size());
  for (std::size_t t = 0; t < triples.size(); ++t) triple_label_[t] = triples[t].label;
  for (std::uint32_t id : order) {
    const auto &t = triples[id];
    if (cells_.empty() || cells_.back().word != t.word || cells_.back().context != t.context)
      cells_.push_back({t.word, t.context, 0, 0});
    auto &cell = cells_.back();
    (t.label ? cell.n_pos : cell.n_neg) += 1;
    triple_cell_[id] = static_cast<std::uint32_t>(cells_.size() - 1);
  }

  word_offsets_.assign(num_words + 1, 0);
  context_offsets_.assign(num_contexts + 1, 0);
  for (const auto &c : cells_) {
    ++word_offsets_[c.word + 1];
    ++context_offsets_[c.context + 1];
  }
  std::partial_sum(word_offsets_.begin(), word_offsets_.end(), word_offsets_.begin());
  std::partial_sum(context_offsets_.begin(), context_offsets_.end(), context_offsets_.begin());

  // Counting sort by context; cells are already in word order.
  by_context_.assign(cells_.size(), 0);
  std::vector<std::size_t> fill(context_offsets_.begin(), context_offsets_.end() - 1);
  for (std::uint32_t c = 0; c < cells_.size(); ++c)
    by_context_[fill[cells_[c].context]++] = c;
}

// ---- state -----------------------------------------------------------------

VariationalState init_state(const Hyperparameters &hyper, std::size_t num_words,
                            std::size_t num_contexts) {
  validate(hyper);
  if (num_words < 1 || num_contexts < 1) throw InputError("I and J must be >= 1");
  const Eigen::Index k = hyper.k;
  VariationalState state;
  CounterRng rng(substream_seed(hyper.seed, "init"), 0);
  state.x_mean.resize(k, static_cast<Eigen::Index>(num_words));
  for (Eigen::Index i = 0; i < state.x_mean.cols(); ++i)
    for (Eigen::Index r = 0; r < k; ++r) state.x_mean(r, i) = kInitScale * rng.normal();
  state.b_mean.resize(k, static_cast<Eigen::Index>(num_contexts));
  for (Eigen::Index j = 0; j < state.b_mean.cols(); ++j)
    for (Eigen::Index r = 0; r < k; ++r) state.b_mean(r, j) = kInitScale * rng.normal();

  const Eigen::MatrixXd cov0 = kInitScale * kInitScale * Eigen::MatrixXd::Identity(k, k);
  state.x_cov.assign(num_words, cov0);
  state.b_cov.assign(num_contexts, cov0);

  state.c_x = hyper.c_x0;
  state.c_b = hyper.c_b0;
  state.d_x = Eigen::VectorXd::Constant(k, hyper.d_x0);
  state.d_b = Eigen::VectorXd::Constant(k, hyper.d_b0);
  state.alpha_x = Eigen::VectorXd::Constant(k, hyper.c_x0 / hyper.d_x0);
  state.alpha_b = Eigen::VectorXd::Constant(k, hyper.c_b0 / hyper.d_b0);
  return state;
}

Eigen::VectorXd triple_z_means(const VariationalState &state, const ObservationIndex &index) {
  check_z(state, index);
  Eigen::VectorXd out(static_cast<Eigen::Index>(index.num_triples()));
  for (std::size_t t = 0; t < index.num_triples(); ++t) {
    const auto c = index.cell_of_triple(t);
    out[static_cast<Eigen::Index>(t)] = index.label_of_triple(t) ? state.z_pos[c] : state.z_neg[c];
  }
  return out;
}

// ---- coordinate updates ----------------------------------------------------

void update_z(VariationalState &state, const ObservationIndex &index) {
  check_dimensions(state, index);
  const auto &cells = index.cells();
  const auto n = static_cast<Eigen::Index>(cells.size());
  state.z_star.resize(n);
  state.z_pos.resize(n);
  state.z_neg.resize(n);
  std::atomic<bool> bad{false};
  parallel_for(cells.size(), [&](std::size_t c) {
    const double m = state.x_mean.col(cells[c].word).dot(state.b_mean.col(cells[c].context));
    const double pos = truncated_normal_mean(m, true);
    const double neg = truncated_normal_mean(m, false);
    state.z_star[static_cast<Eigen::Index>(c)] = m;
    state.z_pos[static_cast<Eigen::Index>(c)] = pos;
    state.z_neg[static_cast<Eigen::Index>(c)] = neg;
    if (!std::isfinite(m) || !std::isfinite(pos) || !std::isfinite(neg)) bad = true;
  });
  if (bad) throw NonFiniteError("non-finite truncated-normal mean");
}

void update_word_embeddings(VariationalState &state, const ObservationIndex &index) {
  check_dimensions(state, index);
  check_z(state, index);
  if (use_dense(index)) {
    const RowMatrix quad = count_matrix(index) * stacked_moments(state.b_mean, state.b_cov);
    const Eigen::MatrixXd lin = z_sum_matrix(state, index) * state.b_mean.transpose();
    if (!solve_factors(state.alpha_x, quad, lin, state.x_mean, state.x_cov))
      throw NumericalError("word precision matrix is not positive definite");
    return;
  }
  const auto k = state.k();
  const auto moments = second_moments(state.b_mean, state.b_cov);
  const auto &cells = index.cells();
  std::atomic<bool> failed{false};
  parallel_for(state.num_words(), [&](std::size_t i) {
    Eigen::MatrixXd precision = state.alpha_x.asDiagonal();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (std::size_t c = index.word_begin(i); c < index.word_begin(i + 1); ++c) {
      const auto &cell = cells[c];
      const double n = static_cast<double>(cell.n_pos) + static_cast<double>(cell.n_neg);
      precision.noalias() += n * moments[cell.context];
      const double z_sum = cell.n_pos * state.z_pos[static_cast<Eigen::Index>(c)] +
                           cell.n_neg * state.z_neg[static_cast<Eigen::Index>(c)];
      rhs.noalias() += z_sum * state.b_mean.col(cell.context);
    }
    bool bad = false;
    solve_factor(precision, rhs, state.x_mean.col(static_cast<Eigen::Index>(i)), state.x_cov[i],
                 bad);
    if (bad) failed = true;
  });
  if (failed) throw NumericalError("word precision matrix is not positive definite");
}

namespace {

// Dense path only: keeps sum_i n_ij E[x_i x_i'] per context, which the ELBO
// reuses as long as the word factors do not change in between.
void update_contexts(VariationalState &state, const ObservationIndex &index, RowMatrix *context_quad) {
  check_dimensions(state, index);
  check_z(state, index);
  if (use_dense(index)) {
    RowMatrix quad = count_matrix(index).transpose() * stacked_moments(state.x_mean, state.x_cov);
    const Eigen::MatrixXd lin = z_sum_matrix(state, index).transpose() * state.x_mean.transpose();
    if (!solve_factors(state.alpha_b, quad, lin, state.b_mean, state.b_cov))
      throw NumericalError("context precision matrix is not positive definite");
    if (context_quad) *context_quad = std::move(quad);
    return;
  }
  const auto k = state.k();
  const auto moments = second_moments(state.x_mean, state.x_cov);
  const auto &cells = index.cells();
  const auto &order = index.by_context();
  std::atomic<bool> failed{false};
  parallel_for(state.num_contexts(), [&](std::size_t j) {
    Eigen::MatrixXd precision = state.alpha_b.asDiagonal();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (std::size_t p = index.context_begin(j); p < index.context_begin(j + 1); ++p) {
      const auto c = order[p];
      const auto &cell = cells[c];
      const double n = static_cast<double>(cell.n_pos) + static_cast<double>(cell.n_neg);
      precision.noalias() += n * moments[cell.word];
      const double z_sum = cell.n_pos * state.z_pos[c] + cell.n_neg * state.z_neg[c];
      rhs.noalias() += z_sum * state.x_mean.col(cell.word);
    }
    bool bad = false;
    solve_factor(precision, rhs, state.b_mean.col(static_cast<Eigen::Index>(j)), state.b_cov[j],
                 bad);
    if (bad) failed = true;
  });
  if (failed) throw NumericalError("context precision matrix is not positive definite");
}

} // namespace

void update_context_embeddings(VariationalState &state, const ObservationIndex &index) {
  update_contexts(state, index, nullptr);
}

void update_ard(VariationalState &state, const Hyperparameters &hyper) {
  const auto k = state.k();
  const auto update_side = [&](const Eigen::MatrixXd &mean, const std::vector<Eigen::MatrixXd> &cov,
                               double c0, double d0, double &c, Eigen::VectorXd &d,
                               Eigen::VectorXd &alpha) {
    c = c0 + 0.5 * static_cast<double>(mean.cols());
    d = (d0 + 0.5 * mean.rowwise().squaredNorm().array()).matrix();
    if (hyper.ard_with_trace) {
      Eigen::VectorXd trace = Eigen::VectorXd::Zero(k);
      for (const auto &s : cov) trace += s.diagonal();
      d += 0.5 * trace;
    }
    alpha = (c / d.array()).matrix();
  };
  update_side(state.x_mean, state.x_cov, hyper.c_x0, hyper.d_x0, state.c_x, state.d_x,
              state.alpha_x);
  update_side(state.b_mean, state.b_cov, hyper.c_b0, hyper.d_b0, state.c_b, state.d_b,
              state.alpha_b);
}

// ---- ELBO ------------------------------------------------------------------
//
// L = sum_t { E[z_t] (mu_i'nu_j - z*_t) + z*_t^2 / 2 + log P_t - E[(x_i'b_j)^2] / 2 }
//   + sum_i { K/2 + log|S_i|/2 + sum_k [ (psi(c) - log d_k) / 2 - E[alpha_k] E[x_ik^2] / 2 ] }
//   + (same for b_j)
//   + sum_k { E[log Gamma(alpha_k | c0, d0)] + H[Gamma(c, d_k)] }  (both sides)
//
// where P_t = Phi(z*_t) for y = 1 and Phi(-z*_t) for y = 0, z*_t is the
// location q(z_t) was built with, and E[(x'b)^2] = <E[xx'], E[bb']>_F. The
// first line is E[log N(z | x'b, 1)] - E[log q(z)]; the 2*pi constants cancel.

namespace {

ElboTerms elbo_terms_with(const VariationalState &state, const ObservationIndex &index,
                          const Hyperparameters &hyper, const RowMatrix *context_quad) {
  check_dimensions(state, index);
  check_z(state, index);
  ElboTerms terms;

  const bool dense = use_dense(index);
  std::vector<Eigen::MatrixXd> x_moments, b_moments;
  double quadratic = 0.0; // sum over cells of n * E[(x'b)^2]
  if (dense) {
    const RowMatrix sb = stacked_moments(state.b_mean, state.b_cov);
    if (context_quad) {
      quadratic = sb.cwiseProduct(*context_quad).sum();
    } else {
      const RowMatrix weighted = count_matrix(index).transpose() * stacked_moments(state.x_mean, state.x_cov);
      quadratic = sb.cwiseProduct(weighted).sum();
    }
  } else {
    x_moments = second_moments(state.x_mean, state.x_cov);
    b_moments = second_moments(state.b_mean, state.b_cov);
  }
  const auto &cells = index.cells();
  std::vector<double> per_word(state.num_words(), 0.0);
  parallel_for(state.num_words(), [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t c = index.word_begin(i); c < index.word_begin(i + 1); ++c) {
      const auto &cell = cells[c];
      const auto ci = static_cast<Eigen::Index>(c);
      const double loc = state.z_star[ci];
      const double mean_dot = state.x_mean.col(cell.word).dot(state.b_mean.col(cell.context));
      const double sq =
          dense ? 0.0 : x_moments[cell.word].cwiseProduct(b_moments[cell.context]).sum();
      double cell_total = 0.0;
      if (cell.n_pos > 0) {
        const double ez = state.z_pos[ci];
        cell_total += cell.n_pos * (ez * (mean_dot - loc) + 0.5 * loc * loc +
                                    log_normal_cdf(loc) - 0.5 * sq);
      }
      if (cell.n_neg > 0) {
        const double ez = state.z_neg[ci];
        cell_total += cell.n_neg * (ez * (mean_dot - loc) + 0.5 * loc * loc +
                                    log_normal_cdf(-loc) - 0.5 * sq);
      }
      acc += cell_total;
    }
    per_word[i] = acc;
  });
  terms.likelihood = std::accumulate(per_word.begin(), per_word.end(), 0.0) - 0.5 * quadratic;

  terms.word_prior =
      gaussian_prior_terms(state.x_mean, state.x_cov, state.c_x, state.d_x, state.alpha_x);
  terms.context_prior =
      gaussian_prior_terms(state.b_mean, state.b_cov, state.c_b, state.d_b, state.alpha_b);
  terms.word_ard = gamma_terms(hyper.c_x0, hyper.d_x0, state.c_x, state.d_x);
  terms.context_ard = gamma_terms(hyper.c_b0, hyper.d_b0, state.c_b, state.d_b);

  if (!std::isfinite(terms.total())) throw NonFiniteError("ELBO is not finite");
  return terms;
}

} // namespace

ElboTerms elbo_terms(const VariationalState &state, const ObservationIndex &index,
                     const Hyperparameters &hyper) {
  return elbo_terms_with(state, index, hyper, nullptr);
}

double compute_elbo(const VariationalState &state, const ObservationIndex &index,
                    const Hyperparameters &hyper) {
  return elbo_terms(state, index, hyper).total();
}

double sweep(VariationalState &state, const ObservationIndex &index, const Hyperparameters &hyper) {
  update_z(state, index);
  update_word_embeddings(state, index);
  RowMatrix context_quad;
  update_contexts(state, index, &context_quad);
  update_ard(state, hyper);
  const double elbo =
      elbo_terms_with(state, index, hyper, context_quad.size() > 0 ? &context_quad : nullptr).total();
  state.elbo_history.push_back(elbo);
  ++state.iterations;
  return elbo;
}

void run(VariationalState &state, const ObservationIndex &index, const Hyperparameters &hyper,
         const ProgressCallback &progress) {
  validate(hyper);
  if (state.k() != hyper.k) throw DimensionMismatchError("state K differs from hyperparameters");
  state.converged = false;
  while (state.iterations < hyper.max_iters) {
    const double elbo = sweep(state, index, hyper);
    double rel = std::numeric_limits<double>::quiet_NaN();
    const auto &h = state.elbo_history;
    if (h.size() >= 2) rel = std::abs(h.back() - h[h.size() - 2]) / std::abs(h[h.size() - 2]);
    if (progress) progress(state.iterations, elbo, rel);
    if (h.size() >= 2 && rel < hyper.elbo_tol) {
      state.converged = true;
      break;
    }
  }
}

VariationalState fit(const CooccurrenceSet &data, const Hyperparameters &hyper,
                     const ProgressCallback &progress) {
  if (data.triples.empty()) throw InputError("no observations to fit");
  ObservationIndex index(data);
  VariationalState state = init_state(hyper, index.num_words(), index.num_contexts());
  run(state, index, hyper, progress);
  return state;
}

} // namespace bwe::vb
