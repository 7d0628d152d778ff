#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "bwe/corpus.hpp"

// Mean-field variational inference for the probit co-occurrence model
//
//   y_t = 1[z_t > 0],  z_t ~ N(x_i' b_j, 1)
//   x_i ~ N(0, diag(alpha_x)^-1),  b_j ~ N(0, diag(alpha_b)^-1)
//   alpha_xk ~ Gamma(c_x0, d_x0),  alpha_bk ~ Gamma(c_b0, d_b0)   (shape, rate)
//
// with q(z_t) unit-variance truncated normal, q(x_i), q(b_j) multivariate
// normal and q(alpha) Gamma.
namespace bwe::vb {

struct Hyperparameters {
  int k = 50;
  double c_x0 = 1e-3;
  double d_x0 = 1e-3;
  double c_b0 = 1e-3;
  double d_b0 = 1e-3;
  int max_iters = 200;
  double elbo_tol = 1e-6;
  std::uint64_t seed = 0;
  // Adds sum_i Cov[x_i](k,k) / 2 to the Gamma rate update, which makes it
  // the exact coordinate maximizer of the ELBO. With false the rate uses the
  // squared means only; that update can lower the ELBO.
  bool ard_with_trace = true;
};

void validate(const Hyperparameters &hyper);

// Triples grouped into distinct (word, context) cells. All triples in a
// cell share the same z location, so only the label counts matter.
class ObservationIndex {
public:
  struct Cell {
    WordId word;
    WordId context;
    std::uint32_t n_pos;
    std::uint32_t n_neg;
  };

  explicit ObservationIndex(const CooccurrenceSet &data);
  ObservationIndex(const CooccurrenceSet &data, std::size_t num_words, std::size_t num_contexts);

  std::size_t num_words() const { return word_offsets_.size() - 1; }
  std::size_t num_contexts() const { return context_offsets_.size() - 1; }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_triples() const { return triple_cell_.size(); }
  const std::vector<Cell> &cells() const { return cells_; }

  // Cells of word i are cells()[word_begin(i) .. word_begin(i+1)), ordered
  // by context.
  std::size_t word_begin(std::size_t i) const { return word_offsets_[i]; }
  // Cells of context j are by_context()[context_begin(j) .. context_begin(j+1)),
  // ordered by word.
  std::size_t context_begin(std::size_t j) const { return context_offsets_[j]; }
  const std::vector<std::uint32_t> &by_context() const { return by_context_; }

  std::uint32_t cell_of_triple(std::size_t t) const { return triple_cell_[t]; }
  std::uint8_t label_of_triple(std::size_t t) const { return triple_label_[t]; }

private:
  void build(const CooccurrenceSet &data, std::size_t num_words, std::size_t num_contexts);

  std::vector<Cell> cells_;
  std::vector<std::size_t> word_offsets_;
  std::vector<std::size_t> context_offsets_;
  std::vector<std::uint32_t> by_context_;
  std::vector<std::uint32_t> triple_cell_;
  std::vector<std::uint8_t> triple_label_;
};

struct VariationalState {
  Eigen::MatrixXd x_mean;             // K x I
  std::vector<Eigen::MatrixXd> x_cov; // I matrices, K x K
  Eigen::MatrixXd b_mean;             // K x J
  std::vector<Eigen::MatrixXd> b_cov; // J matrices, K x K

  // Per cell: truncation location z* = E[x_i]'E[b_j] and the truncated
  // means for y = 1 and y = 0.
  Eigen::VectorXd z_star;
  Eigen::VectorXd z_pos;
  Eigen::VectorXd z_neg;

  // q(alpha_k) = Gamma(c, d_k); alpha_* holds the expectations c / d_k.
  double c_x = 0.0;
  double c_b = 0.0;
  Eigen::VectorXd d_x;
  Eigen::VectorXd d_b;
  Eigen::VectorXd alpha_x;
  Eigen::VectorXd alpha_b;

  std::vector<double> elbo_history;
  int iterations = 0;
  bool converged = false;

  int k() const { return static_cast<int>(x_mean.rows()); }
  std::size_t num_words() const { return static_cast<std::size_t>(x_mean.cols()); }
  std::size_t num_contexts() const { return static_cast<std::size_t>(b_mean.cols()); }
};

VariationalState init_state(const Hyperparameters &hyper, std::size_t num_words,
                            std::size_t num_contexts);

// Expands the per-cell truncated means to one value per triple, in triple
// order.
Eigen::VectorXd triple_z_means(const VariationalState &state, const ObservationIndex &index);

void update_z(VariationalState &state, const ObservationIndex &index);
void update_word_embeddings(VariationalState &state, const ObservationIndex &index);
void update_context_embeddings(VariationalState &state, const ObservationIndex &index);
void update_ard(VariationalState &state, const Hyperparameters &hyper);

struct ElboTerms {
  double likelihood = 0.0; // E[log p(y, z | x, b)] + H[q(z)]
  double word_prior = 0.0; // E[log p(x | alpha_x)] + H[q(x)]
  double context_prior = 0.0;
  double word_ard = 0.0;   // E[log p(alpha_x)] + H[q(alpha_x)]
  double context_ard = 0.0;
  double total() const { return likelihood + word_prior + context_prior + word_ard + context_ard; }
};

ElboTerms elbo_terms(const VariationalState &state, const ObservationIndex &index,
                     const Hyperparameters &hyper);
double compute_elbo(const VariationalState &state, const ObservationIndex &index,
                    const Hyperparameters &hyper);

// One full sweep z -> x -> b -> alpha, then appends the ELBO.
double sweep(VariationalState &state, const ObservationIndex &index, const Hyperparameters &hyper);

using ProgressCallback = std::function<void(int iteration, double elbo, double rel_change)>;

// Runs sweeps until the relative ELBO change drops below elbo_tol or the
// state has done max_iters sweeps. Continues from `state` as given.
void run(VariationalState &state, const ObservationIndex &index, const Hyperparameters &hyper,
         const ProgressCallback &progress = {});

VariationalState fit(const CooccurrenceSet &data, const Hyperparameters &hyper,
                     const ProgressCallback &progress = {});

// ---- files ---------------------------------------------------------------

// Header "word", "dim0".."dim{K-1}"; one row per word.
void write_embeddings_tsv(const std::filesystem::path &path, const Eigen::MatrixXd &means,
                          const std::vector<std::string> &words);
struct EmbeddingTable {
  std::vector<std::string> words;
  Eigen::MatrixXd means; // K x I
};
EmbeddingTable read_embeddings_tsv(const std::filesystem::path &path);

void write_alpha_tsv(const std::filesystem::path &path, const VariationalState &state);
void write_elbo_csv(const std::filesystem::path &path, const std::vector<double> &history);

// "BWESTATE1" dump of every state field, little-endian.
std::string serialize_state(const VariationalState &state);
VariationalState deserialize_state(std::string_view bytes, const std::string &where = "state");
void write_state(const std::filesystem::path &path, const VariationalState &state);
VariationalState read_state(const std::filesystem::path &path);

} // namespace bwe::vb
