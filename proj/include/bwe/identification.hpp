#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bwe/corpus.hpp"

// Identification of the latent space: anchor words are mapped to fixed
// target coordinates by an affine transform, which is then applied to the
// whole vocabulary.
namespace bwe::ident {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double cosine_similarity(const Eigen::Ref<const VectorXd> &u, const Eigen::Ref<const VectorXd> &v);

enum class DissimilarityRule {
  MinMax, // minimize the largest cosine to any chosen anchor
  MinSum, // minimize the summed cosine to the chosen anchors
};

struct SelectionOptions {
  DissimilarityRule rule = DissimilarityRule::MinMax;
  // Skip a candidate that would leave the anchor set affinely dependent
  // while fewer than K+1 anchors are chosen.
  bool require_affine_independence = true;
};

// Greedily picks `needed` words, each the one least cosine-similar to the
// anchors chosen so far (existing + previously picked). Ties go to the lower
// index; zero vectors are never picked.
std::vector<WordId> select_auto_anchors(const MatrixXd &embeddings,
                                        std::span<const WordId> existing, std::size_t needed,
                                        const SelectionOptions &options = {});

struct AnchorPair {
  std::string positive;
  std::string negative;
  int dim = 0;
};

struct AutoAnchor {
  std::string word;
  int dim = 0;
};

// User pairs are placed at +1 / -1 on their dimension; every other
// dimension gets one auto anchor at +1. All other target coordinates are 0.
struct AnchorSpec {
  std::vector<AnchorPair> user_pairs;
  std::vector<AutoAnchor> auto_anchors;

  // Anchor words in order: pair positives and negatives, then auto anchors.
  std::vector<std::string> words() const;
  // K x n target matrix in the order of words().
  MatrixXd targets(int k) const;
  // Dimensions that have neither a user pair nor an auto anchor.
  std::vector<int> open_dimensions(int k) const;
};

// Checks the anchor spec against the vocabulary: known words, valid
// dimensions, no repeated word, at least K+1 anchors.
void validate_anchor_spec(const AnchorSpec &spec, const Vocabulary &vocab, int k);

// Fills every open dimension with an automatically selected anchor.
AnchorSpec complete_anchor_spec(const AnchorSpec &spec, const MatrixXd &embeddings,
                                const Vocabulary &vocab, const SelectionOptions &options = {});

struct AffineTransform {
  MatrixXd linear; // K x K
  VectorXd offset; // K

  MatrixXd apply(const MatrixXd &points) const;
  MatrixXd apply_inverse(const MatrixXd &points) const;
};

struct IdentifiedEmbedding {
  MatrixXd matrix; // K x I, transformed coordinates
  AffineTransform transform;
  double anchor_residual = 0.0;
  double condition_number = 0.0;
  std::vector<std::optional<std::pair<std::string, std::string>>> dimension_labels;
  AnchorSpec anchors;
};

struct AffineOptions {
  // Penalty lambda * |[M - I, t]|^2 added to the least-squares fit; 0 solves
  // exactly by QR.
  double ridge = 0.0;
  // Relative singular-value threshold for the rank and invertibility checks.
  double rank_tolerance = 1e-10;
};

// Least-squares fit of (M, t) minimizing sum_a |M x_a + t - target_a|^2,
// applied to every column. Exact when K+1 affinely independent anchors are
// given.
IdentifiedEmbedding solve_affine(const MatrixXd &embeddings, const Vocabulary &vocab,
                                 const AnchorSpec &spec, const AffineOptions &options = {});

struct DocumentScores {
  std::vector<std::string> doc_ids;
  VectorXd scores;
  std::vector<std::int64_t> n_tokens;
  std::vector<bool> empty; // documents with no retained tokens
  std::vector<Metadata> metadata;
  int dim = 0;
  bool normalized = false;
};

// score_d = sum_i dtm(d, i) * matrix(dim, i), divided by the row sum when
// normalize is set. Empty rows score 0 and are flagged.
DocumentScores score_documents(const MatrixXd &matrix, const DocumentTermMatrix &dtm, int dim,
                               bool normalize);

struct Neighbor {
  WordId word;
  double similarity;
};

std::vector<Neighbor> nearest_words(const MatrixXd &embeddings, WordId query, std::size_t n);

// ---- files ---------------------------------------------------------------

// Lines "pair<TAB>pos<TAB>neg<TAB>dim" and "auto<TAB>word<TAB>dim"; '#'
// starts a comment.
AnchorSpec read_anchor_spec(const std::filesystem::path &path);

void write_identified_metadata(const std::filesystem::path &path, const IdentifiedEmbedding &id);

// Columns doc_id, score, n_tokens, flags, then one column per metadata key
// (sorted).
void write_scores_csv(const std::filesystem::path &path, const DocumentScores &scores);
DocumentScores read_scores_csv(const std::filesystem::path &path);

} // namespace bwe::ident
