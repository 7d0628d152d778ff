#include "bwe/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "bwe/error.hpp"

namespace bwe::ident {
namespace {

Eigen::Index affine_rank(const MatrixXd &points, double tol) {
  if (points.cols() == 0) return 0;
  MatrixXd h(points.cols(), points.rows() + 1);
  h.leftCols(points.rows()) = points.transpose();
  h.col(points.rows()).setOnes();
  Eigen::JacobiSVD<MatrixXd> svd(h);
  const auto &s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > tol * s[0]) ++rank;
  return rank;
}

MatrixXd gather(const MatrixXd &embeddings, std::span<const WordId> ids) {
  MatrixXd out(embeddings.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t a = 0; a < ids.size(); ++a)
    out.col(static_cast<Eigen::Index>(a)) = embeddings.col(ids[a]);
  return out;
}

void check_dim(int dim, int k, const std::string &what) {
  if (dim < 0 || dim >= k)
    throw InputError(what + ": dimension " + std::to_string(dim) + " outside [0, " +
                     std::to_string(k) + ")");
}

} // namespace

double cosine_similarity(const Eigen::Ref<const VectorXd> &u, const Eigen::Ref<const VectorXd> &v) {
  if (u.size() != v.size()) throw DimensionMismatchError("cosine of vectors of unequal length");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw InputError("cosine similarity of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<WordId> select_auto_anchors(const MatrixXd &embeddings,
                                        std::span<const WordId> existing, std::size_t needed,
                                        const SelectionOptions &options) {
  const auto n_words = static_cast<std::size_t>(embeddings.cols());
  std::vector<bool> taken(n_words, false);
  for (WordId w : existing) {
    if (w >= n_words) throw DimensionMismatchError("anchor index outside the embedding");
    taken[w] = true;
  }
  const std::size_t n_existing =
      static_cast<std::size_t>(std::count(taken.begin(), taken.end(), true));
  if (needed > n_words - n_existing)
    throw InputError("insufficient vocabulary: need " + std::to_string(needed) +
                     " auto anchors but only " + std::to_string(n_words - n_existing) +
                     " words are free");
  if (needed == 0) return {};

  const VectorXd norms = embeddings.colwise().norm().transpose();
  MatrixXd unit = embeddings;
  for (Eigen::Index i = 0; i < unit.cols(); ++i)
    if (norms[i] > 0.0) unit.col(i) /= norms[i];

  const bool min_max = options.rule == DissimilarityRule::MinMax;
  VectorXd score = VectorXd::Constant(static_cast<Eigen::Index>(n_words),
                                      min_max ? -std::numeric_limits<double>::infinity() : 0.0);
  auto absorb = [&](WordId anchor) {
    if (norms[anchor] == 0.0) return;
    const VectorXd sims = unit.transpose() * unit.col(anchor);
    if (min_max)
      score = score.cwiseMax(sims);
    else
      score += sims;
  };

  std::vector<WordId> chosen(existing.begin(), existing.end());
  for (WordId w : existing) absorb(w);
  const auto full_rank = embeddings.rows() + 1;
  std::vector<WordId> picked;
  while (picked.size() < needed) {
    std::vector<WordId> candidates;
    for (WordId w = 0; w < n_words; ++w)
      if (!taken[w] && norms[w] > 0.0) candidates.push_back(w);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](WordId a, WordId b) { return score[a] < score[b]; });

    const Eigen::Index current_rank =
        options.require_affine_independence ? affine_rank(gather(embeddings, chosen), 1e-10) : 0;
    std::optional<WordId> pick;
    for (WordId w : candidates) {
      if (options.require_affine_independence && current_rank < full_rank) {
        chosen.push_back(w);
        const auto rank = affine_rank(gather(embeddings, chosen), 1e-10);
        chosen.pop_back();
        if (rank <= current_rank) continue;
      }
      pick = w;
      break;
    }
    if (!pick)
      throw InputError("insufficient vocabulary: no remaining word keeps the anchors affinely "
                       "independent");
    taken[*pick] = true;
    chosen.push_back(*pick);
    picked.push_back(*pick);
    absorb(*pick);
  }
  return picked;
}

std::vector<std::string> AnchorSpec::words() const {
  std::vector<std::string> out;
  for (const auto &p : user_pairs) {
    out.push_back(p.positive);
    out.push_back(p.negative);
  }
  for (const auto &a : auto_anchors) out.push_back(a.word);
  return out;
}

MatrixXd AnchorSpec::targets(int k) const {
  const auto n = static_cast<Eigen::Index>(2 * user_pairs.size() + auto_anchors.size());
  MatrixXd t = MatrixXd::Zero(k, n);
  Eigen::Index col = 0;
  for (const auto &p : user_pairs) {
    check_dim(p.dim, k, "anchor pair " + p.positive + "/" + p.negative);
    t(p.dim, col++) = 1.0;
    t(p.dim, col++) = -1.0;
  }
  for (const auto &a : auto_anchors) {
    check_dim(a.dim, k, "auto anchor " + a.word);
    t(a.dim, col++) = 1.0;
  }
  return t;
}

std::vector<int> AnchorSpec::open_dimensions(int k) const {
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (const auto &p : user_pairs)
    if (p.dim >= 0 && p.dim < k) used[static_cast<std::size_t>(p.dim)] = true;
  for (const auto &a : auto_anchors)
    if (a.dim >= 0 && a.dim < k) used[static_cast<std::size_t>(a.dim)] = true;
  std::vector<int> open;
  for (int d = 0; d < k; ++d)
    if (!used[static_cast<std::size_t>(d)]) open.push_back(d);
  return open;
}

void validate_anchor_spec(const AnchorSpec &spec, const Vocabulary &vocab, int k) {
  std::set<std::string> seen;
  for (const auto &w : spec.words()) {
    vocab.at(w);
    if (!seen.insert(w).second) throw InputError("anchor word used twice: '" + w + "'");
  }
  spec.targets(k); // dimension checks
  if (seen.size() < static_cast<std::size_t>(k) + 1)
    throw InputError("need at least K+1 = " + std::to_string(k + 1) + " anchors, have " +
                     std::to_string(seen.size()));
}

AnchorSpec complete_anchor_spec(const AnchorSpec &spec, const MatrixXd &embeddings,
                                const Vocabulary &vocab, const SelectionOptions &options) {
  const int k = static_cast<int>(embeddings.rows());
  std::vector<WordId> existing;
  for (const auto &w : spec.words()) existing.push_back(vocab.at(w));
  spec.targets(k);
  const auto open = spec.open_dimensions(k);
  const auto picked = select_auto_anchors(embeddings, existing, open.size(), options);
  AnchorSpec out = spec;
  for (std::size_t a = 0; a < picked.size(); ++a)
    out.auto_anchors.push_back({vocab.word(picked[a]), open[a]});
  return out;
}

MatrixXd AffineTransform::apply(const MatrixXd &points) const {
  return (linear * points).colwise() + offset;
}

MatrixXd AffineTransform::apply_inverse(const MatrixXd &points) const {
  return linear.partialPivLu().solve(points.colwise() - offset);
}

IdentifiedEmbedding solve_affine(const MatrixXd &embeddings, const Vocabulary &vocab,
                                 const AnchorSpec &spec, const AffineOptions &options) {
  const int k = static_cast<int>(embeddings.rows());
  if (static_cast<std::size_t>(embeddings.cols()) != vocab.size())
    throw DimensionMismatchError("embedding columns differ from vocabulary size");
  validate_anchor_spec(spec, vocab, k);

  const auto words = spec.words();
  std::vector<WordId> ids;
  for (const auto &w : words) ids.push_back(vocab.at(w));
  const MatrixXd sources = gather(embeddings, ids);
  const MatrixXd targets = spec.targets(k);
  const auto n = sources.cols();

  // Anchors that add nothing to the affine span of the ones before them.
  if (affine_rank(sources, options.rank_tolerance) < k + 1) {
    std::vector<std::string> offending;
    std::vector<WordId> prefix;
    Eigen::Index rank = 0;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      prefix.push_back(ids[a]);
      const auto r = affine_rank(gather(embeddings, prefix), options.rank_tolerance);
      if (r == rank) offending.push_back(words[a]);
      rank = r;
    }
    std::string list;
    for (const auto &w : offending) list += (list.empty() ? "" : ", ") + w;
    if (options.ridge == 0.0)
      throw RankDeficiencyError("anchor points are not affinely independent (dependent: " + list +
                                    "); choose other anchors or set a ridge",
                                offending);
  }

  // Rows [x_a', 1]; solve H W = T' for W = [M'; t'].
  MatrixXd h(n, k + 1);
  h.leftCols(k) = sources.transpose();
  h.col(k).setOnes();
  const MatrixXd rhs = targets.transpose();
  MatrixXd w;
  if (options.ridge > 0.0) {
    // Shrinks (M, t) toward the identity map so directions the anchors do
    // not span (e.g. dimensions pruned by ARD) are left unchanged.
    MatrixXd prior = MatrixXd::Zero(k + 1, k);
    prior.topRows(k).setIdentity();
    MatrixXd normal = h.transpose() * h;
    normal.diagonal().array() += options.ridge;
    w = normal.ldlt().solve(h.transpose() * rhs + options.ridge * prior);
  } else {
    w = h.colPivHouseholderQr().solve(rhs);
  }

  IdentifiedEmbedding out;
  out.transform.linear = w.topRows(k).transpose();
  out.transform.offset = w.row(k).transpose();
  Eigen::JacobiSVD<MatrixXd> svd(out.transform.linear);
  const auto &s = svd.singularValues();
  out.condition_number = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1]
                                               : std::numeric_limits<double>::infinity();
  if (!(s[s.size() - 1] > options.rank_tolerance * s[0]))
    throw NumericalError("fitted linear map is singular (condition number " +
                         std::to_string(out.condition_number) + ")");

  out.matrix = out.transform.apply(embeddings);
  const MatrixXd mapped = out.transform.apply(sources);
  out.anchor_residual = (mapped - targets).cwiseAbs().maxCoeff();
  out.dimension_labels.assign(static_cast<std::size_t>(k), std::nullopt);
  for (const auto &p : spec.user_pairs)
    out.dimension_labels[static_cast<std::size_t>(p.dim)] = std::make_pair(p.positive, p.negative);
  out.anchors = spec;
  return out;
}

DocumentScores score_documents(const MatrixXd &matrix, const DocumentTermMatrix &dtm, int dim,
                               bool normalize) {
  check_dim(dim, static_cast<int>(matrix.rows()), "score_documents");
  if (dtm.counts.cols() != matrix.cols())
    throw DimensionMismatchError("DTM has " + std::to_string(dtm.counts.cols()) +
                                 " columns, embedding has " + std::to_string(matrix.cols()) +
                                 " words");
  DocumentScores out;
  const auto n_docs = dtm.counts.rows();
  out.scores.resize(n_docs);
  out.dim = dim;
  out.normalized = normalize;
  out.doc_ids = dtm.doc_ids;
  out.metadata = dtm.doc_metadata;
  for (Eigen::Index d = 0; d < n_docs; ++d) {
    double s = 0.0;
    std::int64_t tokens = 0;
    for (DocumentTermMatrix::Storage::InnerIterator it(dtm.counts, d); it; ++it) {
      s += static_cast<double>(it.value()) * matrix(dim, it.col());
      tokens += it.value();
    }
    if (normalize && tokens > 0) s /= static_cast<double>(tokens);
    out.scores[d] = tokens > 0 ? s : 0.0;
    out.n_tokens.push_back(tokens);
    out.empty.push_back(tokens == 0);
  }
  return out;
}

std::vector<Neighbor> nearest_words(const MatrixXd &embeddings, WordId query, std::size_t n) {
  const auto n_words = static_cast<std::size_t>(embeddings.cols());
  if (query >= n_words) throw DimensionMismatchError("query index outside the embedding");
  if (n >= n_words)
    throw InputError("n must be smaller than the vocabulary size (" + std::to_string(n_words) + ")");
  const VectorXd q = embeddings.col(query);
  if (q.norm() == 0.0) throw InputError("query word has a zero embedding");

  std::vector<Neighbor> all;
  for (WordId w = 0; w < n_words; ++w) {
    if (w == query || embeddings.col(w).norm() == 0.0) continue;
    all.push_back({w, cosine_similarity(q, embeddings.col(w))});
  }
  const auto take = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Neighbor &a, const Neighbor &b) {
                      return a.similarity != b.similarity ? a.similarity > b.similarity
                                                          : a.word < b.word;
                    });
  all.resize(take);
  return all;
}

} // namespace bwe::ident
