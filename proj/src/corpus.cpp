#include "bwe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "bwe/error.hpp"
#include "bwe/rng.hpp"

namespace bwe {

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                       int min_count, bool lowercase)
    : words_(std::move(words)), counts_(std::move(counts)), min_count_(min_count),
      lowercase_(lowercase) {
  if (words_.size() != counts_.size())
    throw DimensionMismatchError("vocabulary words and counts differ in length");
  index_.reserve(words_.size());
  for (WordId i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second)
      throw InputError("duplicate vocabulary word: '" + words_[i] + "'");
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::at(std::string_view word) const {
  if (auto id = find(word)) return *id;
  throw UnknownWordError(std::string(word));
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, int min_count,
                            bool lowercase) {
  if (corpus.empty()) throw InputError("corpus is empty");
  if (min_count < 1) throw InputError("min_count must be >= 1");

  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto &doc : corpus)
    for (auto &tok : tokenize(doc, lowercase)) ++freq[std::move(tok)];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto &[w, c] : freq)
    if (c >= static_cast<std::uint64_t>(min_count)) kept.emplace_back(w, c);
  if (kept.empty())
    throw EmptyVocabularyError("no token occurs at least " + std::to_string(min_count) +
                               " times");

  std::sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto &[w, c] : kept) {
    words.push_back(std::move(w));
    counts.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(counts), min_count, lowercase);
}

std::vector<std::vector<WordId>> encode_corpus(std::span<const std::string> corpus,
                                               const Vocabulary &vocab) {
  std::vector<std::vector<WordId>> docs;
  docs.reserve(corpus.size());
  for (const auto &text : corpus) {
    std::vector<WordId> ids;
    for (const auto &tok : tokenize(text, vocab.lowercase()))
      if (auto id = vocab.find(tok)) ids.push_back(*id);
    docs.push_back(std::move(ids));
  }
  return docs;
}

std::vector<WordPair> extract_pairs(std::span<const std::vector<WordId>> docs, int window) {
  if (window < 1) throw InputError("window must be >= 1");
  std::vector<WordPair> pairs;
  const auto w = static_cast<std::ptrdiff_t>(window);
  for (const auto &doc : docs) {
    const auto n = static_cast<std::ptrdiff_t>(doc.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - w);
      const std::ptrdiff_t hi = std::min(n - 1, t + w);
      for (std::ptrdiff_t s = lo; s <= hi; ++s)
        if (s != t) pairs.push_back({doc[t], doc[s]});
    }
  }
  return pairs;
}

std::vector<WordPair> extract_pairs(std::span<const std::string> corpus,
                                    const Vocabulary &vocab, int window) {
  const auto docs = encode_corpus(corpus, vocab);
  return extract_pairs(docs, window);
}

std::vector<WordPair> dedupe_pairs(std::span<const WordPair> pairs) {
  std::unordered_set<std::uint64_t> seen;
  std::vector<WordPair> out;
  for (const auto &p : pairs) {
    const std::uint64_t key = (static_cast<std::uint64_t>(p.word) << 32) | p.context;
    if (seen.insert(key).second) out.push_back(p);
  }
  return out;
}

std::size_t CooccurrenceSet::num_positive() const {
  return static_cast<std::size_t>(
      std::count_if(triples.begin(), triples.end(), [](const Triple &t) { return t.label == 1; }));
}

std::size_t CooccurrenceSet::num_negative() const { return triples.size() - num_positive(); }

CooccurrenceSet negative_sample(std::span<const WordPair> positives, const Vocabulary &vocab,
                                const NegativeSamplingOptions &options) {
  if (options.negatives_per_positive < 0)
    throw InputError("negatives_per_positive must be >= 0");
  if (options.exponent < 0.0 || !std::isfinite(options.exponent))
    throw InputError("negative-sampling exponent must be a finite value >= 0");
  const std::size_t n_words = vocab.size();
  if (options.negatives_per_positive > 0 && options.avoid_collisions && n_words < 2 &&
      !positives.empty())
    throw InputError("collision-free negative sampling needs at least two vocabulary words");

  CooccurrenceSet set;
  set.vocab_size = static_cast<std::uint32_t>(n_words);
  set.negatives_per_positive = options.negatives_per_positive;
  set.seed = options.seed;
  const std::size_t n_neg = positives.size() * options.negatives_per_positive;
  set.triples.reserve(positives.size() + n_neg);
  for (const auto &p : positives) {
    if (p.word >= n_words || p.context >= n_words)
      throw DimensionMismatchError("pair index outside the vocabulary");
    set.triples.push_back({p.word, p.context, 1});
  }
  if (n_neg == 0) return set;

  // Cumulative unigram^exponent distribution.
  std::vector<double> cdf(n_words);
  double total = 0.0;
  for (std::size_t i = 0; i < n_words; ++i) {
    total += options.exponent == 0.0
                 ? 1.0
                 : std::pow(static_cast<double>(vocab.count(static_cast<WordId>(i))),
                            options.exponent);
    cdf[i] = total;
  }
  auto draw = [&](CounterRng &rng) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<WordId>(it - cdf.begin());
  };

  for (std::size_t k = 0; k < positives.size(); ++k) {
    CounterRng rng(options.seed, k);
    const auto &p = positives[k];
    for (int r = 0; r < options.negatives_per_positive; ++r) {
      WordId ctx = draw(rng);
      if (options.avoid_collisions) {
        for (int retry = 0; retry < options.max_retries && ctx == p.context; ++retry)
          ctx = draw(rng);
      }
      set.triples.push_back({p.word, ctx, 0});
    }
  }
  return set;
}

std::int64_t DocumentTermMatrix::row_sum(std::size_t doc) const {
  std::int64_t s = 0;
  for (Storage::InnerIterator it(counts, static_cast<Eigen::Index>(doc)); it; ++it)
    s += it.value();
  return s;
}

DocumentTermMatrix build_dtm(std::span<const std::string> corpus, const Vocabulary &vocab,
                             std::vector<std::string> doc_ids,
                             std::vector<Metadata> doc_metadata) {
  const std::size_t n_docs = corpus.size();
  if (doc_metadata.empty()) doc_metadata.resize(n_docs);
  if (doc_metadata.size() != n_docs)
    throw DimensionMismatchError("metadata has " + std::to_string(doc_metadata.size()) +
                                 " rows for " + std::to_string(n_docs) + " documents");
  if (doc_ids.empty()) {
    for (std::size_t d = 0; d < n_docs; ++d) doc_ids.push_back(std::to_string(d));
  }
  if (doc_ids.size() != n_docs)
    throw DimensionMismatchError("doc_ids has " + std::to_string(doc_ids.size()) +
                                 " rows for " + std::to_string(n_docs) + " documents");

  const auto docs = encode_corpus(corpus, vocab);
  std::vector<Eigen::Triplet<std::int32_t>> entries;
  for (std::size_t d = 0; d < n_docs; ++d)
    for (WordId id : docs[d])
      entries.emplace_back(static_cast<int>(d), static_cast<int>(id), 1);

  DocumentTermMatrix dtm;
  dtm.counts.resize(static_cast<Eigen::Index>(n_docs), static_cast<Eigen::Index>(vocab.size()));
  dtm.counts.setFromTriplets(entries.begin(), entries.end());
  dtm.counts.makeCompressed();
  dtm.doc_ids = std::move(doc_ids);
  dtm.doc_metadata = std::move(doc_metadata);
  return dtm;
}

} // namespace bwe
