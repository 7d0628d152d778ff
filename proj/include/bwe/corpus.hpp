#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace bwe {

using WordId = std::uint32_t;
using Metadata = std::map<std::string, std::string>;

// Splits on every non-alphanumeric code point of UTF-8 input. Invalid
// UTF-8 bytes are treated as separators.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true);

class Vocabulary {
public:
  Vocabulary() = default;
  // Words must already be in canonical order (descending count, then
  // lexicographic) and unique.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
             int min_count, bool lowercase);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string> &words() const { return words_; }
  const std::vector<std::uint64_t> &counts() const { return counts_; }
  const std::string &word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  int min_count() const { return min_count_; }
  bool lowercase() const { return lowercase_; }

  std::optional<WordId> find(std::string_view word) const;
  // Throws UnknownWordError.
  WordId at(std::string_view word) const;

private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  int min_count_ = 1;
  bool lowercase_ = true;
};

Vocabulary build_vocabulary(std::span<const std::string> corpus, int min_count,
                            bool lowercase = true);

// Tokenizes every document and keeps only in-vocabulary tokens, in order.
std::vector<std::vector<WordId>> encode_corpus(std::span<const std::string> corpus,
                                               const Vocabulary &vocab);

struct WordPair {
  WordId word;
  WordId context;
  friend bool operator==(const WordPair &, const WordPair &) = default;
};

// Directional (center, context) pairs within a symmetric half-width window.
// Windows never cross document boundaries; order is document, position,
// then offset from left to right.
std::vector<WordPair> extract_pairs(std::span<const std::vector<WordId>> docs,
                                    int window);
std::vector<WordPair> extract_pairs(std::span<const std::string> corpus,
                                    const Vocabulary &vocab, int window);

// Keeps the first occurrence of every distinct pair.
std::vector<WordPair> dedupe_pairs(std::span<const WordPair> pairs);

struct Triple {
  WordId word;
  WordId context;
  std::uint8_t label;
  friend bool operator==(const Triple &, const Triple &) = default;
};

struct CooccurrenceSet {
  std::vector<Triple> triples;
  std::uint32_t vocab_size = 0; // I == J
  int window = 0;
  int negatives_per_positive = 0;
  std::uint64_t seed = 0;

  std::size_t num_positive() const;
  std::size_t num_negative() const;
};

struct NegativeSamplingOptions {
  int negatives_per_positive = 5;
  double exponent = 0.75;
  bool avoid_collisions = true;
  int max_retries = 10;
  std::uint64_t seed = 0;
};

// Positives first, then negatives grouped by the positive they were drawn
// for. Draws for positive k come from a counter-based stream keyed on k.
CooccurrenceSet negative_sample(std::span<const WordPair> positives,
                                const Vocabulary &vocab,
                                const NegativeSamplingOptions &options);

struct DocumentTermMatrix {
  using Storage = Eigen::SparseMatrix<std::int32_t, Eigen::RowMajor>;
  Storage counts; // D x I
  std::vector<std::string> doc_ids;
  std::vector<Metadata> doc_metadata;

  std::size_t num_docs() const { return static_cast<std::size_t>(counts.rows()); }
  std::int64_t row_sum(std::size_t doc) const;
};

DocumentTermMatrix build_dtm(std::span<const std::string> corpus, const Vocabulary &vocab,
                             std::vector<std::string> doc_ids,
                             std::vector<Metadata> doc_metadata);

// ---- files ---------------------------------------------------------------

struct Corpus {
  std::vector<std::string> doc_ids;
  std::vector<std::string> texts;
  std::vector<Metadata> metadata;
};

// A ".tsv" path is read as (doc_id, text) rows; anything else as one
// document per line with ids "0".."D-1". The optional metadata TSV holds
// (doc_id, key, value) rows.
Corpus read_corpus(const std::filesystem::path &path,
                   const std::optional<std::filesystem::path> &metadata_path = {});

void write_vocabulary(const std::filesystem::path &path, const Vocabulary &vocab);
Vocabulary read_vocabulary(const std::filesystem::path &path, int min_count = 1,
                           bool lowercase = true);

// "BWECOOC1" magic, u32 I, u64 count, packed (u32 i, u32 j, u8 y), all
// little-endian.
void write_cooccurrence(const std::filesystem::path &path, const CooccurrenceSet &set);
CooccurrenceSet read_cooccurrence(const std::filesystem::path &path);
std::string serialize_cooccurrence(const CooccurrenceSet &set);

} // namespace bwe
