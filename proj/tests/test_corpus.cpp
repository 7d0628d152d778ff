#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "bwe/corpus.hpp"
#include "bwe/error.hpp"
#include "bwe/io.hpp"
#include "support.hpp"

using namespace bwe;

namespace {

std::vector<std::string> fixture_lines() {
  std::ifstream in(std::string(BWE_TEST_DATA) + "/mini_corpus.txt");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Byte-level tokenizer for the fixture: ASCII letters/digits and any
// non-ASCII byte form words; ASCII is lowercased.
std::vector<std::string> simple_tokens(const std::string &text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch) || ch >= 0x80) {
      cur += static_cast<char>(ch < 0x80 ? std::tolower(ch) : ch);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

} // namespace

TEST_CASE("tokenizer strips punctuation and folds case") {
  CHECK(tokenize("War, peace; WAR!") == std::vector<std::string>{"war", "peace", "war"});
  CHECK(tokenize("War, peace", false) == std::vector<std::string>{"War", "peace"});
  CHECK(tokenize("CAFÉ Ελλάδα") == std::vector<std::string>{"café", "ελλάδα"});
  CHECK(tokenize("1945-03-04").size() == 3);
  CHECK(tokenize("  \t ").empty());
}

TEST_CASE("build_vocabulary thresholds and orders") {
  const std::vector<std::string> a{"war war peace"};
  const auto v = build_vocabulary(a, 2);
  REQUIRE(v.size() == 1);
  CHECK(v.word(0) == "war");
  CHECK(v.count(0) == 2);

  const std::vector<std::string> b{"A a A"};
  const auto w = build_vocabulary(b, 1, true);
  REQUIRE(w.size() == 1);
  CHECK(w.word(0) == "a");
  CHECK(w.count(0) == 3);
  CHECK(build_vocabulary(b, 1, false).size() == 2);

  const std::vector<std::string> c{"b a c b a d"};
  const auto u = build_vocabulary(c, 1);
  CHECK(u.words() == std::vector<std::string>{"a", "b", "c", "d"});
  for (WordId i = 0; i < u.size(); ++i) CHECK(u.at(u.word(i)) == i);

  CHECK_THROWS_AS(build_vocabulary(a, 3), EmptyVocabularyError);
  CHECK_THROWS_AS(build_vocabulary(std::vector<std::string>{}, 1), InputError);
  CHECK_THROWS_AS(u.at("zebra"), UnknownWordError);
}

TEST_CASE("fixture vocabulary matches an independent tally") {
  const auto lines = fixture_lines();
  std::map<std::string, std::uint64_t> tally;
  for (const auto &l : lines)
    for (const auto &t : simple_tokens(l)) ++tally[t];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto &[w, n] : tally)
    if (n >= 5) kept.emplace_back(w, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto &x, const auto &y) { return x.second > y.second; });

  const auto v = build_vocabulary(lines, 5);
  CHECK(v.size() == 5); // hand count: the, our, and, nation, people
  REQUIRE(v.size() == kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(v.word(static_cast<WordId>(i)) == kept[i].first);
    CHECK(v.count(static_cast<WordId>(i)) == kept[i].second);
  }
  CHECK(build_vocabulary(lines, 1).size() == tally.size());
}

TEST_CASE("extract_pairs window contract") {
  const std::vector<std::vector<WordId>> two{{0, 1}};
  CHECK(extract_pairs(two, 1) == std::vector<WordPair>{{0, 1}, {1, 0}});
  const std::vector<std::vector<WordId>> three{{0, 1, 2}};
  CHECK(extract_pairs(three, 2).size() == 6);
  const std::vector<std::vector<WordId>> single{{3}, {}};
  CHECK(extract_pairs(single, 4).empty());
  CHECK_THROWS_AS(extract_pairs(two, 0), InputError);

  // Windows never cross documents.
  const std::vector<std::vector<WordId>> docs{{0, 1}, {2, 3}};
  for (const auto &p : extract_pairs(docs, 5)) CHECK((p.word < 2) == (p.context < 2));
}

TEST_CASE("extract_pairs matches a position double loop") {
  const std::vector<std::string> sentence{
      "the nation and the people and our nation and our people the"};
  const auto vocab = build_vocabulary(sentence, 1);
  const auto docs = encode_corpus(sentence, vocab);
  REQUIRE(docs[0].size() == 12);
  for (int window : {1, 3, 9, 20}) {
    std::vector<WordPair> expected;
    const auto &d = docs[0];
    for (std::size_t t = 0; t < d.size(); ++t)
      for (std::size_t s = 0; s < d.size(); ++s) {
        const auto gap = t > s ? t - s : s - t;
        if (s != t && gap <= static_cast<std::size_t>(window)) expected.push_back({d[t], d[s]});
      }
    const auto got = extract_pairs(docs, window);
    CHECK(got.size() == expected.size());
    CHECK(std::is_permutation(got.begin(), got.end(), expected.begin(), expected.end(),
                              [](const WordPair &a, const WordPair &b) { return a == b; }));
  }
  CHECK(extract_pairs(docs, 9).size() == 12 * 11 - 2 * (1 + 2));
}

TEST_CASE("positive pair counts are symmetric") {
  const auto lines = fixture_lines();
  const auto vocab = build_vocabulary(lines, 2);
  std::map<std::pair<WordId, WordId>, int> counts;
  for (const auto &p : extract_pairs(lines, vocab, 4)) ++counts[{p.word, p.context}];
  for (const auto &[key, n] : counts) CHECK(counts[{key.second, key.first}] == n);
}

TEST_CASE("dedupe_pairs keeps first occurrences") {
  const std::vector<WordPair> pairs{{0, 1}, {1, 0}, {0, 1}, {2, 2}, {1, 0}};
  CHECK(dedupe_pairs(pairs) == std::vector<WordPair>{{0, 1}, {1, 0}, {2, 2}});
}

TEST_CASE("negative_sample count contract and determinism") {
  const auto lines = fixture_lines();
  const auto vocab = build_vocabulary(lines, 1);
  NegativeSamplingOptions opts;
  opts.seed = 42;

  CHECK(negative_sample({}, vocab, opts).triples.empty());

  const std::vector<WordPair> four{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const auto s = negative_sample(four, vocab, opts);
  CHECK(s.num_positive() == 4);
  CHECK(s.num_negative() == 20);
  for (std::size_t t = 0; t < 4; ++t) CHECK(s.triples[t].label == 1);
  for (std::size_t t = 4; t < s.triples.size(); ++t) {
    CHECK(s.triples[t].label == 0);
    CHECK(s.triples[t].word == four[(t - 4) / 5].word);
  }

  const auto pairs = extract_pairs(lines, vocab, 9);
  const auto a = serialize_cooccurrence(negative_sample(pairs, vocab, opts));
  const auto b = serialize_cooccurrence(negative_sample(pairs, vocab, opts));
  CHECK(a == b);
  opts.seed = 43;
  CHECK(serialize_cooccurrence(negative_sample(pairs, vocab, opts)) != a);

  for (int k : {0, 1, 3}) {
    opts.negatives_per_positive = k;
    const auto set = negative_sample(pairs, vocab, opts);
    CHECK(set.num_negative() == static_cast<std::size_t>(k) * set.num_positive());
    for (const auto &t : set.triples) {
      CHECK(t.word < vocab.size());
      CHECK(t.context < vocab.size());
    }
  }
}

TEST_CASE("negative_sample avoids collisions and rejects one-word vocabularies") {
  const Vocabulary two({"a", "b"}, {3, 1}, 1, true);
  NegativeSamplingOptions opts;
  opts.seed = 5;
  const std::vector<WordPair> pos{{0, 0}, {0, 1}, {1, 0}};
  const auto s = negative_sample(pos, two, opts);
  for (std::size_t t = 3; t < s.triples.size(); ++t)
    CHECK(s.triples[t].context != pos[(t - 3) / 5].context);

  const Vocabulary one({"a"}, {3}, 1, true);
  CHECK_THROWS_AS(negative_sample(std::vector<WordPair>{{0, 0}}, one, opts), InputError);
  opts.avoid_collisions = false;
  CHECK(negative_sample(std::vector<WordPair>{{0, 0}}, one, opts).num_negative() == 5);
}

TEST_CASE("negatives follow the smoothed unigram distribution") {
  const Vocabulary v({"a", "b", "c", "d"}, {81, 16, 16, 1}, 1, true);
  for (double exponent : {0.75, 0.0}) {
    NegativeSamplingOptions opts;
    opts.seed = 11;
    opts.exponent = exponent;
    opts.avoid_collisions = false;
    opts.negatives_per_positive = 50;
    const std::vector<WordPair> pos(4000, WordPair{0, 0});
    const auto s = negative_sample(pos, v, opts);
    std::vector<double> freq(4, 0.0);
    for (const auto &t : s.triples)
      if (t.label == 0) freq[t.context] += 1.0;
    double norm = 0.0;
    std::vector<double> expected;
    for (WordId i = 0; i < 4; ++i) expected.push_back(std::pow(static_cast<double>(v.count(i)), exponent));
    for (double e : expected) norm += e;
    const double n = static_cast<double>(s.num_negative());
    for (int i = 0; i < 4; ++i) CHECK(freq[i] / n == doctest::Approx(expected[i] / norm).epsilon(0.02));
  }
}

TEST_CASE("build_dtm counts and metadata checks") {
  const Vocabulary v({"war", "peace"}, {2, 1}, 1, true);
  const std::vector<std::string> docs{"war peace war", "nothing here"};
  const auto dtm = build_dtm(docs, v, {}, {});
  CHECK(dtm.num_docs() == 2);
  CHECK(dtm.counts.coeff(0, 0) == 2);
  CHECK(dtm.counts.coeff(0, 1) == 1);
  CHECK(dtm.row_sum(1) == 0);
  CHECK(dtm.doc_ids == std::vector<std::string>{"0", "1"});
  CHECK_THROWS_AS(build_dtm(docs, v, {}, std::vector<Metadata>(3)), DimensionMismatchError);
}

TEST_CASE("fixture DTM row sums match an independent tally") {
  const auto lines = fixture_lines();
  const auto vocab = build_vocabulary(lines, 5);
  const auto dtm = build_dtm(lines, vocab, {}, {});
  std::int64_t total = 0, expected_total = 0;
  for (std::size_t d = 0; d < lines.size(); ++d) {
    std::int64_t n = 0;
    for (const auto &t : simple_tokens(lines[d])) n += vocab.find(t).has_value();
    CHECK(dtm.row_sum(d) == n);
    expected_total += n;
    total += dtm.row_sum(d);
  }
  CHECK(total == expected_total);
  CHECK(total == 15 + 14 + 10 + 5 + 5);
}

TEST_CASE("corpus, vocabulary and co-occurrence files round trip") {
  oracle::TempDir dir("corpus");
  write_file(dir / "c.tsv", "d1\tWar and peace\nd2\tPeace, peace!\n");
  write_file(dir / "m.tsv", "d1\tyear\t1901\nd2\tyear\t1950\n");
  const auto c = read_corpus(dir / "c.tsv", dir / "m.tsv");
  CHECK(c.doc_ids == std::vector<std::string>{"d1", "d2"});
  CHECK(c.metadata[1].at("year") == "1950");

  write_file(dir / "c.txt", "one two\nthree\n");
  const auto plain = read_corpus(dir / "c.txt");
  CHECK(plain.doc_ids == std::vector<std::string>{"0", "1"});
  CHECK_THROWS_AS(read_corpus(dir / "missing.txt"), InputError);

  const auto vocab = build_vocabulary(c.texts, 1);
  write_vocabulary(dir / "vocab.tsv", vocab);
  const auto back = read_vocabulary(dir / "vocab.tsv");
  CHECK(back.words() == vocab.words());
  CHECK(back.counts() == vocab.counts());
  CHECK(read_file(dir / "vocab.tsv").rfind("rank\tword\tcount\n1\tpeace\t3\n", 0) == 0);

  NegativeSamplingOptions opts;
  opts.seed = 1;
  auto set = negative_sample(extract_pairs(c.texts, vocab, 2), vocab, opts);
  write_cooccurrence(dir / "cooc.bin", set);
  const auto bytes = read_file(dir / "cooc.bin");
  CHECK(bytes.substr(0, 8) == "BWECOOC1");
  CHECK(bytes.size() == 8 + 4 + 8 + 9 * set.triples.size());
  CHECK(read_cooccurrence(dir / "cooc.bin").triples == set.triples);
  write_file(dir / "bad.bin", "BWECOOC1xx");
  CHECK_THROWS_AS(read_cooccurrence(dir / "bad.bin"), InputError);
}
