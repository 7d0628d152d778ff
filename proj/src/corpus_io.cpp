#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "bwe/corpus.hpp"
#include "bwe/error.hpp"
#include "bwe/io.hpp"

namespace bwe {
namespace {

constexpr char kCoocMagic[8] = {'B', 'W', 'E', 'C', 'O', 'O', 'C', '1'};

} // namespace

Corpus read_corpus(const std::filesystem::path &path,
                   const std::optional<std::filesystem::path> &metadata_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file: " + path.string());

  Corpus corpus;
  const bool tsv = path.extension() == ".tsv";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (tsv) {
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw InputError(path.string() + ":" + std::to_string(lineno) +
                         ": expected doc_id<TAB>text");
      corpus.doc_ids.push_back(line.substr(0, tab));
      corpus.texts.push_back(line.substr(tab + 1));
    } else {
      corpus.doc_ids.push_back(std::to_string(corpus.texts.size()));
      corpus.texts.push_back(std::move(line));
    }
  }
  if (corpus.texts.empty()) throw InputError("corpus file has no documents: " + path.string());
  corpus.metadata.resize(corpus.texts.size());

  if (metadata_path) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t d = 0; d < corpus.doc_ids.size(); ++d) {
      if (!row_of.emplace(corpus.doc_ids[d], d).second)
        throw InputError("duplicate doc_id in corpus: " + corpus.doc_ids[d]);
    }
    std::ifstream meta(*metadata_path, std::ios::binary);
    if (!meta) throw InputError("cannot open metadata file: " + metadata_path->string());
    lineno = 0;
    while (std::getline(meta, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split(line, '\t');
      if (fields.size() != 3)
        throw InputError(metadata_path->string() + ":" + std::to_string(lineno) +
                         ": expected doc_id<TAB>key<TAB>value");
      auto it = row_of.find(fields[0]);
      if (it == row_of.end())
        throw InputError(metadata_path->string() + ":" + std::to_string(lineno) +
                         ": unknown doc_id '" + fields[0] + "'");
      corpus.metadata[it->second][fields[1]] = fields[2];
    }
  }
  return corpus;
}

void write_vocabulary(const std::filesystem::path &path, const Vocabulary &vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "rank\tword\tcount\n";
  for (std::size_t i = 0; i < vocab.size(); ++i)
    out << (i + 1) << '\t' << vocab.words()[i] << '\t' << vocab.counts()[i] << '\n';
}

Vocabulary read_vocabulary(const std::filesystem::path &path, int min_count, bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing vocabulary file: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("rank\tword\tcount", 0) != 0)
    throw InputError(path.string() + ": bad vocabulary header");
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
    words.push_back(fields[1]);
    counts.push_back(parse_uint(fields[2], path.string() + ":" + std::to_string(lineno)));
  }
  return Vocabulary(std::move(words), std::move(counts), min_count, lowercase);
}

std::string serialize_cooccurrence(const CooccurrenceSet &set) {
  std::string buf;
  buf.reserve(20 + set.triples.size() * 9);
  buf.append(kCoocMagic, sizeof kCoocMagic);
  put_le(buf, set.vocab_size);
  put_le(buf, static_cast<std::uint64_t>(set.triples.size()));
  for (const auto &t : set.triples) {
    put_le(buf, t.word);
    put_le(buf, t.context);
    buf.push_back(static_cast<char>(t.label));
  }
  return buf;
}

void write_cooccurrence(const std::filesystem::path &path, const CooccurrenceSet &set) {
  write_file(path, serialize_cooccurrence(set));
}

CooccurrenceSet read_cooccurrence(const std::filesystem::path &path) {
  const std::string buf = read_file(path);
  ByteReader reader(buf, path.string());
  if (buf.size() < sizeof kCoocMagic || std::memcmp(buf.data(), kCoocMagic, 8) != 0)
    throw InputError(path.string() + ": not a BWECOOC1 file");
  reader.skip(8);
  CooccurrenceSet set;
  set.vocab_size = reader.get<std::uint32_t>();
  const auto n = reader.get<std::uint64_t>();
  if (n > (buf.size() - 20) / 9) throw InputError(path.string() + ": truncated triple data");
  set.triples.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    Triple t;
    t.word = reader.get<std::uint32_t>();
    t.context = reader.get<std::uint32_t>();
    t.label = reader.get<std::uint8_t>();
    if (t.word >= set.vocab_size || t.context >= set.vocab_size || t.label > 1)
      throw InputError(path.string() + ": invalid triple " + std::to_string(k));
    set.triples.push_back(t);
  }
  return set;
}

} // namespace bwe
