#include <fstream>
#include <set>

#include <json.hpp>

#include "bwe/error.hpp"
#include "bwe/identification.hpp"
#include "bwe/io.hpp"

namespace bwe::ident {

AnchorSpec read_anchor_spec(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open anchor spec: " + path.string());
  AnchorSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto f = split(line, '\t');
    if (f[0] == "pair" && f.size() == 4) {
      spec.user_pairs.push_back({f[1], f[2], static_cast<int>(parse_int(f[3], where))});
    } else if (f[0] == "auto" && f.size() == 3) {
      spec.auto_anchors.push_back({f[1], static_cast<int>(parse_int(f[2], where))});
    } else {
      throw InputError(where + ": expected 'pair<TAB>pos<TAB>neg<TAB>dim' or "
                               "'auto<TAB>word<TAB>dim'");
    }
  }
  return spec;
}

void write_identified_metadata(const std::filesystem::path &path, const IdentifiedEmbedding &id) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["anchor_residual"] = id.anchor_residual;
  j["condition_number"] = id.condition_number;
  ordered_json labels = ordered_json::array();
  for (const auto &l : id.dimension_labels) {
    if (l)
      labels.push_back({{"positive", l->first}, {"negative", l->second}});
    else
      labels.push_back(nullptr);
  }
  j["dimension_labels"] = labels;
  ordered_json anchors = ordered_json::array();
  for (const auto &p : id.anchors.user_pairs)
    anchors.push_back({{"kind", "pair"}, {"positive", p.positive}, {"negative", p.negative},
                       {"dim", p.dim}});
  for (const auto &a : id.anchors.auto_anchors)
    anchors.push_back({{"kind", "auto"}, {"word", a.word}, {"dim", a.dim}});
  j["anchors"] = anchors;
  ordered_json linear = ordered_json::array();
  for (Eigen::Index r = 0; r < id.transform.linear.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < id.transform.linear.cols(); ++c)
      row.push_back(id.transform.linear(r, c));
    linear.push_back(row);
  }
  j["linear"] = linear;
  j["offset"] = std::vector<double>(id.transform.offset.data(),
                                    id.transform.offset.data() + id.transform.offset.size());
  write_file(path, j.dump(2) + "\n");
}

void write_scores_csv(const std::filesystem::path &path, const DocumentScores &scores) {
  std::set<std::string> keys;
  for (const auto &m : scores.metadata)
    for (const auto &[k, v] : m) keys.insert(k);
  std::string out = "doc_id,score,n_tokens,flags";
  for (const auto &k : keys) out += "," + csv_escape(k);
  out += '\n';
  for (std::size_t d = 0; d < scores.doc_ids.size(); ++d) {
    out += csv_escape(scores.doc_ids[d]) + ',' +
           format_double(scores.scores[static_cast<Eigen::Index>(d)]) + ',' +
           std::to_string(scores.n_tokens[d]) + ',' + (scores.empty[d] ? "empty" : "");
    for (const auto &k : keys) {
      out += ',';
      if (d < scores.metadata.size()) {
        auto it = scores.metadata[d].find(k);
        if (it != scores.metadata[d].end()) out += csv_escape(it->second);
      }
    }
    out += '\n';
  }
  write_file(path, out);
}

DocumentScores read_scores_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing scores file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = parse_csv_line(line);
  if (header.size() < 4 || header[0] != "doc_id" || header[1] != "score" ||
      header[2] != "n_tokens" || header[3] != "flags")
    throw InputError(path.string() + ": header must start with doc_id,score,n_tokens,flags");

  DocumentScores s;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto f = parse_csv_line(line);
    if (f.size() != header.size())
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields");
    s.doc_ids.push_back(f[0]);
    values.push_back(parse_double(f[1], where));
    s.n_tokens.push_back(parse_int(f[2], where));
    s.empty.push_back(f[3].find("empty") != std::string::npos);
    Metadata m;
    for (std::size_t c = 4; c < f.size(); ++c)
      if (!f[c].empty()) m[header[c]] = f[c];
    s.metadata.push_back(std::move(m));
  }
  s.scores = Eigen::Map<VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return s;
}

} // namespace bwe::ident
