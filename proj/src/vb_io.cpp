#include <fstream>

#include "bwe/error.hpp"
#include "bwe/io.hpp"
#include "bwe/vb_engine.hpp"

namespace bwe::vb {
namespace {

constexpr std::string_view kStateMagic = "BWESTATE1";

void put_matrix(std::string &buf, const Eigen::MatrixXd &m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) put_le(buf, m(r, c));
}

void get_matrix(ByteReader &in, Eigen::MatrixXd &m, Eigen::Index rows, Eigen::Index cols) {
  m.resize(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = in.get<double>();
}

void put_vector(std::string &buf, const Eigen::VectorXd &v) {
  put_le(buf, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) put_le(buf, v[k]);
}

Eigen::VectorXd get_vector(ByteReader &in, std::size_t limit) {
  const auto n = in.get<std::uint64_t>();
  if (n > limit) throw InputError("state file: implausible vector length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = in.get<double>();
  return v;
}

} // namespace

void write_embeddings_tsv(const std::filesystem::path &path, const Eigen::MatrixXd &means,
                          const std::vector<std::string> &words) {
  if (static_cast<std::size_t>(means.cols()) != words.size())
    throw DimensionMismatchError("embedding columns differ from word count");
  std::string out = "word";
  for (Eigen::Index r = 0; r < means.rows(); ++r) out += "\tdim" + std::to_string(r);
  out += '\n';
  for (Eigen::Index i = 0; i < means.cols(); ++i) {
    out += words[static_cast<std::size_t>(i)];
    for (Eigen::Index r = 0; r < means.rows(); ++r) {
      out += '\t';
      out += format_double(means(r, i));
    }
    out += '\n';
  }
  write_file(path, out);
}

EmbeddingTable read_embeddings_tsv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing embeddings file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = split(line, '\t');
  if (header.empty() || header[0] != "word")
    throw InputError(path.string() + ": header must start with 'word'");
  const auto k = static_cast<Eigen::Index>(header.size() - 1);
  if (k < 1) throw InputError(path.string() + ": no embedding columns");

  EmbeddingTable table;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (static_cast<Eigen::Index>(fields.size()) != k + 1)
      throw InputError(where + ": expected " + std::to_string(k + 1) + " columns");
    table.words.push_back(fields[0]);
    for (Eigen::Index r = 0; r < k; ++r)
      values.push_back(parse_double(fields[static_cast<std::size_t>(r + 1)], where));
  }
  table.means = Eigen::Map<Eigen::MatrixXd>(values.data(), k,
                                            static_cast<Eigen::Index>(table.words.size()));
  return table;
}

void write_alpha_tsv(const std::filesystem::path &path, const VariationalState &state) {
  std::string out = "dim\talpha_x\talpha_b\n";
  for (Eigen::Index r = 0; r < state.alpha_x.size(); ++r) {
    out += std::to_string(r) + '\t' + format_double(state.alpha_x[r]) + '\t' +
           format_double(state.alpha_b[r]) + '\n';
  }
  write_file(path, out);
}

void write_elbo_csv(const std::filesystem::path &path, const std::vector<double> &history) {
  std::string out = "iteration,elbo,rel_change\n";
  for (std::size_t t = 0; t < history.size(); ++t) {
    out += std::to_string(t + 1) + ',' + format_double(history[t]) + ',';
    if (t > 0) out += format_double(std::abs(history[t] - history[t - 1]) / std::abs(history[t - 1]));
    out += '\n';
  }
  write_file(path, out);
}

std::string serialize_state(const VariationalState &state) {
  std::string buf(kStateMagic);
  const auto k = state.k();
  put_le(buf, static_cast<std::uint32_t>(k));
  put_le(buf, static_cast<std::uint32_t>(state.num_words()));
  put_le(buf, static_cast<std::uint32_t>(state.num_contexts()));
  put_matrix(buf, state.x_mean);
  for (const auto &s : state.x_cov) put_matrix(buf, s);
  put_matrix(buf, state.b_mean);
  for (const auto &s : state.b_cov) put_matrix(buf, s);
  put_vector(buf, state.z_star);
  put_vector(buf, state.z_pos);
  put_vector(buf, state.z_neg);
  put_le(buf, state.c_x);
  put_le(buf, state.c_b);
  put_vector(buf, state.d_x);
  put_vector(buf, state.d_b);
  put_vector(buf, state.alpha_x);
  put_vector(buf, state.alpha_b);
  put_le(buf, static_cast<std::uint64_t>(state.elbo_history.size()));
  for (double e : state.elbo_history) put_le(buf, e);
  put_le(buf, static_cast<std::int32_t>(state.iterations));
  put_le(buf, static_cast<std::uint8_t>(state.converged));
  return buf;
}

VariationalState deserialize_state(std::string_view bytes, const std::string &where) {
  if (bytes.substr(0, kStateMagic.size()) != kStateMagic)
    throw InputError(where + ": not a BWESTATE1 file");
  ByteReader in(bytes, where);
  in.skip(kStateMagic.size());
  const auto k = static_cast<Eigen::Index>(in.get<std::uint32_t>());
  const auto n_words = in.get<std::uint32_t>();
  const auto n_ctx = in.get<std::uint32_t>();
  const std::size_t needed =
      static_cast<std::size_t>(k) * k * (n_words + n_ctx) * sizeof(double);
  if (k < 1 || needed > bytes.size()) throw InputError(where + ": inconsistent dimensions");

  VariationalState state;
  get_matrix(in, state.x_mean, k, n_words);
  state.x_cov.resize(n_words);
  for (auto &s : state.x_cov) get_matrix(in, s, k, k);
  get_matrix(in, state.b_mean, k, n_ctx);
  state.b_cov.resize(n_ctx);
  for (auto &s : state.b_cov) get_matrix(in, s, k, k);
  const std::size_t limit = bytes.size() / sizeof(double);
  state.z_star = get_vector(in, limit);
  state.z_pos = get_vector(in, limit);
  state.z_neg = get_vector(in, limit);
  state.c_x = in.get<double>();
  state.c_b = in.get<double>();
  state.d_x = get_vector(in, limit);
  state.d_b = get_vector(in, limit);
  state.alpha_x = get_vector(in, limit);
  state.alpha_b = get_vector(in, limit);
  const auto n_hist = in.get<std::uint64_t>();
  if (n_hist > limit) throw InputError(where + ": implausible ELBO history length");
  state.elbo_history.resize(n_hist);
  for (auto &e : state.elbo_history) e = in.get<double>();
  state.iterations = in.get<std::int32_t>();
  state.converged = in.get<std::uint8_t>() != 0;
  if (!in.at_end()) throw InputError(where + ": trailing bytes");
  if (state.d_x.size() != k || state.d_b.size() != k || state.alpha_x.size() != k ||
      state.alpha_b.size() != k || state.z_pos.size() != state.z_star.size() ||
      state.z_neg.size() != state.z_star.size())
    throw InputError(where + ": inconsistent vector lengths");
  return state;
}

void write_state(const std::filesystem::path &path, const VariationalState &state) {
  write_file(path, serialize_state(state));
}

VariationalState read_state(const std::filesystem::path &path) {
  return deserialize_state(read_file(path), path.string());
}

} // namespace bwe::vb
