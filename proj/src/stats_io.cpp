#include <fstream>
#include <map>

#include "bwe/error.hpp"
#include "bwe/io.hpp"
#include "bwe/stats.hpp"

namespace bwe::stats {
namespace {

std::ptrdiff_t column(const std::vector<std::string> &header, const std::string &name) {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : it - header.begin();
}

} // namespace

std::vector<std::pair<std::int64_t, double>> read_event_counts(const std::filesystem::path &path,
                                                               const EventFilter &filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open event file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = parse_csv_line(line);
  const auto date_col = column(header, "date");
  const auto count_col = column(header, "count");
  const auto actor_col = column(header, "actor");
  const auto action_col = column(header, "action");
  if (date_col < 0) throw InputError(path.string() + ": missing 'date' column");
  const bool raw = count_col < 0;
  if (raw && (actor_col < 0 || action_col < 0))
    throw InputError(path.string() + ": need a 'count' column or 'actor' and 'action' columns");
  if (!raw && (filter.actor || filter.action))
    throw InputError(path.string() + ": actor/action filters need raw event rows");

  std::map<std::int64_t, double> totals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto f = parse_csv_line(line);
    if (f.size() != header.size())
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields");
    if (raw) {
      if (filter.actor && f[static_cast<std::size_t>(actor_col)] != *filter.actor) continue;
      if (filter.action && f[static_cast<std::size_t>(action_col)] != *filter.action) continue;
    }
    const auto period = biweekly_period(f[static_cast<std::size_t>(date_col)]);
    const double value = raw ? 1.0 : parse_double(f[static_cast<std::size_t>(count_col)], where);
    if (value < 0.0) throw InputError(where + ": negative count");
    totals[period] += value;
  }
  if (totals.empty()) throw InputError(path.string() + ": no events after filtering");

  // Periods inside the observed range without events count as zero.
  std::vector<std::pair<std::int64_t, double>> out;
  for (auto p = totals.begin()->first; p <= totals.rbegin()->first; ++p) {
    auto it = totals.find(p);
    out.emplace_back(p, it == totals.end() ? 0.0 : it->second);
  }
  return out;
}

CountSeries read_series_csv(const std::filesystem::path &path, int lag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open series file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = parse_csv_line(line);
  if (header.size() != 3 || header[0] != "period" || header[1] != "count" ||
      header[2] != "covariate")
    throw InputError(path.string() + ": header must be period,count,covariate");
  CountSeries s;
  s.lag = lag;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto f = parse_csv_line(line);
    if (f.size() != 3) throw InputError(where + ": expected 3 fields");
    s.periods.push_back(parse_int(f[0], where));
    s.counts.push_back(parse_double(f[1], where));
    s.covariate.push_back(parse_double(f[2], where));
    if (s.periods.size() > 1 && s.periods.back() <= s.periods[s.periods.size() - 2])
      throw InputError(where + ": periods must be strictly increasing");
    if (s.counts.back() < 0.0) throw InputError(where + ": negative count");
  }
  return s;
}

} // namespace bwe::stats
