#include "homlab/report.hpp"

#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <limits>

#include "homlab/errors.hpp"

namespace homlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Bitwise equality, so NaN == NaN and reports compare as stored.
bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0 || a == b; }

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number_from(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw Error(ErrorCode::InvalidConfig, "not a number: " + s);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  out << bytes;
}

}  // namespace

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error(ErrorCode::InvalidConfig, "row width differs from header in " + name);
  rows.push_back(std::move(row));
}

bool Table::operator==(const Table& o) const {
  if (name != o.name || columns != o.columns || rows.size() != o.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!same(rows[i], o.rows[i])) return false;
  return true;
}

Verdict Verdict::check(std::string name, double measured, std::string relation, double tolerance) {
  bool ok = false;
  if (relation == "<=") ok = measured <= tolerance;
  else if (relation == ">=") ok = measured >= tolerance;
  else if (relation == "<") ok = measured < tolerance;
  else if (relation == ">") ok = measured > tolerance;
  else throw Error(ErrorCode::InvalidConfig, "unknown relation " + relation);
  return {std::move(name), measured, std::move(relation), tolerance, ok};
}

bool Verdict::operator==(const Verdict& o) const {
  return name == o.name && same(measured, o.measured) && relation == o.relation && same(tolerance, o.tolerance) &&
         passed == o.passed;
}

bool ExperimentReport::passed() const {
  for (const auto& v : verdicts)
    if (!v.passed) return false;
  return true;
}

void ExperimentReport::put(std::string key, double v) {
  for (auto& [k, x] : summary)
    if (k == key) {
      x = v;
      return;
    }
  summary.emplace_back(std::move(key), v);
}

double ExperimentReport::value(std::string_view key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  throw Error(ErrorCode::InvalidConfig, "report has no value '" + std::string(key) + "'");
}

const Verdict* ExperimentReport::verdict(std::string_view n) const {
  for (const auto& v : verdicts)
    if (v.name == n) return &v;
  return nullptr;
}

const Table* ExperimentReport::table(std::string_view n) const {
  for (const auto& t : tables)
    if (t.name == n) return &t;
  return nullptr;
}

bool ExperimentReport::operator==(const ExperimentReport& o) const {
  if (study != o.study || config_hash != o.config_hash || seed != o.seed || verdicts != o.verdicts ||
      tables != o.tables || notes != o.notes || summary.size() != o.summary.size())
    return false;
  for (std::size_t i = 0; i < summary.size(); ++i)
    if (summary[i].first != o.summary[i].first || !same(summary[i].second, o.summary[i].second)) return false;
  return true;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, end);
  return std::string(16 - s.size(), '0') + s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

ordered_json to_json(const ExperimentReport& r) {
  ordered_json j;
  j["study"] = r.study;
  j["passed"] = r.passed();
  ordered_json prov;
  prov["config_hash"] = r.config_hash;
  prov["seed"] = r.seed;
  j["provenance"] = prov;
  ordered_json summary = ordered_json::object();
  for (const auto& [k, v] : r.summary) summary[k] = number(v);
  j["summary"] = summary;
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(ordered_json{{"name", v.name},
                                    {"measured", number(v.measured)},
                                    {"relation", v.relation},
                                    {"tolerance", number(v.tolerance)},
                                    {"passed", v.passed}});
  j["verdicts"] = verdicts;
  ordered_json tables = ordered_json::array();
  for (const auto& t : r.tables) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json jr = ordered_json::array();
      for (double x : row) jr.push_back(number(x));
      rows.push_back(jr);
    }
    tables.push_back(ordered_json{{"name", t.name}, {"file", t.name + ".csv"}, {"columns", t.columns}, {"rows", rows}});
  }
  j["tables"] = tables;
  j["notes"] = r.notes;
  return j;
}

ExperimentReport report_from_json(const ordered_json& j) {
  ExperimentReport r;
  try {
    r.study = j.at("study").get<std::string>();
    r.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    r.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    for (auto it = j.at("summary").begin(); it != j.at("summary").end(); ++it)
      r.summary.emplace_back(it.key(), number_from(it.value()));
    for (const auto& v : j.at("verdicts"))
      r.verdicts.push_back({v.at("name").get<std::string>(), number_from(v.at("measured")),
                            v.at("relation").get<std::string>(), number_from(v.at("tolerance")),
                            v.at("passed").get<bool>()});
    for (const auto& t : j.at("tables")) {
      Table table{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
      for (const auto& row : t.at("rows")) {
        std::vector<double> values;
        for (const auto& x : row) values.push_back(number_from(x));
        table.rows.push_back(std::move(values));
      }
      r.tables.push_back(std::move(table));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

Table trajectory_table(const PathOutput& p, std::string name) {
  Table t{std::move(name), {"t", "m", "re", "im"}, {}};
  for (std::size_t n = 0; n < p.times.size(); ++n)
    for (std::size_t i = 0; i < p.watch.size(); ++i)
      t.rows.push_back({p.times[n], double(p.watch[i]), p.modes[i][n].real(), p.modes[i][n].imag()});
  return t;
}

Table covariance_table(const CovarianceTable& c, std::string name) {
  Table t{std::move(name), {"t", "m", "variance"}, {}};
  for (std::size_t n = 0; n < c.times.size(); ++n)
    for (std::size_t i = 0; i < c.watch.size(); ++i) t.rows.push_back({c.times[n], double(c.watch[i]), c.variance[i][n]});
  return t;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& r, const std::filesystem::path& dir,
                                               ReportFormat format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  if (format != ReportFormat::Csv) {
    written.push_back(dir / "report.json");
    write_file(written.back(), to_json(r).dump(2) + "\n");
  }
  if (format != ReportFormat::Json) {
    for (const auto& t : r.tables) {
      written.push_back(dir / (t.name + ".csv"));
      write_file(written.back(), to_csv(t));
    }
  }
  return written;
}

}  // namespace homlab
