#pragma once

// Study results as data: summary scalars, verdicts against configured
// tolerances and numeric tables, written as report.json plus one CSV per table.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homlab/spde_solver.hpp"

namespace homlab {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  bool operator==(const Table&) const;
};

struct Verdict {
  std::string name;
  double measured = 0.0;
  /// "<=", ">=", "<" or ">"
  std::string relation;
  double tolerance = 0.0;
  bool passed = false;

  static Verdict check(std::string name, double measured, std::string relation, double tolerance);
  bool operator==(const Verdict&) const;
};

struct ExperimentReport {
  std::string study;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  bool passed() const;
  void put(std::string key, double value);
  /// Summary value; throws InvalidConfig when absent.
  double value(std::string_view key) const;
  const Verdict* verdict(std::string_view name) const;
  const Table* table(std::string_view name) const;
  bool operator==(const ExperimentReport&) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest text that parses back to the same double ("nan", "inf", "-inf"
/// for non-finite values).
std::string format_double(double v);

nlohmann::ordered_json to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

/// Header row, "," separator, LF line endings.
std::string to_csv(const Table& t);
/// Columns t, m, re, im.
Table trajectory_table(const PathOutput& p, std::string name);
/// Columns t, m, variance.
Table covariance_table(const CovarianceTable& c, std::string name);

enum class ReportFormat { Json, Csv, All };

/// Writes report.json and <table>.csv into dir (created if missing);
/// returns the written paths. Rewriting the same report yields the same bytes.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& r, const std::filesystem::path& dir,
                                               ReportFormat format = ReportFormat::All);

}  // namespace homlab
