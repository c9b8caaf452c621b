#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fracvar::cli {

/// Exit statuses: 0 success / converged, 1 error, 2 ran but did not
/// converge (solve) or residuals above tolerance (check).
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kNotConverged = 2;

struct RunConfig {
  std::string command;  // solve | check | ops
  std::string problem_path;
  std::string output_dir;
  std::string candidate_path;
  std::map<std::string, std::string> overrides;
  std::string operator_name;
  std::optional<double> alpha;
  /// From FRACVAR_THREADS; an explicit threads override wins.
  std::optional<unsigned> threads;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  /// Index of a named column; throws when missing.
  std::size_t column(const std::string& name) const;
};

/// Header row, comma separated, period decimal point.
Table read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_ops(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11) and dispatches. Reads FRACVAR_THREADS.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fracvar::cli
