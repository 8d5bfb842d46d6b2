#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pointdiff/families.hpp"

namespace cli {

/// Settings shared by every subcommand after flags, config file and
/// environment have been merged.
struct RunConfig {
  std::string family = "gst";
  double theta = 1.0;
  double horizon_T = 1.0;
  double rel_tol = 1e-8;
  std::uint64_t seed = 1;
  long n_paths = 1000;
  int workers = 1;
  std::string format = "csv";
  std::string out_path;  // empty: stdout

  pointdiff::FamilySpec family_spec() const;
  pointdiff::QuadratureSpec quad() const;
};

/// Thrown for malformed arguments; maps to exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "a,b,c" or "lo:hi:n" (n points, endpoints included).
std::vector<double> parse_grid(const std::string& text);

/// A numeric table plus the metadata that goes into the JSON header.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> meta;
};

/// CSV with a header row, or one JSON object {meta, rows}. Floats carry 17
/// significant digits in CSV; JSON uses the shortest round-trip form.
void write_table(const Table& table, const RunConfig& cfg, std::ostream& os);
/// Writes to cfg.out_path, or stdout when it is empty.
void emit(const Table& table, const RunConfig& cfg);

std::string format_double(double v);

// Subcommands. Each returns the process exit status.
int cmd_table(const RunConfig& cfg, const std::string& quantity, const std::vector<double>& t_grid,
              const std::vector<double>& r_grid, double x0);
int cmd_verify(const RunConfig& cfg, const std::string& suite);
int cmd_sample(const RunConfig& cfg, const std::string& kind, double x0, double s, double t,
               const std::vector<double>& grid, bool resolve_hit);

}  // namespace cli
