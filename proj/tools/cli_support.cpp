#include "cli_support.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace cli {

pointdiff::FamilySpec RunConfig::family_spec() const {
  try {
    auto f = pointdiff::FamilySpec::parse(family, theta, horizon_T);
    f.quad = quad();
    return f;
  } catch (const pointdiff::DomainError& e) {
    throw UsageError(e.what());
  }
}

pointdiff::QuadratureSpec RunConfig::quad() const {
  pointdiff::QuadratureSpec q;
  q.rel_tol = rel_tol;
  return q;
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad number '" + s + "' in grid '" + text + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  if (text.find(':') != std::string::npos) {
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError("range grid must be lo:hi:n, got '" + text + "'");
    const double lo = number(parts[0]);
    const double hi = number(parts[1]);
    const double n = number(parts[2]);
    if (n < 1 || n != std::floor(n)) throw UsageError("grid point count must be a positive integer");
    if (n == 1) return {lo};
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
  }
  std::vector<double> out;
  while (std::getline(ss, item, ',')) out.push_back(number(item));
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_table(const Table& table, const RunConfig& cfg, std::ostream& os) {
  if (cfg.format == "json") {
    nlohmann::ordered_json doc;
    doc["meta"] = table.meta;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json obj;
      for (std::size_t k = 0; k < table.columns.size(); ++k) {
        // Non-finite values have no JSON literal and become null.
        obj[table.columns[k]] = row[k];
      }
      doc["rows"].push_back(std::move(obj));
    }
    os << doc.dump(2) << '\n';
    return;
  }
  for (std::size_t k = 0; k < table.columns.size(); ++k) os << (k ? "," : "") << table.columns[k];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_double(row[k]);
    os << '\n';
  }
}

void emit(const Table& table, const RunConfig& cfg) {
  if (cfg.out_path.empty()) {
    write_table(table, cfg, std::cout);
    return;
  }
  std::ofstream file(cfg.out_path);
  if (!file) throw UsageError("cannot open output file " + cfg.out_path);
  write_table(table, cfg, file);
}

}  // namespace cli
