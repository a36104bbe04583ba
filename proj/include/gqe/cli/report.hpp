#pragma once

// Check rows and their CSV/JSON serialization. Rows are kept in insertion order so output
// does not depend on scheduling.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqe/error.hpp"

namespace gqe::cli {

inline constexpr int kCoordColumns = 2;

struct Row {
  std::vector<double> coords;  // up to kCoordColumns sample coordinates
  std::string check_id;        // "anchor:check"
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  // value <= tolerance passes
  Row& check(const std::string& anchor, const std::string& what, double value, double tol,
             std::vector<double> coords = {}) {
    return add(anchor, what, value, tol, std::isfinite(value) && value <= tol, std::move(coords));
  }
  // value >= threshold passes
  Row& at_least(const std::string& anchor, const std::string& what, double value, double threshold,
                std::vector<double> coords = {}) {
    return add(anchor, what, value, threshold, std::isfinite(value) && value >= threshold, std::move(coords));
  }
  Row& flag(const std::string& anchor, const std::string& what, bool ok, std::vector<double> coords = {}) {
    return add(anchor, what, ok ? 1.0 : 0.0, 1.0, ok, std::move(coords));
  }
  Row& add(const std::string& anchor, const std::string& what, double value, double tol, bool pass,
           std::vector<double> coords = {}) {
    require(coords.size() <= kCoordColumns, Errc::invalid_argument, "too many sample coordinates");
    rows_.push_back({std::move(coords), anchor + ":" + what, value, tol, pass});
    return rows_.back();
  }

  nlohmann::json& details() { return details_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t failures() const {
    std::size_t k = 0;
    for (const auto& r : rows_) k += !r.pass;
    return k;
  }
  bool pass() const { return failures() == 0; }

  void write_csv(std::ostream& os) const {
    os << "coord1,coord2,check_id,value,tolerance,pass\n";
    for (const auto& r : rows_) {
      for (int i = 0; i < kCoordColumns; ++i) {
        if (i < static_cast<int>(r.coords.size())) os << fmt(r.coords[i]);
        os << ',';
      }
      os << r.check_id << ',' << fmt(r.value) << ',' << fmt(r.tolerance) << ',' << (r.pass ? "true" : "false")
         << '\n';
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command_;
    j["rows"] = rows_.size();
    j["failures"] = failures();
    j["details"] = details_.is_null() ? nlohmann::json::object() : details_;
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& r : rows_)
      if (!r.pass) failed.push_back({{"coords", r.coords}, {"check_id", r.check_id}, {"value", fmt(r.value)},
                                     {"tolerance", fmt(r.tolerance)}});
    j["failed_rows"] = failed;
    return j;
  }

  // CSV unless the path ends in .json; empty path writes CSV to `fallback`.
  void write(const std::string& path, std::ostream& fallback) const {
    if (path.empty()) {
      write_csv(fallback);
      return;
    }
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::invalid_argument, "cannot write '" + path + "'");
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) out << to_json().dump(2) << '\n';
    else write_csv(out);
  }

 private:
  std::string command_;
  std::vector<Row> rows_;
  nlohmann::json details_ = nlohmann::json::object();
};

// Parses a CSV written by write_csv.
inline std::vector<Row> read_csv(std::istream& in, const std::string& label) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::invalid_argument, label + ": empty report");
  require(line == "coord1,coord2,check_id,value,tolerance,pass", Errc::invalid_argument,
          label + ":1: unexpected header");
  std::vector<Row> rows;
  int lineno = 1;
  auto num = [&](const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty(), Errc::invalid_argument,
            label + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    require(cells.size() == 6, Errc::invalid_argument, label + ":" + std::to_string(lineno) + ": expected 6 columns");
    Row r;
    for (int i = 0; i < kCoordColumns; ++i)
      if (!cells[i].empty()) r.coords.push_back(num(cells[i]));
    r.check_id = cells[2];
    r.value = num(cells[3]);
    r.tolerance = num(cells[4]);
    require(cells[5] == "true" || cells[5] == "false", Errc::invalid_argument,
            label + ":" + std::to_string(lineno) + ": pass must be true or false");
    r.pass = cells[5] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace gqe::cli
