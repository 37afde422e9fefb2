#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/io/format.hpp"

namespace mfmc {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Header x1,x2[,w]; an empty x1 marks a low-fidelity-only row.
inline MFDataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  int c1 = -1, c2 = -1, cw = -1;
  std::size_t ncol = 0;
  auto parse_error = [&](const std::string& msg) {
    fail(ErrorKind::Parse, "io", "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (lineno == 1 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line = line.substr(3);
    auto cols = split_csv_line(line);
    ncol = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::string_view name = trim(cols[i]);
      int* slot = name == "x1" ? &c1 : name == "x2" ? &c2 : name == "w" ? &cw : nullptr;
      if (!slot) parse_error("unknown column '" + std::string(name) + "' (expected x1,x2[,w])");
      if (*slot >= 0) parse_error("duplicate column '" + std::string(name) + "'");
      *slot = static_cast<int>(i);
    }
    break;
  }
  if (ncol == 0) fail(ErrorKind::Parse, "io", "missing header row");
  if (c1 < 0 || c2 < 0) parse_error("header must name columns x1 and x2");

  std::vector<double> x1, x2, lofi, wp, wl;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cols = split_csv_line(line);
    if (cols.size() != ncol)
      parse_error("expected " + std::to_string(ncol) + " fields, found " + std::to_string(cols.size()));
    auto b = parse_double(cols[c2]);
    if (!b) parse_error("x2 is not a number: '" + cols[c2] + "'");
    std::optional<double> w;
    if (cw >= 0) {
      w = parse_double(cols[cw]);
      if (!w) parse_error("w is not a number: '" + cols[cw] + "'");
      if (*w < 0.0) fail(ErrorKind::Dataset, "io", "line " + std::to_string(lineno) + ": negative weight");
    }
    if (trim(cols[c1]).empty()) {
      lofi.push_back(*b);
      if (w) wl.push_back(*w);
      continue;
    }
    auto a = parse_double(cols[c1]);
    if (!a) parse_error("x1 is not a number: '" + cols[c1] + "'");
    x1.push_back(*a);
    x2.push_back(*b);
    if (w) wp.push_back(*w);
  }
  return MFDataset(std::move(x1), std::move(x2), std::move(lofi), std::move(wp), std::move(wl));
}

inline MFDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Dataset, "io", "cannot open " + path);
  return read_dataset(in);
}

// Writes the normalised weights only when they are not uniform.
inline void write_dataset(std::ostream& out, const MFDataset& d) {
  const bool w = !d.uniform_weights();
  out << (w ? "x1,x2,w\n" : "x1,x2\n");
  for (std::size_t i = 0; i < d.n(); ++i) {
    out << format_double(d.x1()[i]) << ',' << format_double(d.x2()[i]);
    if (w) out << ',' << format_double(d.paired_weights()[i]);
    out << '\n';
  }
  for (std::size_t j = 0; j < d.m(); ++j) {
    out << ',' << format_double(d.lofi()[j]);
    if (w) out << ',' << format_double(d.lofi_weights()[j]);
    out << '\n';
  }
}

inline void write_pairs(std::ostream& out, const std::vector<std::pair<double, double>>& s) {
  out << "x1,x2\n";
  for (auto [a, b] : s) out << format_double(a) << ',' << format_double(b) << '\n';
}

}  // namespace mfmc
