#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/core/version.hpp"
#include "mfmc/io/format.hpp"
#include "mfmc/io/json_io.hpp"

namespace mfmc {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // cells are strings already; numbers go through format_double
  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) fail(ErrorKind::Usage, "experiments", "row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
    o << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    }
    return o.str();
  }

  int column(const std::string& c) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == c) return static_cast<int>(i);
    fail(ErrorKind::Usage, "experiments", "no column " + c);
  }
};

struct ExperimentReport {
  std::string id;
  std::vector<Table> tables;
  json config;  // resolved configuration, enough to re-run
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;

  const Table& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    fail(ErrorKind::Usage, "experiments", "no table " + name);
  }

  // sidecar without the runtime; this part is deterministic
  json metadata() const {
    json j;
    j["experiment"] = id;
    j["version"] = version;
    j["config"] = config;
    json names = json::array();
    for (const auto& t : tables) names.push_back(id + "_" + t.name + ".csv");
    j["tables"] = names;
    j["warnings"] = warnings;
    return j;
  }

  // deterministic payload: every table followed by the metadata
  std::string payload() const {
    std::string s;
    for (const auto& t : tables) s += "# " + t.name + "\n" + t.csv();
    return s + metadata().dump(2) + "\n";
  }

  std::vector<std::string> write(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Usage, "experiments", "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::string> files;
    auto put = [&](const std::string& name, const std::string& body) {
      std::filesystem::path p = dir / name;
      std::ofstream out(p, std::ios::binary);
      if (!out) fail(ErrorKind::Usage, "experiments", "cannot write " + p.string());
      out << body;
      files.push_back(p.string());
    };
    for (const auto& t : tables) put(id + "_" + t.name + ".csv", t.csv());
    json meta = metadata();
    meta["runtime_seconds"] = runtime_seconds;
    put(id + ".json", meta.dump(2) + "\n");
    return files;
  }
};

inline std::string num(double v) { return format_double(v); }

}  // namespace mfmc
