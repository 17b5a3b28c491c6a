#pragma once

// records.csv and manifest.json emission.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "superres/error.hpp"

namespace superres {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

using CsvCell = std::variant<std::int64_t, double, std::string, bool>;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<CsvCell> row) {
    if (row.size() != header_.size())
      throw Error(ErrorCode::invalid_argument, "CSV row has " + std::to_string(row.size()) + " cells, header has " +
                                                   std::to_string(header_.size()));
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + csv_escape(header_[i]);
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) out += format_double(v);
              else if constexpr (std::is_same_v<T, bool>) out += v ? "true" : "false";
              else if constexpr (std::is_same_v<T, std::string>) out += csv_escape(v);
              else out += std::to_string(v);
            },
            row[i]);
      }
      out += '\n';
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::invalid_argument, "cannot open " + path.string() + " for writing");
    f << str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point clock_start = std::chrono::steady_clock::now();
  nlohmann::json outputs = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return {{"command", command},
            {"seed", seed},
            {"params", params},
            {"started_at", utc_timestamp(started)},
            {"duration_s", elapsed},
            {"schema_version", kSchemaVersion},
            {"versions",
             {{"superres", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"compiler", __VERSION__}}},
            {"outputs", outputs},
            {"summary", summary}};
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::invalid_argument, "cannot open " + path.string() + " for writing");
    f << to_json().dump(2) << '\n';
  }
};

}  // namespace superres
