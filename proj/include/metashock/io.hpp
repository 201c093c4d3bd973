#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "metashock/core.hpp"

#ifndef METASHOCK_VERSION
#define METASHOCK_VERSION "unknown"
#endif

namespace metashock::io {

namespace fs = std::filesystem;

/// 17 significant digits: enough to round-trip any double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest text that round-trips, for file names and labels.
inline std::string format_label(double v) {
  char buf[40];
  const double a = std::abs(v);
  const bool fixed = a == 0.0 || (a >= 1e-4 && a < 1e15);
  const auto res = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw Error(ErrorKind::InvalidArgument, "row width does not match header");
    rows_.push_back(row);
  }

  std::string csv() const {
    std::string out;
    for (std::size_t j = 0; j < header_.size(); ++j) out += (j ? "," : "") + header_[j];
    out += '\n';
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (j) out += ',';
        out += format_number(r[j]);
      }
      out += '\n';
    }
    return out;
  }

  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// Snapshot stack as a wide table: x, then one column per snapshot named t=<time>.
inline Table snapshot_table(const std::vector<GridField>& snaps) {
  if (snaps.empty()) throw Error(ErrorKind::InvalidArgument, "no snapshots to write");
  std::vector<std::string> header{"x"};
  for (const auto& s : snaps) header.push_back("t=" + format_number(s.time));
  Table t(header);
  const Grid& g = snaps.front().grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<double> row{g.x(i)};
    for (const auto& s : snaps) row.push_back(s[i]);
    t.add(row);
  }
  return t;
}

/// An output directory and the manifest that indexes every file written through it.
class OutputDir {
 public:
  OutputDir(fs::path root, std::string command) : root_(std::move(root)), start_(Clock::now()) {
    fs::create_directories(root_);
    manifest_["command"] = std::move(command);
    manifest_["tool_version"] = METASHOCK_VERSION;
    manifest_["output_dir"] = fs::absolute(root_).string();
    manifest_["files"] = nlohmann::json::array();
  }

  const fs::path& root() const { return root_; }

  void write_text(const std::string& relative, const std::string& body) {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    std::lock_guard<std::mutex> lock(mutex_);
    manifest_["files"].push_back({{"path", relative}, {"bytes", body.size()}, {"fnv1a64", hex64(fnv1a(body))}});
  }

  void write_csv(const std::string& relative, const Table& table) { write_text(relative, table.csv()); }

  void write_json(const std::string& relative, const nlohmann::json& j) { write_text(relative, j.dump(2) + "\n"); }

  /// Extra manifest fields (spec, grid, scheme, ...).
  nlohmann::json& meta() { return manifest_; }

  /// Writes manifest.json; files are listed in path order so the index is stable.
  void finish() {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& files = manifest_["files"];
    std::sort(files.begin(), files.end(),
              [](const nlohmann::json& a, const nlohmann::json& b) { return a["path"] < b["path"]; });
    manifest_["wall_time"] = std::chrono::duration<double>(Clock::now() - start_).count();
    std::ofstream out(root_ / "manifest.json");
    out << manifest_.dump(2) << "\n";
  }

 private:
  using Clock = std::chrono::steady_clock;
  fs::path root_;
  Clock::time_point start_;
  nlohmann::json manifest_;
  std::mutex mutex_;
};

inline nlohmann::json spec_json(const ProblemSpec& spec) {
  return {{"epsilon", spec.epsilon}, {"ell", spec.ell},         {"u_minus", spec.u_minus},
          {"u_plus", spec.u_plus},   {"flux", spec.flux.label}};
}

inline nlohmann::json grid_json(const Grid& g) { return {{"n_cells", g.n_cells()}, {"ell", g.ell()}}; }

}  // namespace metashock::io
