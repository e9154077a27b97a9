// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace popkit {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CsvWriter: cell count does not match header");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line.push_back(',');
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  if (!manifest_.empty()) os << "#manifest " << manifest_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& r : rows_) os << r << "\n";
  return os.str();
}

void CsvWriter::write(const std::string& path) const { atomic_write(path, str()); }

std::string RunManifest::to_json() const {
  std::ostringstream os;
  os << "{\"schema\":1,\"version\":\"" << kVersion << "\",\"command\":\"" << command
     << "\",\"seed\":" << seed << ",\"threads\":" << threads
     << ",\"wall_time_s\":" << format_double(wall_time_s) << ",\"config\":"
     << (config_json.empty() ? "null" : config_json) << ",\"outputs\":[";
  for (std::size_t i = 0; i < outputs.size(); ++i)
    os << (i ? "," : "") << "\"" << outputs[i] << "\"";
  os << "]}";
  return os.str();
}

}  // namespace popkit
