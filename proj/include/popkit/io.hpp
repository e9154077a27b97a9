// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_IO_HPP
#define POPKIT_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace popkit {

inline constexpr const char* kVersion = "0.1.0";

/// Serializes a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Writes content to path atomically (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);

/// CSV with a header row and optional leading '#manifest' comment line.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void set_manifest_comment(const std::string& json_line) { manifest_ = json_line; }
  void add_row(const std::vector<std::string>& cells);
  std::vector<std::string> row_builder() const { return {}; }
  void write(const std::string& path) const;
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::string manifest_;
  std::vector<std::string> rows_;
};

struct RunManifest {
  std::string command;
  std::string config_json;  // canonical config or flag summary
  std::uint64_t seed = 0;
  int threads = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

}  // namespace popkit

#endif
