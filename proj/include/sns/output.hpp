// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SNS-RSMA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Long-format result tables written as CSV or JSON. Every row starts with the
// hash of the configuration that produced it; a table refuses rows from a
// different configuration.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sns/errors.hpp"

namespace sns {

enum class OutputFormat { kCsv, kJson };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  throw ValidationError("format must be csv or json");
}

using Cell = std::variant<std::int64_t, double, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

class ResultTable {
 public:
  ResultTable(std::string name, std::string config_hash, std::vector<std::string> columns)
      : name_(std::move(name)), hash_(std::move(config_hash)), columns_(std::move(columns)) {}

  const std::string& name() const { return name_; }
  const std::string& config_hash() const { return hash_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  size_t size() const { return rows_.size(); }

  void add(const std::string& config_hash, std::vector<Cell> row) {
    if (config_hash != hash_) {
      throw ValidationError("table " + name_ + " holds config " + hash_ + ", refusing " + config_hash);
    }
    if (row.size() != columns_.size()) throw DimensionError("row width differs from table " + name_);
    rows_.push_back(std::move(row));
  }

  /// Value of column `col` in row `r`.
  const Cell& at(size_t r, const std::string& col) const {
    for (size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c] == col) return rows_[r][c];
    }
    throw ValidationError("no column " + col + " in table " + name_);
  }

  std::string to_csv() const {
    std::string out = "config_hash";
    for (const auto& c : columns_) out += "," + c;
    out += "\n";
    for (const auto& r : rows_) {
      out += hash_;
      for (const auto& c : r) out += "," + format_cell(c);
      out += "\n";
    }
    return out;
  }

  std::string serialize(OutputFormat f) const {
    if (f == OutputFormat::kCsv) return to_csv();
    // keep column order in the JSON rows
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows_) {
      nlohmann::ordered_json o;
      o["config_hash"] = hash_;
      for (size_t c = 0; c < columns_.size(); ++c) {
        std::visit([&](const auto& v) { o[columns_[c]] = v; }, r[c]);
      }
      arr.push_back(std::move(o));
    }
    return arr.dump(1) + "\n";
  }

  /// Writes `<dir>/<name>.<ext>`; returns the path.
  std::filesystem::path write(const std::filesystem::path& dir, OutputFormat f) const {
    std::filesystem::create_directories(dir);
    const auto path = dir / (name_ + (f == OutputFormat::kCsv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << serialize(f);
    return path;
  }

 private:
  std::string name_;
  std::string hash_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

inline double cell_double(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw ValidationError("cell is not numeric");
}

}  // namespace sns
