// Copyright 2026 The laprate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LAPRATE_IO_RECORDS_H_
#define LAPRATE_IO_RECORDS_H_

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "laprate/error.h"

namespace laprate::io {

// Line records: whitespace-separated key:value fields, one record per line.
// Blank lines and lines starting with '#' are ignored by the reader.
class Record {
 public:
  Record& add(std::string key, std::string value) {
    fields_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Record& add(std::string key, double value);
  Record& add(std::string key, long long value) {
    return add(std::move(key), std::to_string(value));
  }

  const std::vector<std::pair<std::string, std::string>>& fields() const {
    return fields_;
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : fields_)
      if (k == key) return v;
    return std::nullopt;
  }

  bool has(const std::string& key) const { return get(key).has_value(); }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::kFormat, "record is missing field '" + key + "'");
    return *v;
  }

  double require_double(const std::string& key) const;
  long long require_int(const std::string& key) const;

  std::string to_line() const {
    std::string line;
    for (const auto& [k, v] : fields_) {
      if (!line.empty()) line.push_back(' ');
      line += k;
      line.push_back(':');
      line += v;
    }
    return line;
  }

  static Record parse(const std::string& line) {
    Record r;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0)
        throw Error(ErrorCode::kFormat, "malformed field '" + token + "'");
      r.add(token.substr(0, colon), token.substr(colon + 1));
    }
    return r;
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

// Shortest text that round-trips the binary64 value.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw Error(ErrorCode::kFormat, "not a number: '" + text + "'");
  return v;
}

inline Record& Record::add(std::string key, double value) {
  return add(std::move(key), format_double(value));
}

inline double Record::require_double(const std::string& key) const {
  return parse_double(require(key));
}

inline long long Record::require_int(const std::string& key) const {
  const std::string text = require(key);
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size())
    throw Error(ErrorCode::kFormat, "not an integer: '" + text + "'");
  return v;
}

inline std::vector<Record> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(Record::parse(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_records(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  for (const auto& r : records) out << r.to_line() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace laprate::io

#endif  // LAPRATE_IO_RECORDS_H_
