/*
 *  Copyright 2026 The plaplab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */


#pragma once

// Flat "key = value" experiment configuration with dotted section prefixes.
// Lines starting with '#' are comments; list values are comma separated.

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plaplab/error.hpp"

namespace plaplab {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>") {
    Config c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string s = trim(line.substr(0, line.find('#')));
      if (s.empty()) continue;
      const auto eq = s.find('=');
      require(eq != std::string::npos, ErrorKind::config,
              source + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      require(!key.empty(), ErrorKind::config,
              source + ":" + std::to_string(lineno) + ": empty key");
      require(!c.values_.count(key), ErrorKind::config,
              source + ":" + std::to_string(lineno) + ": duplicate key " + key);
      c.values_[key] = value;
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string str(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  std::string str(const std::string& key) const {
    require(has(key), ErrorKind::config, key + ": required key missing");
    return str(key, "");
  }

  double num(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, str(key)) : (used_.insert(key), fallback);
  }
  double num(const std::string& key) const { return to_double(key, str(key)); }

  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? to_int(key, str(key)) : (used_.insert(key), fallback);
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    std::vector<double> out;
    std::istringstream is(str(key));
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(to_double(key, trim(item)));
    require(!out.empty(), ErrorKind::config, key + ": empty list");
    return out;
  }

  /// Keys present in the file that no accessor asked for.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorKind::config,
            key + ": expected a number, got '" + v + "'");
    return out;
  }
  static long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorKind::config,
            key + ": expected an integer, got '" + v + "'");
    return out;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace plaplab
