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

// Binary field files. Layout, all little-endian:
//   "PLAPF1" | u64 dim | f64 lo, hi per spatial axis | f64 t_lo, t_hi |
//   u64 cells per spatial axis | u64 time steps | f64 p | f64 eps |
//   f64 values in [level][i0][i1] order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "plaplab/grid.hpp"

namespace plaplab {

inline constexpr char kFieldMagic[] = "PLAPF1";

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64(const char* section) {
    need(8, section);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64(const char* section) { return std::bit_cast<double>(u64(section)); }
  std::string raw(std::size_t n, const char* section) {
    need(n, section);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* section) const {
    require(bytes_.size() - pos_ >= n, ErrorKind::parse,
            std::string("truncated field file: missing ") + section);
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

struct FieldFile {
  SpaceTimeField field;
  double p = 0.0;
  double eps = 0.0;
  std::vector<std::string> warnings;
};

inline std::string encode_field(const SpaceTimeField& f, double p, double eps) {
  const Grid& g = f.grid;
  std::string out(kFieldMagic, 6);
  detail::put_u64(out, static_cast<std::uint64_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    detail::put_f64(out, g.axis(a).lo);
    detail::put_f64(out, g.axis(a).hi);
  }
  detail::put_f64(out, g.time().lo);
  detail::put_f64(out, g.time().hi);
  for (int a = 0; a < g.dim(); ++a) detail::put_u64(out, static_cast<std::uint64_t>(g.axis(a).cells));
  detail::put_u64(out, static_cast<std::uint64_t>(g.time().cells));
  detail::put_f64(out, p);
  detail::put_f64(out, eps);
  out.reserve(out.size() + 8 * f.values.size());
  for (double v : f.values) detail::put_f64(out, v);
  return out;
}

inline FieldFile decode_field(const std::string& bytes) {
  detail::ByteReader r(bytes);
  require(r.raw(6, "magic") == std::string(kFieldMagic, 6), ErrorKind::parse,
          "not a field file (bad magic)");
  const std::uint64_t dim = r.u64("dimension");
  require(dim == 1 || dim == 2, ErrorKind::parse, "field file dimension must be 1 or 2");
  std::array<Axis, 2> space{};
  for (std::uint64_t a = 0; a < dim; ++a) {
    space[a].lo = r.f64("axis extents");
    space[a].hi = r.f64("axis extents");
  }
  Axis time;
  time.lo = r.f64("axis extents");
  time.hi = r.f64("axis extents");
  for (std::uint64_t a = 0; a < dim; ++a) {
    const std::uint64_t c = r.u64("counts");
    require(c >= 8 && c < (1u << 24), ErrorKind::parse, "implausible cell count in field file");
    space[a].cells = static_cast<int>(c);
  }
  const std::uint64_t nt = r.u64("counts");
  require(nt >= 8 && nt < (1u << 24), ErrorKind::parse, "implausible step count in field file");
  time.cells = static_cast<int>(nt);
  FieldFile out;
  out.p = r.f64("p");
  out.eps = r.f64("eps");
  const Grid g(static_cast<int>(dim), space, time);
  std::vector<double> values(g.size());
  require(r.remaining() >= 8 * values.size(), ErrorKind::parse,
          "truncated field file: missing data");
  for (double& v : values) v = r.f64("data");
  out.field = SpaceTimeField(g, std::move(values));
  if (!(out.p > 1.0 && out.p <= 2.0))
    out.warnings.push_back("header p = " + std::to_string(out.p) + " lies outside (1, 2]");
  return out;
}

inline void export_field(const SpaceTimeField& f, double p, double eps, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::io, "cannot open " + path + " for writing");
  const std::string bytes = encode_field(f, p, eps);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(os), ErrorKind::io, "write failed for " + path);
}

inline FieldFile import_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::io, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

}  // namespace plaplab
