// Copyright 2026 The ICPC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "icpc/error.hpp"

namespace icpc::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw FileNotFound("file not found: '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

template <typename V>
void write_pod(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename V>
V read_pod(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw FormatError("unexpected end of file");
  return v;
}

inline void write_string(std::ostream& out, std::string_view s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::size_t limit = 1u << 30) {
  const auto n = read_pod<std::uint32_t>(in);
  if (n > limit) throw FormatError("string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw FormatError("unexpected end of file");
  return s;
}

inline void write_floats(std::ostream& out, const float* data, std::size_t n) {
  write_pod<std::uint64_t>(out, n);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
}

inline std::vector<float> read_floats(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 34)) throw FormatError("array length out of range");
  std::vector<float> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw FormatError("unexpected end of file");
  return v;
}

// Fixed 8-byte magic followed by a u32 format version.
inline void write_header(std::ostream& out, std::string_view magic,
                         std::uint32_t version) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  write_pod(out, version);
}

inline void read_header(std::istream& in, std::string_view magic,
                        std::uint32_t version, const std::string& what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != magic) throw FormatError(what + ": bad magic header");
  const auto v = read_pod<std::uint32_t>(in);
  if (v != version) {
    throw VersionError(what + ": format version " + std::to_string(v) +
                       ", expected " + std::to_string(version));
  }
}

}  // namespace icpc::io
