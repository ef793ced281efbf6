// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/core/hash.hpp"

#include <array>
#include <fstream>

#include "dgkd/core/error.hpp"

namespace dgkd {

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string hash_string(std::string_view text) {
  Fnv1a h;
  h.update(text);
  return to_hex(h.digest());
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  Fnv1a h;
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    h.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return to_hex(h.digest());
}

}  // namespace dgkd
