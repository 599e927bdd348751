// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace editduet {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Standard base64 with padding.
std::string base64_encode(std::string_view bytes);

/// 64-bit FNV-1a. Used for seeding, never for integrity.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace editduet
