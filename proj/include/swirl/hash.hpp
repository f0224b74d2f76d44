// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace swirl
{

/// Seed used for every content hash the library writes to disk.
inline constexpr std::uint64_t kContentHashSeed = 0;

/// XXH64 (xxHash, 64-bit variant). Byte-order independent: input is read little-endian.
std::uint64_t xxh64(std::string_view data, std::uint64_t seed = kContentHashSeed) noexcept;

/// 16 lowercase hex digits, zero padded.
std::string to_hex64(std::uint64_t value);

/// Canonical byte string for hashing. Fields are length-prefixed: "ab"+"c" != "a"+"bc".
class HashBuilder
{
  public:
    HashBuilder& add(std::string_view field);
    HashBuilder& add(std::int64_t value);
    std::uint64_t digest() const noexcept { return xxh64(_buffer); }
    std::string hex() const { return to_hex64(digest()); }

  private:
    std::string _buffer;
};

} // namespace swirl
