// SPDX-License-Identifier: Apache-2.0
#include <swirl/hash.hpp>

#include <array>
#include <cstring>

namespace swirl
{

namespace
{

constexpr std::uint64_t P1 = 0x9E3779B185EBCA87ULL;
constexpr std::uint64_t P2 = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t P3 = 0x165667B19E3779F9ULL;
constexpr std::uint64_t P4 = 0x85EBCA77C2B2AE63ULL;
constexpr std::uint64_t P5 = 0x27D4EB2F165667C5ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int r) noexcept
{
    return (x << r) | (x >> (64 - r));
}

std::uint64_t read64(const unsigned char* p) noexcept
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::uint32_t read32(const unsigned char* p) noexcept
{
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16)
           | (std::uint32_t(p[3]) << 24);
}

std::uint64_t round(std::uint64_t acc, std::uint64_t input) noexcept
{
    acc += input * P2;
    acc = rotl(acc, 31);
    return acc * P1;
}

std::uint64_t merge_round(std::uint64_t acc, std::uint64_t val) noexcept
{
    acc ^= round(0, val);
    return acc * P1 + P4;
}

} // namespace

std::uint64_t xxh64(std::string_view data, std::uint64_t seed) noexcept
{
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const auto* const end = p + data.size();
    std::uint64_t h = 0;

    if (data.size() >= 32)
    {
        std::uint64_t v1 = seed + P1 + P2;
        std::uint64_t v2 = seed + P2;
        std::uint64_t v3 = seed;
        std::uint64_t v4 = seed - P1;
        const auto* const limit = end - 32;
        do
        {
            v1 = round(v1, read64(p));
            v2 = round(v2, read64(p + 8));
            v3 = round(v3, read64(p + 16));
            v4 = round(v4, read64(p + 24));
            p += 32;
        } while (p <= limit);
        h = rotl(v1, 1) + rotl(v2, 7) + rotl(v3, 12) + rotl(v4, 18);
        h = merge_round(h, v1);
        h = merge_round(h, v2);
        h = merge_round(h, v3);
        h = merge_round(h, v4);
    }
    else
    {
        h = seed + P5;
    }

    h += static_cast<std::uint64_t>(data.size());

    while (p + 8 <= end)
    {
        h ^= round(0, read64(p));
        h = rotl(h, 27) * P1 + P4;
        p += 8;
    }
    if (p + 4 <= end)
    {
        h ^= static_cast<std::uint64_t>(read32(p)) * P1;
        h = rotl(h, 23) * P2 + P3;
        p += 4;
    }
    while (p < end)
    {
        h ^= (*p) * P5;
        h = rotl(h, 11) * P1;
        ++p;
    }

    h ^= h >> 33;
    h *= P2;
    h ^= h >> 29;
    h *= P3;
    h ^= h >> 32;
    return h;
}

std::string to_hex64(std::uint64_t value)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i)
    {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

HashBuilder& HashBuilder::add(std::string_view field)
{
    add(static_cast<std::int64_t>(field.size()));
    _buffer.append(field);
    return *this;
}

HashBuilder& HashBuilder::add(std::int64_t value)
{
    std::array<char, 8> bytes {};
    auto v = static_cast<std::uint64_t>(value);
    for (auto& b: bytes)
    {
        b = static_cast<char>(v & 0xFF);
        v >>= 8;
    }
    _buffer.append(bytes.data(), bytes.size());
    return *this;
}

} // namespace swirl
