#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace metasim {

using Hash32 = std::array<std::uint8_t, 32>;

Hash32 sha256(std::span<const std::uint8_t> data);
Hash32 sha256(const std::vector<std::uint8_t>& data);
Hash32 sha256_str(const std::string& data);

std::string to_hex(const Hash32& h);

// Parses exactly 64 lowercase/uppercase hex chars; returns false on malformed input.
bool from_hex(const std::string& hex, Hash32& out);

constexpr Hash32 zero_hash() { return Hash32{}; }

}  // namespace metasim
