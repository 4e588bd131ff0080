#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sbg {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

// Lowercase hex HMAC-SHA-256.
std::string hmac_sha256_hex(const std::vector<unsigned char>& key, std::string_view data);

// "deadbeef" -> bytes; throws on odd length or non-hex characters.
std::vector<unsigned char> parse_hex(std::string_view hex);

inline const std::string kZeroHash(64, '0');

} // namespace sbg
