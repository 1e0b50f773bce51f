#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vt {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace vt
