#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pianolm {

/// 64-bit FNV-1a. Used to fingerprint resolved configurations.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string digest_hex(std::uint64_t digest);
std::uint64_t parse_digest_hex(std::string_view hex);

}  // namespace pianolm
