#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace flowforge {

std::string base64_encode(std::span<const uint8_t> data);

// FNV-1a over an arbitrary byte string; used for config fingerprints.
uint64_t fnv1a_64(std::span<const uint8_t> data);
uint64_t fnv1a_64(const std::string& data);

}  // namespace flowforge
