#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace flowforge {

// Encodes an 8-bit single-channel grayscale image; pixel i of the input is
// pixel i of the image in row-major order. Throws std::invalid_argument when
// pixels.size() != width*height.
std::vector<uint8_t> png_encode_gray8(std::span<const uint8_t> pixels,
                                      uint32_t width,
                                      uint32_t height);

}  // namespace flowforge
