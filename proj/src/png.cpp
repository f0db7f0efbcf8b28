#include "flowforge/png.hpp"

#include <zlib.h>

#include <cstring>

namespace flowforge {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], std::span<const uint8_t> body) {
    put_u32(out, static_cast<uint32_t>(body.size()));
    const size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
    put_u32(out, crc);
}

}  // namespace

std::vector<uint8_t> png_encode_gray8(std::span<const uint8_t> pixels,
                                      uint32_t width,
                                      uint32_t height) {
    if (static_cast<uint64_t>(width) * height != pixels.size() || width == 0 || height == 0) {
        throw std::invalid_argument("png_encode_gray8: pixel count does not match " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }

    // Raw scanline stream: one filter byte (0 = None) before each row.
    std::vector<uint8_t> scanlines;
    scanlines.reserve(pixels.size() + height);
    for (uint32_t row = 0; row < height; ++row) {
        scanlines.push_back(0);
        const uint8_t* src = pixels.data() + static_cast<size_t>(row) * width;
        scanlines.insert(scanlines.end(), src, src + width);
    }

    uLongf zcap = compressBound(static_cast<uLong>(scanlines.size()));
    std::vector<uint8_t> zdata(zcap);
    const int rc = compress2(zdata.data(), &zcap, scanlines.data(),
                             static_cast<uLong>(scanlines.size()), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) {
        throw std::runtime_error("png_encode_gray8: deflate failed with code " + std::to_string(rc));
    }
    zdata.resize(zcap);

    std::vector<uint8_t> out;
    out.reserve(zdata.size() + 64);
    static const uint8_t signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), signature, signature + 8);

    uint8_t ihdr[13];
    ihdr[0] = static_cast<uint8_t>(width >> 24);
    ihdr[1] = static_cast<uint8_t>(width >> 16);
    ihdr[2] = static_cast<uint8_t>(width >> 8);
    ihdr[3] = static_cast<uint8_t>(width);
    ihdr[4] = static_cast<uint8_t>(height >> 24);
    ihdr[5] = static_cast<uint8_t>(height >> 16);
    ihdr[6] = static_cast<uint8_t>(height >> 8);
    ihdr[7] = static_cast<uint8_t>(height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 0;   // color type: grayscale
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter
    ihdr[12] = 0;  // interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", zdata);
    put_chunk(out, "IEND", {});
    return out;
}

}  // namespace flowforge
