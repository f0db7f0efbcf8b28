#pragma once

#include <vector>

#include "flowforge/features/feature.hpp"
#include "flowforge/features/bytes_copy.hpp"

namespace flowforge {

// Flow-to-image representation: the first width*height bytes of the selected
// layers become an 8-bit grayscale PNG. Conversion happens online, inside the
// add_packet call that completes the buffer, so the encoding cost lands on
// the packet path where the profiler can see it. The state keeps the raw
// buffer, the pixel image, and the encoded bytes, mirroring the cost of
// holding an image object alongside the acquisition buffer.
class PngCopyState final : public FeatureState {
public:
    PngCopyState(uint32_t width, uint32_t height, CopyLayers layers);

    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    const ByteAcquisition& acquisition() const { return acq_; }
    const std::vector<uint8_t>& encoded() const { return encoded_; }

private:
    void encode_now();

    uint32_t width_;
    uint32_t height_;
    ByteAcquisition acq_;
    std::vector<uint8_t> pixels_;
    std::vector<uint8_t> encoded_;
    bool encoded_done_ = false;
    bool emitted_ = false;
};

}  // namespace flowforge
