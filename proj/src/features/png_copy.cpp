#include "flowforge/features/png_copy.hpp"

#include "flowforge/png.hpp"
#include "flowforge/util.hpp"

namespace flowforge {

PngCopyState::PngCopyState(uint32_t width, uint32_t height, CopyLayers layers)
    : width_(width),
      height_(height),
      acq_(static_cast<size_t>(width) * height, layers) {}

void PngCopyState::encode_now() {
    pixels_ = acq_.buffer();
    encoded_ = png_encode_gray8(pixels_, width_, height_);
    encoded_done_ = true;
}

void PngCopyState::add_packet(const DecodedPacket& pkt) {
    if (acq_.absorb(pkt)) {
        encode_now();
    }
}

std::optional<nlohmann::json> PngCopyState::collect(double, CollectMode mode) {
    if (emitted_) {
        return std::nullopt;
    }
    const bool truncated = !acq_.complete();
    if (truncated) {
        if (mode != CollectMode::final_flush) {
            return std::nullopt;
        }
        acq_.pad_to_target();
        encode_now();
    }
    emitted_ = true;
    return nlohmann::json{
        {"png_b64", base64_encode(encoded_)},
        {"width", width_},
        {"height", height_},
        {"layers", copy_layers_name(acq_.layers())},
        {"truncated", truncated},
    };
}

size_t PngCopyState::approximate_size() const {
    return sizeof(*this) + acq_.capacity_bytes() + pixels_.capacity() + encoded_.capacity();
}

}  // namespace flowforge
