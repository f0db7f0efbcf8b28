#include "flowforge/features/bytes_copy.hpp"

#include "flowforge/util.hpp"

namespace flowforge {

const char* copy_layers_name(CopyLayers layers) {
    switch (layers) {
        case CopyLayers::headers: return "headers";
        case CopyLayers::payload: return "payload";
        case CopyLayers::both: return "both";
    }
    return "?";
}

bool parse_copy_layers(const std::string& text, CopyLayers* out) {
    if (text == "headers") {
        *out = CopyLayers::headers;
    } else if (text == "payload") {
        *out = CopyLayers::payload;
    } else if (text == "both") {
        *out = CopyLayers::both;
    } else {
        return false;
    }
    return true;
}

ByteAcquisition::ByteAcquisition(size_t target, CopyLayers layers)
    : target_(target), layers_(layers) {
    buffer_.reserve(target_);
}

void ByteAcquisition::append(std::span<const uint8_t> bytes) {
    const size_t room = target_ - buffer_.size();
    const size_t take = std::min(room, bytes.size());
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.begin() + static_cast<ptrdiff_t>(take));
}

bool ByteAcquisition::absorb(const DecodedPacket& pkt) {
    if (complete()) {
        return false;
    }
    if (layers_ == CopyLayers::headers || layers_ == CopyLayers::both) {
        append(pkt.header_bytes);
    }
    if (layers_ == CopyLayers::payload || layers_ == CopyLayers::both) {
        append(pkt.payload_bytes);
    }
    return complete();
}

void ByteAcquisition::pad_to_target() {
    buffer_.resize(target_, 0);
}

BytesCopyState::BytesCopyState(size_t target, CopyLayers layers) : acq_(target, layers) {}

void BytesCopyState::add_packet(const DecodedPacket& pkt) {
    acq_.absorb(pkt);
}

std::optional<nlohmann::json> BytesCopyState::collect(double, CollectMode mode) {
    if (emitted_) {
        return std::nullopt;
    }
    const bool truncated = !acq_.complete();
    if (truncated) {
        if (mode != CollectMode::final_flush) {
            return std::nullopt;  // still filling; wait for more packets
        }
        acq_.pad_to_target();
    }
    emitted_ = true;
    return nlohmann::json{
        {"data_b64", base64_encode(acq_.buffer())},
        {"size", acq_.target()},
        {"layers", copy_layers_name(acq_.layers())},
        {"truncated", truncated},
    };
}

size_t BytesCopyState::approximate_size() const {
    return sizeof(*this) + acq_.capacity_bytes();
}

}  // namespace flowforge
