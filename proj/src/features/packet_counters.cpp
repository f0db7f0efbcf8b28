#include "flowforge/features/packet_counters.hpp"

namespace flowforge {

void PacketCountersState::add_packet(const DecodedPacket& pkt) {
    if (pkt.direction == Direction::in) {
        ++in_counter_;
        in_bytes_ += pkt.wire_length;
    } else {
        ++out_counter_;
        out_bytes_ += pkt.wire_length;
    }
}

std::optional<nlohmann::json> PacketCountersState::collect(double slot_size_s, CollectMode mode) {
    // An interval collect on a quiet flow reports explicit zero rates; a
    // last-ever collect with nothing seen since the previous one has no
    // information to add, so the record stays free of this class.
    if (mode == CollectMode::final_flush && in_counter_ == 0 && out_counter_ == 0) {
        return std::nullopt;
    }
    // bytes / (slot * 128) == bits / (slot * 1024) == kbps
    nlohmann::json out = {
        {"kbps_up", static_cast<double>(out_bytes_) / (slot_size_s * 128.0)},
        {"kbps_dw", static_cast<double>(in_bytes_) / (slot_size_s * 128.0)},
        {"pps_up", static_cast<double>(out_counter_) / slot_size_s},
        {"pps_dw", static_cast<double>(in_counter_) / slot_size_s},
    };
    in_counter_ = 0;
    out_counter_ = 0;
    in_bytes_ = 0;
    out_bytes_ = 0;
    return out;
}

size_t PacketCountersState::approximate_size() const {
    return sizeof(*this);
}

}  // namespace flowforge
