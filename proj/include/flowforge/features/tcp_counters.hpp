#pragma once

#include "flowforge/features/feature.hpp"

namespace flowforge {

// TCP-level accounting: flag counters, advertised window tracking, and a
// per-direction retransmission heuristic. Flag and retransmission counters
// are per-interval deltas; the sequence tracking that backs the heuristic
// persists for the flow's lifetime.
//
// Retransmission rule: a payload-bearing packet whose sequence number falls
// below the direction's next expected byte (highest seq+len seen with
// payload) counts as one retransmission.
class TCPCountersState final : public FeatureState {
public:
    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    uint64_t retransmissions(Direction dir) const {
        return retrans_[static_cast<size_t>(dir)];
    }
    uint64_t skipped_non_tcp() const { return skipped_non_tcp_; }

private:
    // Interval-scoped counters.
    uint64_t syn_ = 0, ack_ = 0, fin_ = 0, rst_ = 0, psh_ = 0, urg_ = 0;
    uint64_t retrans_[2] = {0, 0};       // indexed by Direction
    uint16_t max_window_[2] = {0, 0};
    uint64_t skipped_non_tcp_ = 0;
    bool seen_since_collect_ = false;

    // Flow-lifetime trackers.
    uint16_t last_window_[2] = {0, 0};
    uint32_t next_expected_[2] = {0, 0};
    bool payload_seen_[2] = {false, false};
};

}  // namespace flowforge
