#pragma once

#include <vector>

#include "flowforge/features/feature.hpp"

namespace flowforge {

// Passive TCP latency estimation: the two handshake deltas
// (SYN→SYN-ACK seen outbound-side, SYN-ACK→ACK seen inbound-side) plus
// ongoing ack-matched RTT samples. One measurement is outstanding at any
// time, and a retransmission touching the measured segment discards it
// (Karn's rule), so samples are never polluted by ambiguous acks.
// Jitter is the mean absolute difference of consecutive samples within
// the interval.
class LatencyCountersState final : public FeatureState {
public:
    static constexpr size_t kDefaultCap = 1024;

    explicit LatencyCountersState(size_t sample_cap = kDefaultCap);

    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    size_t sample_count() const { return samples_ns_.size(); }

private:
    size_t cap_;

    // Handshake timestamps; 0 means not yet observed.
    uint64_t syn_ts_ = 0;
    uint64_t synack_ts_ = 0;
    uint64_t ack_ts_ = 0;
    bool hs_first_emitted_ = false;
    bool hs_second_emitted_ = false;

    bool seen_since_collect_ = false;

    // Outstanding RTT measurement.
    bool active_ = false;
    uint32_t sample_seq_ = 0;
    uint32_t sample_end_ = 0;
    uint64_t sent_ts_ = 0;

    // Retransmission detection on the outbound payload stream.
    uint32_t next_expected_out_ = 0;
    bool payload_seen_out_ = false;

    std::vector<uint64_t> samples_ns_;
};

}  // namespace flowforge
