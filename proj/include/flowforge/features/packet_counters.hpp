#pragma once

#include "flowforge/features/feature.hpp"

namespace flowforge {

// Per-interval packet and byte counters, reported as upstream/downstream
// throughput (kbps) and packet rates (pps). Counters reset on every collect
// so the rate formulas always divide a per-interval delta by the slot size.
class PacketCountersState final : public FeatureState {
public:
    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    uint64_t in_counter() const { return in_counter_; }
    uint64_t out_counter() const { return out_counter_; }
    uint64_t in_bytes() const { return in_bytes_; }
    uint64_t out_bytes() const { return out_bytes_; }

private:
    uint64_t in_counter_ = 0;
    uint64_t out_counter_ = 0;
    uint64_t in_bytes_ = 0;
    uint64_t out_bytes_ = 0;
};

}  // namespace flowforge
