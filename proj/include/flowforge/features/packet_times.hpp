#pragma once

#include <vector>

#include "flowforge/features/feature.hpp"

namespace flowforge {

// Arrival timestamps per direction, capped to bound worst-case state, reduced
// to interarrival summary statistics at collect time. The cap is a profiling
// knob: transport-style features need per-packet history, and this class makes
// that cost explicit and tunable.
class PacketTimesState final : public FeatureState {
public:
    static constexpr size_t kDefaultCap = 8192;

    explicit PacketTimesState(size_t cap_per_direction = kDefaultCap, bool emit_raw = false);

    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    size_t stored_in() const { return in_times_.size(); }
    size_t stored_out() const { return out_times_.size(); }

private:
    nlohmann::json direction_stats(const std::vector<uint64_t>& times, uint64_t seen) const;

    size_t cap_;
    bool emit_raw_;
    std::vector<uint64_t> in_times_;
    std::vector<uint64_t> out_times_;
    uint64_t seen_in_ = 0;   // arrivals this interval including beyond-cap drops
    uint64_t seen_out_ = 0;
};

}  // namespace flowforge
