#include "flowforge/features/packet_times.hpp"

#include <algorithm>
#include <cmath>

namespace flowforge {

PacketTimesState::PacketTimesState(size_t cap_per_direction, bool emit_raw)
    : cap_(cap_per_direction), emit_raw_(emit_raw) {}

void PacketTimesState::add_packet(const DecodedPacket& pkt) {
    auto& times = pkt.direction == Direction::in ? in_times_ : out_times_;
    auto& seen = pkt.direction == Direction::in ? seen_in_ : seen_out_;
    ++seen;
    if (times.size() < cap_) {
        times.push_back(pkt.timestamp_ns);
    }
}

nlohmann::json PacketTimesState::direction_stats(const std::vector<uint64_t>& times,
                                                 uint64_t seen) const {
    if (times.size() < 2) {
        return nullptr;
    }
    std::vector<double> gaps;
    gaps.reserve(times.size() - 1);
    for (size_t i = 1; i < times.size(); ++i) {
        gaps.push_back(static_cast<double>(times[i] - times[i - 1]) / 1e6);  // ms
    }
    double min = gaps[0];
    double max = gaps[0];
    double sum = 0.0;
    for (double g : gaps) {
        min = std::min(min, g);
        max = std::max(max, g);
        sum += g;
    }
    const double mean = sum / static_cast<double>(gaps.size());
    double var = 0.0;
    for (double g : gaps) {
        var += (g - mean) * (g - mean);
    }
    var /= static_cast<double>(gaps.size());

    std::vector<double> sorted = gaps;
    const size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<ptrdiff_t>(mid), sorted.end());
    double median = sorted[mid];
    if (sorted.size() % 2 == 0) {
        const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<ptrdiff_t>(mid));
        median = (median + lower) / 2.0;
    }

    nlohmann::json out = {
        {"pkts", seen},
        {"min_ms", min},
        {"mean_ms", mean},
        {"median_ms", median},
        {"max_ms", max},
        {"stddev_ms", std::sqrt(var)},
    };
    if (emit_raw_) {
        out["gaps_ms"] = gaps;
    }
    return out;
}

std::optional<nlohmann::json> PacketTimesState::collect(double, CollectMode mode) {
    if (mode == CollectMode::final_flush && seen_in_ == 0 && seen_out_ == 0) {
        return std::nullopt;
    }
    nlohmann::json out = {
        {"up", direction_stats(out_times_, seen_out_)},
        {"dw", direction_stats(in_times_, seen_in_)},
    };
    in_times_.clear();
    out_times_.clear();
    seen_in_ = 0;
    seen_out_ = 0;
    return out;
}

size_t PacketTimesState::approximate_size() const {
    return sizeof(*this) + (in_times_.capacity() + out_times_.capacity()) * sizeof(uint64_t);
}

}  // namespace flowforge
