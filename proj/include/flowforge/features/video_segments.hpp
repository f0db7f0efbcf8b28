#pragma once

#include <vector>

#include "flowforge/features/feature.hpp"

namespace flowforge {

// One burst of downstream bytes delimited by consecutive upstream requests.
struct VideoSegment {
    int64_t len = 0;          // wire length of the opening request packet
    int64_t seq = 0;          // TCP sequence of the opening request (0 for UDP)
    uint64_t ts_start = 0;    // ns; request packet timestamp
    uint64_t ts_end = 0;      // ns; set when the segment is finalized
    uint64_t last_pkt = 0;    // ns; latest downstream payload timestamp
    int64_t down_pkts = 0;
    int64_t down_bytes = 0;
    int64_t max_d_seq = 0;

    bool operator==(const VideoSegment&) const = default;
};

// Segment detection for encrypted video streams. An upstream packet carrying
// data (TCP payload > 0, or UDP payload above the QUIC header threshold)
// closes the running segment — if one had started and saw downstream
// payload — and opens a new one; downstream payload packets accumulate into
// the running segment.
//
// The downstream branch refreshes last_pkt only when the timestamp exceeds
// ts_end, which is zero while a segment runs, so the guard is near-vacuous;
// strict mode compares against last_pkt instead. Both behaviors are kept
// because the near-vacuous guard is the reference algorithm as published.
class VideoSegmentsState final : public FeatureState {
public:
    static constexpr int64_t kQuicHeaderLen = 100;

    explicit VideoSegmentsState(bool strict_last_pkt = false);

    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    const std::vector<VideoSegment>& completed() const { return completed_; }
    const VideoSegment& running() const { return running_; }

private:
    bool strict_last_pkt_;
    std::vector<VideoSegment> completed_;
    VideoSegment running_;
};

nlohmann::json segment_to_json(const VideoSegment& seg);

}  // namespace flowforge
