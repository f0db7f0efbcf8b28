#include "flowforge/features/video_segments.hpp"

namespace flowforge {

VideoSegmentsState::VideoSegmentsState(bool strict_last_pkt) : strict_last_pkt_(strict_last_pkt) {}

void VideoSegmentsState::add_packet(const DecodedPacket& pkt) {
    if (pkt.direction == Direction::out) {
        const bool is_request = (pkt.is_tcp && pkt.data_length > 0) ||
                                (!pkt.is_tcp && static_cast<int64_t>(pkt.data_length) > kQuicHeaderLen);
        if (!is_request) {
            return;
        }
        if (running_.ts_start != 0 && running_.down_pkts > 0) {
            running_.ts_end = running_.last_pkt;
            completed_.push_back(running_);
        }
        running_ = VideoSegment{};
        running_.len = static_cast<int64_t>(pkt.wire_length);
        running_.ts_start = pkt.timestamp_ns;
        running_.seq = static_cast<int64_t>(pkt.tcp_seq);
    } else if (pkt.data_length > 0) {
        ++running_.down_pkts;
        running_.down_bytes += static_cast<int64_t>(pkt.data_length);
        if (static_cast<int64_t>(pkt.tcp_seq) > running_.max_d_seq) {
            running_.max_d_seq = static_cast<int64_t>(pkt.tcp_seq);
        }
        const uint64_t floor = strict_last_pkt_ ? running_.last_pkt : running_.ts_end;
        if (pkt.timestamp_ns > floor) {
            running_.last_pkt = pkt.timestamp_ns;
        }
    }
}

nlohmann::json segment_to_json(const VideoSegment& seg) {
    return {
        {"len", seg.len},
        {"seq", seg.seq},
        {"ts_start_ns", seg.ts_start},
        {"ts_end_ns", seg.ts_end},
        {"down_pkts", seg.down_pkts},
        {"down_bytes", seg.down_bytes},
        {"max_d_seq", seg.max_d_seq},
    };
}

std::optional<nlohmann::json> VideoSegmentsState::collect(double, CollectMode mode) {
    if (mode == CollectMode::final_flush && running_.ts_start != 0 && running_.down_pkts > 0) {
        // The flow is over; the running segment will never see its closing
        // request, so finalize it here.
        running_.ts_end = running_.last_pkt;
        completed_.push_back(running_);
        running_ = VideoSegment{};
    }
    if (completed_.empty()) {
        return std::nullopt;
    }
    nlohmann::json segs = nlohmann::json::array();
    for (const VideoSegment& seg : completed_) {
        segs.push_back(segment_to_json(seg));
    }
    completed_.clear();
    return nlohmann::json{{"segments", std::move(segs)}};
}

size_t VideoSegmentsState::approximate_size() const {
    return sizeof(*this) + completed_.capacity() * sizeof(VideoSegment);
}

}  // namespace flowforge
