#include "flowforge/features/tcp_counters.hpp"

#include <algorithm>

namespace flowforge {

namespace {

// Sequence-space comparison tolerant of 32-bit wraparound.
bool seq_before(uint32_t a, uint32_t b) {
    return static_cast<int32_t>(a - b) < 0;
}

}  // namespace

void TCPCountersState::add_packet(const DecodedPacket& pkt) {
    if (!pkt.is_tcp) {
        ++skipped_non_tcp_;
        return;
    }
    seen_since_collect_ = true;
    if (pkt.tcp_flags.syn) ++syn_;
    if (pkt.tcp_flags.ack) ++ack_;
    if (pkt.tcp_flags.fin) ++fin_;
    if (pkt.tcp_flags.rst) ++rst_;
    if (pkt.tcp_flags.psh) ++psh_;
    if (pkt.tcp_flags.urg) ++urg_;

    const size_t d = static_cast<size_t>(pkt.direction);
    last_window_[d] = pkt.tcp_window;
    max_window_[d] = std::max(max_window_[d], pkt.tcp_window);

    if (pkt.data_length > 0) {
        if (payload_seen_[d] && seq_before(pkt.tcp_seq, next_expected_[d])) {
            ++retrans_[d];
        }
        const uint32_t end = pkt.tcp_seq + pkt.data_length;
        if (!payload_seen_[d] || seq_before(next_expected_[d], end)) {
            next_expected_[d] = end;
        }
        payload_seen_[d] = true;
    }
}

std::optional<nlohmann::json> TCPCountersState::collect(double, CollectMode mode) {
    if (mode == CollectMode::final_flush && !seen_since_collect_) {
        return std::nullopt;
    }
    seen_since_collect_ = false;
    constexpr size_t in = static_cast<size_t>(Direction::in);
    constexpr size_t out = static_cast<size_t>(Direction::out);
    nlohmann::json j = {
        {"syn", syn_}, {"ack", ack_}, {"fin", fin_},
        {"rst", rst_}, {"psh", psh_}, {"urg", urg_},
        {"retrans_up", retrans_[out]},
        {"retrans_dw", retrans_[in]},
        {"win_last_up", last_window_[out]},
        {"win_last_dw", last_window_[in]},
        {"win_max_up", max_window_[out]},
        {"win_max_dw", max_window_[in]},
    };
    syn_ = ack_ = fin_ = rst_ = psh_ = urg_ = 0;
    retrans_[0] = retrans_[1] = 0;
    max_window_[0] = max_window_[1] = 0;
    return j;
}

size_t TCPCountersState::approximate_size() const {
    return sizeof(*this);
}

}  // namespace flowforge
