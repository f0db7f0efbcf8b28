#include "flowforge/features/latency_counters.hpp"

#include <algorithm>

namespace flowforge {

namespace {

bool seq_before(uint32_t a, uint32_t b) {
    return static_cast<int32_t>(a - b) < 0;
}

bool ranges_overlap(uint32_t a_lo, uint32_t a_hi, uint32_t b_lo, uint32_t b_hi) {
    return seq_before(a_lo, b_hi) && seq_before(b_lo, a_hi);
}

double to_ms(uint64_t ns) {
    return static_cast<double>(ns) / 1e6;
}

}  // namespace

LatencyCountersState::LatencyCountersState(size_t sample_cap) : cap_(sample_cap) {}

void LatencyCountersState::add_packet(const DecodedPacket& pkt) {
    if (!pkt.is_tcp) {
        return;
    }
    seen_since_collect_ = true;
    const bool out = pkt.direction == Direction::out;

    // Handshake bookkeeping.
    if (out && pkt.tcp_flags.syn && !pkt.tcp_flags.ack) {
        if (syn_ts_ == 0) {
            syn_ts_ = pkt.timestamp_ns;
        }
    } else if (!out && pkt.tcp_flags.syn && pkt.tcp_flags.ack) {
        if (synack_ts_ == 0 && syn_ts_ != 0) {
            synack_ts_ = pkt.timestamp_ns;
        }
    } else if (out && pkt.tcp_flags.ack && !pkt.tcp_flags.syn) {
        if (ack_ts_ == 0 && synack_ts_ != 0) {
            ack_ts_ = pkt.timestamp_ns;
        }
    }

    if (out && pkt.data_length > 0) {
        const uint32_t end = pkt.tcp_seq + pkt.data_length;
        const bool retrans = payload_seen_out_ && seq_before(pkt.tcp_seq, next_expected_out_);
        if (retrans) {
            // Karn: a retransmission overlapping the measured segment makes
            // its eventual ack ambiguous, so the measurement is dropped.
            if (active_ && ranges_overlap(pkt.tcp_seq, end, sample_seq_, sample_end_)) {
                active_ = false;
            }
        } else if (!active_) {
            active_ = true;
            sample_seq_ = pkt.tcp_seq;
            sample_end_ = end;
            sent_ts_ = pkt.timestamp_ns;
        }
        if (!payload_seen_out_ || seq_before(next_expected_out_, end)) {
            next_expected_out_ = end;
        }
        payload_seen_out_ = true;
    }

    if (!out && pkt.tcp_flags.ack && active_ && !seq_before(pkt.tcp_ack, sample_end_)) {
        if (pkt.timestamp_ns >= sent_ts_ && samples_ns_.size() < cap_) {
            samples_ns_.push_back(pkt.timestamp_ns - sent_ts_);
        }
        active_ = false;
    }
}

std::optional<nlohmann::json> LatencyCountersState::collect(double, CollectMode mode) {
    if (mode == CollectMode::final_flush && !seen_since_collect_) {
        return std::nullopt;
    }
    seen_since_collect_ = false;
    nlohmann::json j;

    j["hs_syn_synack_ms"] = nullptr;
    if (!hs_first_emitted_ && syn_ts_ != 0 && synack_ts_ != 0) {
        j["hs_syn_synack_ms"] = to_ms(synack_ts_ - syn_ts_);
        hs_first_emitted_ = true;
    }
    j["hs_synack_ack_ms"] = nullptr;
    if (!hs_second_emitted_ && synack_ts_ != 0 && ack_ts_ != 0) {
        j["hs_synack_ack_ms"] = to_ms(ack_ts_ - synack_ts_);
        hs_second_emitted_ = true;
    }

    if (samples_ns_.empty()) {
        j["rtt_ms"] = nullptr;
    } else {
        std::vector<uint64_t> sorted = samples_ns_;
        std::sort(sorted.begin(), sorted.end());
        uint64_t sum = 0;
        for (uint64_t s : sorted) {
            sum += s;
        }
        j["rtt_ms"] = {
            {"count", sorted.size()},
            {"min_ms", to_ms(sorted.front())},
            {"mean_ms", to_ms(sum) / static_cast<double>(sorted.size())},
            {"median_ms", to_ms(sorted[sorted.size() / 2])},
            {"max_ms", to_ms(sorted.back())},
        };
    }

    if (samples_ns_.size() < 2) {
        j["jitter_ms"] = nullptr;
    } else {
        double acc = 0.0;
        for (size_t i = 1; i < samples_ns_.size(); ++i) {
            const double a = to_ms(samples_ns_[i]);
            const double b = to_ms(samples_ns_[i - 1]);
            acc += a > b ? a - b : b - a;
        }
        j["jitter_ms"] = acc / static_cast<double>(samples_ns_.size() - 1);
    }

    samples_ns_.clear();
    return j;
}

size_t LatencyCountersState::approximate_size() const {
    return sizeof(*this) + samples_ns_.capacity() * sizeof(uint64_t);
}

}  // namespace flowforge
