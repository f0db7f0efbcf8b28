#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "flowforge/features/bytes_copy.hpp"
#include "flowforge/features/feature.hpp"
#include "flowforge/features/latency_counters.hpp"
#include "flowforge/features/packet_counters.hpp"
#include "flowforge/features/packet_times.hpp"
#include "flowforge/features/png_copy.hpp"
#include "flowforge/features/tcp_counters.hpp"
#include "flowforge/features/video_segments.hpp"
#include "flowforge/util.hpp"
#include "support/testutil.hpp"

using namespace flowforge;
using namespace flowforge::test;

namespace {

constexpr uint64_t kSec = 1000000000ULL;
constexpr uint64_t kMs = 1000000ULL;
// Fixture flows start well after the epoch; a zero timestamp has special
// meaning to the segment state machine.
constexpr uint64_t kBase = 1000 * kSec;

// Independent base64 decoder used as the inverse oracle for the encoder.
std::vector<uint8_t> base64_decode_oracle(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<uint8_t> out;
    int acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') {
            break;
        }
        const int v = val(c);
        REQUIRE(v >= 0);
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

SynthPacket out_payload(uint64_t ts_ns, uint32_t data_len, uint32_t seq = 0, bool tcp = true) {
    SynthSpec s;
    s.dir = Direction::out;
    s.tcp = tcp;
    s.ts_ns = ts_ns;
    s.data_len = data_len;
    s.seq = seq;
    s.ack = tcp;
    return synth_packet(s);
}

SynthPacket in_payload(uint64_t ts_ns, uint32_t data_len, uint32_t seq = 0, bool tcp = true) {
    SynthSpec s;
    s.dir = Direction::in;
    s.tcp = tcp;
    s.ts_ns = ts_ns;
    s.data_len = data_len;
    s.seq = seq;
    s.ack = tcp;
    return synth_packet(s);
}

}  // namespace

// ---------------------------------------------------------------- PacketCounters

TEST_CASE("packet counters apply the kbps formula") {
    PacketCountersState st;
    SynthSpec s;
    s.dir = Direction::out;
    s.wire_len = 1280;
    st.add_packet(synth_packet(s).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    REQUIRE(out);
    CHECK((*out)["kbps_up"].get<double>() == doctest::Approx(1.0));
    CHECK((*out)["kbps_dw"].get<double>() == doctest::Approx(0.0));
    CHECK((*out)["pps_up"].get<double>() == doctest::Approx(0.1));
}

TEST_CASE("packet counters reset after collect") {
    PacketCountersState st;
    st.add_packet(out_payload(kBase, 100).pkt);
    (void)st.collect(10.0, CollectMode::interval);

    const auto idle = st.collect(10.0, CollectMode::interval);
    REQUIRE(idle);
    for (const char* k : {"kbps_up", "kbps_dw", "pps_up", "pps_dw"}) {
        CHECK((*idle)[k].get<double>() == doctest::Approx(0.0));
    }
}

TEST_CASE("rate-style states stay out of a final record they can't inform") {
    // A flow that went quiet after its last interval collection carries no
    // new rate information; its eviction record should hold only classes
    // with leftovers to flush.
    PacketCountersState pc;
    pc.add_packet(out_payload(kBase, 100).pkt);
    (void)pc.collect(10.0, CollectMode::interval);
    CHECK_FALSE(pc.collect(10.0, CollectMode::final_flush));

    TCPCountersState tcp;
    tcp.add_packet(out_payload(kBase, 100, 1000).pkt);
    (void)tcp.collect(10.0, CollectMode::interval);
    CHECK_FALSE(tcp.collect(10.0, CollectMode::final_flush));

    // With traffic since the last collect, the final record reports it.
    pc.add_packet(out_payload(kBase + kSec, 80).pkt);
    const auto fin = pc.collect(5.0, CollectMode::final_flush);
    REQUIRE(fin);
    CHECK((*fin)["pps_up"].get<double>() == doctest::Approx(0.2));
}

TEST_CASE("pps comes from packet counts, not bytes") {
    PacketCountersState st;
    for (int i = 0; i < 3; ++i) {
        SynthSpec s;
        s.dir = Direction::out;
        s.wire_len = 1500;  // byte volume must not leak into pps
        st.add_packet(synth_packet(s).pkt);
    }
    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["pps_up"].get<double>() == doctest::Approx(0.3));
}

TEST_CASE("packet counters match an independent tally over random packets") {
    std::mt19937 rng(2024);
    PacketCountersState st;
    uint64_t tally_bytes[2] = {0, 0};
    uint64_t tally_pkts[2] = {0, 0};
    for (int i = 0; i < 10000; ++i) {
        SynthSpec s;
        s.dir = rng() % 2 == 0 ? Direction::in : Direction::out;
        s.wire_len = 60 + rng() % 1400;
        const auto p = synth_packet(s);
        st.add_packet(p.pkt);
        tally_bytes[static_cast<size_t>(s.dir)] += s.wire_len;
        tally_pkts[static_cast<size_t>(s.dir)] += 1;
    }
    const double slot = 10.0;
    const auto out = st.collect(slot, CollectMode::interval);
    const size_t in = static_cast<size_t>(Direction::in);
    const size_t outd = static_cast<size_t>(Direction::out);
    CHECK((*out)["kbps_up"].get<double>() ==
          doctest::Approx(static_cast<double>(tally_bytes[outd]) / (slot * 128.0)));
    CHECK((*out)["kbps_dw"].get<double>() ==
          doctest::Approx(static_cast<double>(tally_bytes[in]) / (slot * 128.0)));
    CHECK((*out)["pps_up"].get<double>() ==
          doctest::Approx(static_cast<double>(tally_pkts[outd]) / slot));
    CHECK((*out)["pps_dw"].get<double>() ==
          doctest::Approx(static_cast<double>(tally_pkts[in]) / slot));
}

// ---------------------------------------------------------------- VideoSegments

TEST_CASE("video segments: hand-traced request/response pattern") {
    VideoSegmentsState st;
    st.add_packet(out_payload(kBase + 0 * kSec, 200, 111).pkt);
    st.add_packet(in_payload(kBase + 1 * kSec, 1000, 5000).pkt);
    st.add_packet(in_payload(kBase + 2 * kSec, 1000, 6000).pkt);
    st.add_packet(in_payload(kBase + 3 * kSec, 500, 7000).pkt);
    st.add_packet(out_payload(kBase + 4 * kSec, 200, 222).pkt);

    REQUIRE(st.completed().size() == 1);
    const VideoSegment& seg = st.completed()[0];
    CHECK(seg.down_pkts == 3);
    CHECK(seg.down_bytes == 2500);
    CHECK(seg.ts_start == kBase);
    CHECK(seg.ts_end == kBase + 3 * kSec);
    CHECK(seg.seq == 111);
    CHECK(seg.max_d_seq == 7000);
    CHECK(st.running().ts_start == kBase + 4 * kSec);
    CHECK(st.running().seq == 222);
    CHECK(st.running().down_pkts == 0);
}

TEST_CASE("quic threshold: 100-byte udp payload is chatter, 101 opens a segment") {
    for (uint32_t len : {50u, 100u}) {
        VideoSegmentsState st;
        st.add_packet(out_payload(kBase, len, 0, /*tcp=*/false).pkt);
        CHECK(st.running().ts_start == 0);
    }
    VideoSegmentsState st;
    st.add_packet(out_payload(kBase, 101, 0, /*tcp=*/false).pkt);
    CHECK(st.running().ts_start == kBase);
}

TEST_CASE("downstream-only flow never completes a segment") {
    VideoSegmentsState st;
    for (int i = 0; i < 50; ++i) {
        st.add_packet(in_payload(kBase + i * kMs, 1200).pkt);
    }
    st.add_packet(out_payload(kBase + 60 * kMs, 100).pkt);  // first request
    CHECK(st.completed().empty());
    // The pre-request downstream bytes belong to no segment.
    CHECK(st.running().down_pkts == 0);
}

TEST_CASE("n qualifying requests with busy gaps produce n-1 segments") {
    VideoSegmentsState st;
    const int requests = 20;
    uint64_t ts = kBase;
    for (int r = 0; r < requests; ++r) {
        st.add_packet(out_payload(ts, 150, static_cast<uint32_t>(r)).pkt);
        ts += 10 * kMs;
        for (int d = 0; d < 4; ++d) {
            st.add_packet(in_payload(ts, 1400).pkt);
            ts += 5 * kMs;
        }
    }
    CHECK(st.completed().size() == requests - 1);
}

TEST_CASE("verbatim vs strict last_pkt on out-of-order downstream timestamps") {
    // Downstream timestamps go 5 s then 3 s. The published update guard
    // compares against ts_end (still zero), so the later value is clobbered;
    // strict mode keeps the maximum.
    auto feed = [](VideoSegmentsState& st) {
        st.add_packet(out_payload(kBase, 150).pkt);
        st.add_packet(in_payload(kBase + 5 * kSec, 1000).pkt);
        st.add_packet(in_payload(kBase + 3 * kSec, 1000).pkt);
        st.add_packet(out_payload(kBase + 6 * kSec, 150).pkt);
    };
    VideoSegmentsState verbatim(false);
    VideoSegmentsState strict(true);
    feed(verbatim);
    feed(strict);
    REQUIRE(verbatim.completed().size() == 1);
    REQUIRE(strict.completed().size() == 1);
    CHECK(verbatim.completed()[0].ts_end == kBase + 3 * kSec);
    CHECK(strict.completed()[0].ts_end == kBase + 5 * kSec);
}

TEST_CASE("collect flushes completed segments and withholds the running one") {
    VideoSegmentsState st;
    st.add_packet(out_payload(kBase, 150).pkt);
    st.add_packet(in_payload(kBase + kSec, 900).pkt);
    st.add_packet(out_payload(kBase + 2 * kSec, 150).pkt);
    st.add_packet(in_payload(kBase + 3 * kSec, 800).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    REQUIRE(out);
    REQUIRE((*out)["segments"].size() == 1);
    CHECK((*out)["segments"][0]["down_bytes"] == 900);

    // Nothing new: running segment is not re-reported.
    CHECK_FALSE(st.collect(10.0, CollectMode::interval));

    // Final collection finalizes the running segment.
    const auto fin = st.collect(10.0, CollectMode::final_flush);
    REQUIRE(fin);
    REQUIRE((*fin)["segments"].size() == 1);
    CHECK((*fin)["segments"][0]["down_bytes"] == 800);
    CHECK((*fin)["segments"][0]["ts_end_ns"] == kBase + 3 * kSec);
}

// ---------------------------------------------------------------- TCPCounters

TEST_CASE("handshake flag decomposition: syn-ack increments both") {
    TCPCountersState st;
    SynthSpec syn;
    syn.dir = Direction::out;
    syn.syn = true;
    st.add_packet(synth_packet(syn).pkt);

    SynthSpec synack;
    synack.dir = Direction::in;
    synack.syn = true;
    synack.ack = true;
    st.add_packet(synth_packet(synack).pkt);

    SynthSpec ack;
    ack.dir = Direction::out;
    ack.ack = true;
    st.add_packet(synth_packet(ack).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["syn"] == 2);
    CHECK((*out)["ack"] == 2);
    CHECK((*out)["fin"] == 0);
}

TEST_CASE("identical payload sequence counts one retransmission") {
    TCPCountersState st;
    st.add_packet(out_payload(kBase, 100, 1000).pkt);
    st.add_packet(out_payload(kBase + kMs, 100, 1000).pkt);
    CHECK(st.retransmissions(Direction::out) == 1);
}

TEST_CASE("in-order data is not retransmission") {
    TCPCountersState st;
    st.add_packet(out_payload(kBase, 100, 1000).pkt);
    st.add_packet(out_payload(kBase + kMs, 100, 1100).pkt);
    st.add_packet(out_payload(kBase + 2 * kMs, 100, 1200).pkt);
    CHECK(st.retransmissions(Direction::out) == 0);
}

TEST_CASE("pure ack stream has zero retransmissions") {
    TCPCountersState st;
    for (int i = 0; i < 10; ++i) {
        SynthSpec s;
        s.dir = Direction::out;
        s.ack = true;
        s.seq = 500;  // unchanged seq without payload is not data
        st.add_packet(synth_packet(s).pkt);
    }
    CHECK(st.retransmissions(Direction::out) == 0);
}

TEST_CASE("sequence tracking survives interval resets") {
    TCPCountersState st;
    st.add_packet(out_payload(kBase, 100, 1000).pkt);
    (void)st.collect(10.0, CollectMode::interval);
    st.add_packet(out_payload(kBase + kSec, 100, 1000).pkt);  // replay of old data
    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["retrans_up"] == 1);
}

TEST_CASE("window tracking and non-tcp skip accounting") {
    TCPCountersState st;
    SynthSpec a;
    a.dir = Direction::in;
    a.window = 1000;
    st.add_packet(synth_packet(a).pkt);
    SynthSpec b = a;
    b.window = 4000;
    st.add_packet(synth_packet(b).pkt);
    SynthSpec c = a;
    c.window = 2000;
    st.add_packet(synth_packet(c).pkt);

    SynthSpec udp;
    udp.tcp = false;
    udp.dir = Direction::in;
    st.add_packet(synth_packet(udp).pkt);
    CHECK(st.skipped_non_tcp() == 1);

    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["win_last_dw"] == 2000);
    CHECK((*out)["win_max_dw"] == 4000);
}

// ---------------------------------------------------------------- LatencyCounters

TEST_CASE("handshake deltas of 10 ms and 0.2 ms") {
    LatencyCountersState st;
    SynthSpec syn;
    syn.dir = Direction::out;
    syn.syn = true;
    syn.ts_ns = kBase;
    st.add_packet(synth_packet(syn).pkt);

    SynthSpec synack;
    synack.dir = Direction::in;
    synack.syn = true;
    synack.ack = true;
    synack.ts_ns = kBase + 10 * kMs;
    st.add_packet(synth_packet(synack).pkt);

    SynthSpec ack;
    ack.dir = Direction::out;
    ack.ack = true;
    ack.ts_ns = kBase + 10 * kMs + 200000;  // +0.2 ms
    st.add_packet(synth_packet(ack).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["hs_syn_synack_ms"].get<double>() == doctest::Approx(10.0));
    CHECK((*out)["hs_synack_ack_ms"].get<double>() == doctest::Approx(0.2));

    // Emitted once; later intervals report null.
    const auto again = st.collect(10.0, CollectMode::interval);
    CHECK((*again)["hs_syn_synack_ms"].is_null());
}

TEST_CASE("ack-matched rtt sample") {
    LatencyCountersState st;
    st.add_packet(out_payload(kBase, 100, 1).pkt);
    SynthSpec ackp;
    ackp.dir = Direction::in;
    ackp.ack = true;
    ackp.ack_no = 101;
    ackp.ts_ns = kBase + 30 * kMs;
    st.add_packet(synth_packet(ackp).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    REQUIRE_FALSE((*out)["rtt_ms"].is_null());
    CHECK((*out)["rtt_ms"]["count"] == 1);
    CHECK((*out)["rtt_ms"]["mean_ms"].get<double>() == doctest::Approx(30.0));
}

TEST_CASE("karn rule: retransmitted segment yields no sample") {
    LatencyCountersState st;
    st.add_packet(out_payload(kBase, 100, 1).pkt);
    st.add_packet(out_payload(kBase + 50 * kMs, 100, 1).pkt);  // retransmission
    SynthSpec ackp;
    ackp.dir = Direction::in;
    ackp.ack = true;
    ackp.ack_no = 101;
    ackp.ts_ns = kBase + 80 * kMs;
    st.add_packet(synth_packet(ackp).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["rtt_ms"].is_null());
}

TEST_CASE("single packet flow emits nulls") {
    LatencyCountersState st;
    st.add_packet(out_payload(kBase, 100, 1).pkt);
    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["hs_syn_synack_ms"].is_null());
    CHECK((*out)["hs_synack_ack_ms"].is_null());
    CHECK((*out)["rtt_ms"].is_null());
    CHECK((*out)["jitter_ms"].is_null());
}

TEST_CASE("jitter is the mean absolute consecutive difference") {
    LatencyCountersState st;
    // Three measured exchanges with RTTs 10, 20, 40 ms.
    uint32_t seq = 1;
    uint64_t t = kBase;
    for (uint64_t rtt_ms : {10ULL, 20ULL, 40ULL}) {
        st.add_packet(out_payload(t, 100, seq).pkt);
        SynthSpec ackp;
        ackp.dir = Direction::in;
        ackp.ack = true;
        ackp.ack_no = seq + 100;
        ackp.ts_ns = t + rtt_ms * kMs;
        st.add_packet(synth_packet(ackp).pkt);
        t += kSec;
        seq += 100;
    }
    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["rtt_ms"]["count"] == 3);
    CHECK((*out)["jitter_ms"].get<double>() == doctest::Approx(15.0));  // (|20-10|+|40-20|)/2
}

// ---------------------------------------------------------------- PacketTimes

TEST_CASE("interarrival statistics match manual computation") {
    PacketTimesState st;
    // Downstream arrivals at 0, 10, 30, 60 ms → gaps 10, 20, 30 ms.
    for (uint64_t off : {0ULL, 10ULL, 30ULL, 60ULL}) {
        st.add_packet(in_payload(kBase + off * kMs, 1000).pkt);
    }
    const auto out = st.collect(10.0, CollectMode::interval);
    const auto& dw = (*out)["dw"];
    REQUIRE_FALSE(dw.is_null());
    CHECK(dw["pkts"] == 4);
    CHECK(dw["min_ms"].get<double>() == doctest::Approx(10.0));
    CHECK(dw["max_ms"].get<double>() == doctest::Approx(30.0));
    CHECK(dw["mean_ms"].get<double>() == doctest::Approx(20.0));
    CHECK(dw["median_ms"].get<double>() == doctest::Approx(20.0));
    CHECK(dw["stddev_ms"].get<double>() == doctest::Approx(8.16496).epsilon(0.001));
    CHECK((*out)["up"].is_null());  // single direction only

    // Cleared for the next interval.
    const auto next = st.collect(10.0, CollectMode::interval);
    CHECK((*next)["dw"].is_null());
}

TEST_CASE("timestamp cap bounds state while arrival count keeps counting") {
    PacketTimesState st(4);
    for (int i = 0; i < 10; ++i) {
        st.add_packet(in_payload(kBase + static_cast<uint64_t>(i) * kMs, 100).pkt);
    }
    CHECK(st.stored_in() == 4);
    const auto out = st.collect(10.0, CollectMode::interval);
    CHECK((*out)["dw"]["pkts"] == 10);
}

// ---------------------------------------------------------------- BytesCopy

TEST_CASE("headers selector fills from header spans only") {
    BytesCopyState st(100, CopyLayers::headers);
    SynthSpec s;
    s.header_len = 40;
    s.data_len = 80;
    st.add_packet(synth_packet(s).pkt);
    CHECK(st.acquisition().filled() == 40);
    st.add_packet(synth_packet(s).pkt);
    CHECK(st.acquisition().filled() == 80);
}

TEST_CASE("both selector completes at the target exactly") {
    BytesCopyState st(100, CopyLayers::both);
    SynthSpec s;
    s.header_len = 40;
    s.data_len = 80;
    st.add_packet(synth_packet(s).pkt);
    CHECK(st.acquisition().filled() == 100);
    CHECK(st.acquisition().complete());
}

TEST_CASE("completed acquisition ignores further packets") {
    BytesCopyState st(50, CopyLayers::payload);
    SynthSpec s;
    s.data_len = 50;
    s.payload_fill = 0x11;
    st.add_packet(synth_packet(s).pkt);
    const auto before = st.acquisition().buffer();
    SynthSpec t = s;
    t.payload_fill = 0x99;
    st.add_packet(synth_packet(t).pkt);
    CHECK(st.acquisition().buffer() == before);
}

TEST_CASE("bytes copy emits once when complete, then goes quiet") {
    BytesCopyState st(8, CopyLayers::payload);
    CHECK_FALSE(st.collect(10.0, CollectMode::interval));  // nothing yet

    SynthSpec s;
    s.data_len = 8;
    s.payload_fill = 0xAB;
    st.add_packet(synth_packet(s).pkt);

    const auto out = st.collect(10.0, CollectMode::interval);
    REQUIRE(out);
    CHECK((*out)["truncated"] == false);
    CHECK(base64_decode_oracle((*out)["data_b64"]) == std::vector<uint8_t>(8, 0xAB));
    CHECK_FALSE(st.collect(10.0, CollectMode::interval));
}

TEST_CASE("final collection zero-pads a short flow and flags truncation") {
    BytesCopyState st(10, CopyLayers::payload);
    SynthSpec s;
    s.data_len = 4;
    s.payload_fill = 0x7F;
    st.add_packet(synth_packet(s).pkt);

    CHECK_FALSE(st.collect(10.0, CollectMode::interval));  // still filling
    const auto fin = st.collect(10.0, CollectMode::final_flush);
    REQUIRE(fin);
    CHECK((*fin)["truncated"] == true);
    std::vector<uint8_t> want(4, 0x7F);
    want.resize(10, 0);
    CHECK(base64_decode_oracle((*fin)["data_b64"]) == want);
}

TEST_CASE("base64 encoder agrees with the decoding oracle on random data") {
    std::mt19937 rng(5);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<uint8_t> data(rng() % 100);
        for (auto& b : data) {
            b = static_cast<uint8_t>(rng());
        }
        CHECK(base64_decode_oracle(base64_encode(data)) == data);
    }
}

TEST_CASE("bytes copy state reports at least the target size") {
    BytesCopyState st(784, CopyLayers::both);
    CHECK(st.approximate_size() >= 784);
}

// ---------------------------------------------------------------- PngCopy

TEST_CASE("png copy encodes online when the buffer fills") {
    PngCopyState st(10, 10, CopyLayers::payload);
    SynthSpec s;
    s.data_len = 100;
    st.add_packet(synth_packet(s).pkt);
    CHECK_FALSE(st.encoded().empty());
    const uint8_t sig[4] = {137, 80, 78, 71};
    CHECK(std::equal(sig, sig + 4, st.encoded().begin()));

    const auto out = st.collect(10.0, CollectMode::interval);
    REQUIRE(out);
    CHECK((*out)["width"] == 10);
    CHECK((*out)["truncated"] == false);
    CHECK(base64_decode_oracle((*out)["png_b64"]) == st.encoded());
    CHECK_FALSE(st.collect(10.0, CollectMode::interval));
}

TEST_CASE("png copy pads and encodes short flows at final collection") {
    PngCopyState st(6, 6, CopyLayers::payload);
    SynthSpec s;
    s.data_len = 10;
    st.add_packet(synth_packet(s).pkt);
    CHECK(st.encoded().empty());
    const auto fin = st.collect(10.0, CollectMode::final_flush);
    REQUIRE(fin);
    CHECK((*fin)["truncated"] == true);
    CHECK_FALSE(st.encoded().empty());
}

TEST_CASE("png state costs at least 1.5x the equivalent raw-bytes state") {
    PngCopyState png(28, 28, CopyLayers::both);
    BytesCopyState raw(784, CopyLayers::both);
    SynthSpec s;
    s.header_len = 84;
    s.data_len = 700;
    png.add_packet(synth_packet(s).pkt);
    raw.add_packet(synth_packet(s).pkt);
    CHECK(png.acquisition().complete());
    CHECK(raw.acquisition().complete());
    CHECK(png.approximate_size() >= raw.approximate_size() * 3 / 2);
}

// ---------------------------------------------------------------- registry

TEST_CASE("registry resolves plain and parameterized names") {
    CHECK(make_feature_state("PacketCounters") != nullptr);
    CHECK(make_feature_state("PacketTimes") != nullptr);
    CHECK(make_feature_state("PacketTimes(4096)") != nullptr);
    CHECK(make_feature_state("TCPCounters") != nullptr);
    CHECK(make_feature_state("LatencyCounters") != nullptr);
    CHECK(make_feature_state("VideoSegments") != nullptr);
    CHECK(make_feature_state("VideoSegments(strict)") != nullptr);
    CHECK(make_feature_state("BytesCopy(784, headers)") != nullptr);
    CHECK(make_feature_state("PngCopy(28,28,headers)") != nullptr);
}

TEST_CASE("png copy spec with 28x28 acquires 784 bytes") {
    auto st = make_feature_state("PngCopy(28,28,headers)");
    auto* png = dynamic_cast<PngCopyState*>(st.get());
    REQUIRE(png != nullptr);
    CHECK(png->acquisition().target() == 784);
}

TEST_CASE("unknown names fail loudly, listing what exists") {
    std::string err;
    CHECK_FALSE(validate_feature_spec("NoSuchFeature", &err));
    CHECK(err.find("NoSuchFeature") != std::string::npos);
    CHECK(err.find("PacketCounters") != std::string::npos);
    CHECK(err.find("PngCopy") != std::string::npos);
}

TEST_CASE("names are case-sensitive") {
    std::string err;
    CHECK_FALSE(validate_feature_spec("pngcopy(28,28,headers)", &err));
    CHECK(err.find("pngcopy") != std::string::npos);
}

TEST_CASE("bad parameters are rejected with precise messages") {
    std::string err;
    CHECK_FALSE(validate_feature_spec("PacketCounters(3)", &err));
    CHECK_FALSE(validate_feature_spec("BytesCopy()", &err));
    CHECK_FALSE(validate_feature_spec("BytesCopy(0,headers)", &err));
    CHECK_FALSE(validate_feature_spec("BytesCopy(784,head)", &err));
    CHECK(err.find("headers|payload|both") != std::string::npos);
    CHECK_FALSE(validate_feature_spec("PngCopy(28)", &err));
    CHECK_FALSE(validate_feature_spec("PngCopy(28,0,headers)", &err));
    CHECK_FALSE(validate_feature_spec("BytesCopy(784,headers", &err));
}

TEST_CASE("copy specs without a layers argument default to payload") {
    CHECK(validate_feature_spec("BytesCopy(784)", nullptr));
    CHECK(validate_feature_spec("PngCopy(28,28)", nullptr));
    auto st = make_feature_state("BytesCopy(6)");
    auto sp = synth_packet({});
    std::vector<uint8_t> payload = {1, 2, 3, 4, 5, 6};
    sp.pkt.payload_bytes = payload;
    sp.pkt.data_length = static_cast<uint32_t>(payload.size());
    st->add_packet(sp.pkt);
    auto out = st->collect(10.0, CollectMode::interval);
    REQUIRE(out.has_value());
    CHECK((*out)["layers"] == "payload");
}

// ---------------------------------------------------------------- determinism

TEST_CASE("identical packet streams yield byte-identical collected output") {
    auto run = [] {
        std::mt19937 rng(77);
        std::vector<std::string> dumps;
        auto a = make_feature_state("PacketCounters");
        auto b = make_feature_state("TCPCounters");
        auto c = make_feature_state("VideoSegments");
        for (int i = 0; i < 500; ++i) {
            SynthSpec s;
            s.dir = rng() % 2 == 0 ? Direction::in : Direction::out;
            s.ts_ns = kBase + static_cast<uint64_t>(i) * kMs;
            s.data_len = rng() % 1400;
            s.seq = static_cast<uint32_t>(rng());
            s.ack = true;
            const auto p = synth_packet(s);
            a->add_packet(p.pkt);
            b->add_packet(p.pkt);
            c->add_packet(p.pkt);
        }
        for (auto* st : {a.get(), b.get(), c.get()}) {
            const auto out = st->collect(10.0, CollectMode::final_flush);
            dumps.push_back(out ? out->dump() : "<none>");
        }
        return dumps;
    };
    CHECK(run() == run());
}
