#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforge/ip.hpp"

namespace flowforge {

enum class Direction : uint8_t { in = 0, out = 1 };

enum class Transport : uint8_t { tcp = 6, udp = 17 };

struct TcpFlags {
    bool syn = false;
    bool ack = false;
    bool fin = false;
    bool rst = false;
    bool psh = false;
    bool urg = false;
};

// Normalized view of one captured packet. The header/payload spans point into
// the frame buffer the packet was decoded from; they stay valid only while
// that buffer is alive.
struct DecodedPacket {
    uint64_t timestamp_ns = 0;
    Direction direction = Direction::in;
    Transport transport = Transport::tcp;
    bool is_tcp = false;

    IpAddr src_ip;
    IpAddr dst_ip;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;

    uint32_t wire_length = 0;  // length on the wire
    uint32_t data_length = 0;  // transport payload bytes

    // Valid iff is_tcp.
    uint32_t tcp_seq = 0;
    uint32_t tcp_ack = 0;
    TcpFlags tcp_flags;
    uint16_t tcp_window = 0;

    std::span<const uint8_t> header_bytes;   // network + transport headers
    std::span<const uint8_t> payload_bytes;  // transport payload (may be capture-truncated)

    const IpAddr& local_ip() const { return direction == Direction::out ? src_ip : dst_ip; }
    const IpAddr& remote_ip() const { return direction == Direction::out ? dst_ip : src_ip; }
    uint16_t local_port() const { return direction == Direction::out ? src_port : dst_port; }
    uint16_t remote_port() const { return direction == Direction::out ? dst_port : src_port; }
};

// Canonical direction-independent flow identity: endpoints ordered by
// (address, port) so both directions of a connection map to one key.
struct FlowKey {
    Transport protocol = Transport::tcp;
    IpAddr addr_lo;
    IpAddr addr_hi;
    uint16_t port_lo = 0;
    uint16_t port_hi = 0;

    bool operator==(const FlowKey&) const = default;
    auto operator<=>(const FlowKey&) const = default;

    std::string to_string() const;
};

FlowKey flow_key(const DecodedPacket& pkt);

// Stable across runs and builds; used for partition routing and tests.
uint64_t flow_key_hash(const FlowKey& key);

struct FlowKeyHash {
    size_t operator()(const FlowKey& key) const { return static_cast<size_t>(flow_key_hash(key)); }
};

enum class DecodeError : uint8_t {
    none = 0,
    truncated,            // frame too short for the headers it claims
    unsupported_layer,    // non-IP ethertype or non-TCP/UDP transport
    ambiguous_direction,  // neither or both endpoints match the local prefixes
};

const char* decode_error_name(DecodeError err);

// Decode an Ethernet frame (VLAN tags skipped, IPv4/IPv6, TCP/UDP).
// `wire_length` is the original on-wire length; `frame` may be shorter when the
// capture truncated the packet. Returns nullopt and sets `err` on failure.
std::optional<DecodedPacket> decode_frame(std::span<const uint8_t> frame,
                                          uint64_t timestamp_ns,
                                          uint32_t wire_length,
                                          const std::vector<CidrPrefix>& local_prefixes,
                                          DecodeError* err = nullptr);

}  // namespace flowforge
