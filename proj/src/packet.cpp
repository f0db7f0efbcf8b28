#include "flowforge/packet.hpp"

#include <cstring>

namespace flowforge {

namespace {

constexpr uint16_t kEtherTypeIpv4 = 0x0800;
constexpr uint16_t kEtherTypeIpv6 = 0x86DD;
constexpr uint16_t kEtherTypeVlan = 0x8100;
constexpr uint16_t kEtherTypeQinQ = 0x88A8;

constexpr uint8_t kProtoTcp = 6;
constexpr uint8_t kProtoUdp = 17;

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

uint32_t read_u32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

bool fail(DecodeError* err, DecodeError code) {
    if (err != nullptr) {
        *err = code;
    }
    return false;
}

struct IpInfo {
    IpAddr src;
    IpAddr dst;
    uint8_t protocol = 0;
    size_t l4_offset = 0;       // offset of the transport header within the frame
    size_t l4_length = 0;       // transport header + payload length per IP header
    bool non_first_fragment = false;
};

bool parse_ipv4(std::span<const uint8_t> frame, size_t off, IpInfo& info, DecodeError* err) {
    if (frame.size() < off + 20) {
        return fail(err, DecodeError::truncated);
    }
    const uint8_t* p = frame.data() + off;
    if ((p[0] >> 4) != 4) {
        return fail(err, DecodeError::unsupported_layer);
    }
    const size_t ihl = static_cast<size_t>(p[0] & 0x0F) * 4;
    if (ihl < 20 || frame.size() < off + ihl) {
        return fail(err, DecodeError::truncated);
    }
    const uint16_t total_len = read_u16(p + 2);
    if (total_len < ihl) {
        return fail(err, DecodeError::truncated);
    }
    const uint16_t frag = read_u16(p + 6);
    const uint16_t frag_offset = frag & 0x1FFF;

    info.src = IpAddr::from_v4(p + 12);
    info.dst = IpAddr::from_v4(p + 16);
    info.protocol = p[9];
    info.l4_offset = off + ihl;
    info.l4_length = total_len - ihl;
    info.non_first_fragment = frag_offset > 0;
    return true;
}

bool parse_ipv6(std::span<const uint8_t> frame, size_t off, IpInfo& info, DecodeError* err) {
    if (frame.size() < off + 40) {
        return fail(err, DecodeError::truncated);
    }
    const uint8_t* p = frame.data() + off;
    if ((p[0] >> 4) != 6) {
        return fail(err, DecodeError::unsupported_layer);
    }
    info.src = IpAddr::from_v6(p + 8);
    info.dst = IpAddr::from_v6(p + 24);

    uint8_t next = p[6];
    size_t cursor = off + 40;
    size_t remaining = read_u16(p + 4);  // payload length

    // Walk extension headers until a transport protocol.
    for (int hops = 0; hops < 8; ++hops) {
        if (next == kProtoTcp || next == kProtoUdp) {
            break;
        }
        if (next == 44) {  // fragment header, fixed 8 bytes
            if (frame.size() < cursor + 8 || remaining < 8) {
                return fail(err, DecodeError::truncated);
            }
            const uint16_t frag_offset = static_cast<uint16_t>(read_u16(frame.data() + cursor + 2) >> 3);
            next = frame[cursor];
            cursor += 8;
            remaining -= 8;
            if (frag_offset > 0) {
                info.non_first_fragment = true;
            }
            continue;
        }
        if (next == 0 || next == 43 || next == 60) {  // hop-by-hop, routing, dest options
            if (frame.size() < cursor + 2) {
                return fail(err, DecodeError::truncated);
            }
            const size_t ext_len = 8 + static_cast<size_t>(frame[cursor + 1]) * 8;
            if (frame.size() < cursor + ext_len || remaining < ext_len) {
                return fail(err, DecodeError::truncated);
            }
            next = frame[cursor];
            cursor += ext_len;
            remaining -= ext_len;
            continue;
        }
        return fail(err, DecodeError::unsupported_layer);
    }
    if (next != kProtoTcp && next != kProtoUdp) {
        return fail(err, DecodeError::unsupported_layer);
    }
    info.protocol = next;
    info.l4_offset = cursor;
    info.l4_length = remaining;
    return true;
}

}  // namespace

const char* decode_error_name(DecodeError err) {
    switch (err) {
        case DecodeError::none: return "none";
        case DecodeError::truncated: return "truncated";
        case DecodeError::unsupported_layer: return "unsupported_layer";
        case DecodeError::ambiguous_direction: return "ambiguous_direction";
    }
    return "unknown";
}

std::optional<DecodedPacket> decode_frame(std::span<const uint8_t> frame,
                                          uint64_t timestamp_ns,
                                          uint32_t wire_length,
                                          const std::vector<CidrPrefix>& local_prefixes,
                                          DecodeError* err) {
    if (err != nullptr) {
        *err = DecodeError::none;
    }
    if (frame.size() < 14) {
        fail(err, DecodeError::truncated);
        return std::nullopt;
    }

    size_t off = 12;
    uint16_t ether_type = read_u16(frame.data() + off);
    off += 2;
    while (ether_type == kEtherTypeVlan || ether_type == kEtherTypeQinQ) {
        if (frame.size() < off + 4) {
            fail(err, DecodeError::truncated);
            return std::nullopt;
        }
        ether_type = read_u16(frame.data() + off + 2);
        off += 4;
    }
    const size_t l3_offset = off;

    IpInfo ip;
    bool ok = false;
    if (ether_type == kEtherTypeIpv4) {
        ok = parse_ipv4(frame, l3_offset, ip, err);
    } else if (ether_type == kEtherTypeIpv6) {
        ok = parse_ipv6(frame, l3_offset, ip, err);
    } else {
        fail(err, DecodeError::unsupported_layer);
        return std::nullopt;
    }
    if (!ok) {
        return std::nullopt;
    }
    if (ip.protocol != kProtoTcp && ip.protocol != kProtoUdp) {
        fail(err, DecodeError::unsupported_layer);
        return std::nullopt;
    }

    DecodedPacket pkt;
    pkt.timestamp_ns = timestamp_ns;
    pkt.src_ip = ip.src;
    pkt.dst_ip = ip.dst;
    pkt.transport = ip.protocol == kProtoTcp ? Transport::tcp : Transport::udp;
    pkt.wire_length = wire_length;

    size_t payload_offset = 0;
    size_t payload_len = 0;

    if (ip.non_first_fragment) {
        // Transport header lives in the first fragment; keep the packet keyable
        // per source but without ports or payload accounting.
        pkt.is_tcp = false;
        payload_offset = ip.l4_offset;
        payload_len = 0;
    } else if (ip.protocol == kProtoTcp) {
        if (frame.size() < ip.l4_offset + 20 || ip.l4_length < 20) {
            fail(err, DecodeError::truncated);
            return std::nullopt;
        }
        const uint8_t* t = frame.data() + ip.l4_offset;
        const size_t tcp_hdr = static_cast<size_t>(t[12] >> 4) * 4;
        if (tcp_hdr < 20 || ip.l4_length < tcp_hdr || frame.size() < ip.l4_offset + tcp_hdr) {
            fail(err, DecodeError::truncated);
            return std::nullopt;
        }
        pkt.is_tcp = true;
        pkt.src_port = read_u16(t);
        pkt.dst_port = read_u16(t + 2);
        pkt.tcp_seq = read_u32(t + 4);
        pkt.tcp_ack = read_u32(t + 8);
        const uint8_t flags = t[13];
        pkt.tcp_flags.fin = (flags & 0x01) != 0;
        pkt.tcp_flags.syn = (flags & 0x02) != 0;
        pkt.tcp_flags.rst = (flags & 0x04) != 0;
        pkt.tcp_flags.psh = (flags & 0x08) != 0;
        pkt.tcp_flags.ack = (flags & 0x10) != 0;
        pkt.tcp_flags.urg = (flags & 0x20) != 0;
        pkt.tcp_window = read_u16(t + 14);
        payload_offset = ip.l4_offset + tcp_hdr;
        payload_len = ip.l4_length - tcp_hdr;
    } else {
        if (frame.size() < ip.l4_offset + 8 || ip.l4_length < 8) {
            fail(err, DecodeError::truncated);
            return std::nullopt;
        }
        const uint8_t* t = frame.data() + ip.l4_offset;
        pkt.src_port = read_u16(t);
        pkt.dst_port = read_u16(t + 2);
        const uint16_t udp_len = read_u16(t + 4);
        if (udp_len < 8) {
            fail(err, DecodeError::truncated);
            return std::nullopt;
        }
        payload_offset = ip.l4_offset + 8;
        payload_len = udp_len - 8;  // UDP payload length
    }

    pkt.data_length = static_cast<uint32_t>(payload_len);
    if (pkt.data_length > pkt.wire_length) {
        // Length fields in the headers claim more payload than the wire carried.
        fail(err, DecodeError::truncated);
        return std::nullopt;
    }

    const bool src_local = matches_any(pkt.src_ip, local_prefixes);
    const bool dst_local = matches_any(pkt.dst_ip, local_prefixes);
    if (src_local == dst_local) {
        fail(err, DecodeError::ambiguous_direction);
        return std::nullopt;
    }
    pkt.direction = src_local ? Direction::out : Direction::in;

    pkt.header_bytes = frame.subspan(l3_offset, payload_offset - l3_offset);
    // Clip the payload view to what was actually captured.
    const size_t avail = frame.size() > payload_offset ? frame.size() - payload_offset : 0;
    pkt.payload_bytes = frame.subspan(payload_offset, std::min(payload_len, avail));

    return pkt;
}

FlowKey flow_key(const DecodedPacket& pkt) {
    FlowKey key;
    key.protocol = pkt.transport;
    const bool src_first =
        pkt.src_ip < pkt.dst_ip || (pkt.src_ip == pkt.dst_ip && pkt.src_port <= pkt.dst_port);
    if (src_first) {
        key.addr_lo = pkt.src_ip;
        key.port_lo = pkt.src_port;
        key.addr_hi = pkt.dst_ip;
        key.port_hi = pkt.dst_port;
    } else {
        key.addr_lo = pkt.dst_ip;
        key.port_lo = pkt.dst_port;
        key.addr_hi = pkt.src_ip;
        key.port_hi = pkt.src_port;
    }
    return key;
}

std::string FlowKey::to_string() const {
    std::string s = protocol == Transport::tcp ? "tcp:" : "udp:";
    s += addr_lo.to_string();
    s += ":";
    s += std::to_string(port_lo);
    s += "-";
    s += addr_hi.to_string();
    s += ":";
    s += std::to_string(port_hi);
    return s;
}

uint64_t flow_key_hash(const FlowKey& key) {
    uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a 64
    auto mix = [&h](uint8_t b) {
        h ^= b;
        h *= 0x100000001B3ULL;
    };
    mix(static_cast<uint8_t>(key.protocol));
    mix(key.addr_lo.v6 ? 1 : 0);
    for (uint8_t b : key.addr_lo.bytes) {
        mix(b);
    }
    for (uint8_t b : key.addr_hi.bytes) {
        mix(b);
    }
    mix(static_cast<uint8_t>(key.port_lo >> 8));
    mix(static_cast<uint8_t>(key.port_lo & 0xFF));
    mix(static_cast<uint8_t>(key.port_hi >> 8));
    mix(static_cast<uint8_t>(key.port_hi & 0xFF));
    // Finalizer (splitmix64) so low bits are well mixed for modulo routing.
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBULL;
    h ^= h >> 31;
    return h;
}

}  // namespace flowforge
