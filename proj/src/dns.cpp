#include "flowforge/dns.hpp"

#include <algorithm>
#include <cctype>

namespace flowforge {

namespace {

uint16_t read_u16(std::span<const uint8_t> buf, size_t off) {
    return static_cast<uint16_t>((buf[off] << 8) | buf[off + 1]);
}

uint32_t read_u32(std::span<const uint8_t> buf, size_t off) {
    return (static_cast<uint32_t>(buf[off]) << 24) | (static_cast<uint32_t>(buf[off + 1]) << 16) |
           (static_cast<uint32_t>(buf[off + 2]) << 8) | static_cast<uint32_t>(buf[off + 3]);
}

// Reads a possibly-compressed domain name starting at `off`. On success
// advances `off` past the name's in-place encoding and returns the lowercase
// dotted name. Compression pointers are followed with a jump budget so
// malicious loops terminate.
bool read_name(std::span<const uint8_t> msg, size_t& off, std::string& out) {
    out.clear();
    size_t cursor = off;
    bool jumped = false;
    size_t after_first_pointer = 0;
    int jumps = 0;

    for (;;) {
        if (cursor >= msg.size()) {
            return false;
        }
        const uint8_t len = msg[cursor];
        if ((len & 0xC0) == 0xC0) {
            if (cursor + 1 >= msg.size() || ++jumps > 32) {
                return false;
            }
            const size_t target = (static_cast<size_t>(len & 0x3F) << 8) | msg[cursor + 1];
            if (!jumped) {
                after_first_pointer = cursor + 2;
                jumped = true;
            }
            cursor = target;
            continue;
        }
        if ((len & 0xC0) != 0) {
            return false;  // reserved label types
        }
        if (len == 0) {
            ++cursor;
            break;
        }
        if (cursor + 1 + len > msg.size() || out.size() + len + 1 > 255) {
            return false;
        }
        if (!out.empty()) {
            out.push_back('.');
        }
        for (size_t i = 0; i < len; ++i) {
            out.push_back(static_cast<char>(std::tolower(msg[cursor + 1 + i])));
        }
        cursor += 1 + static_cast<size_t>(len);
    }
    off = jumped ? after_first_pointer : cursor;
    return true;
}

}  // namespace

std::optional<DnsResponse> parse_dns_response(std::span<const uint8_t> payload) {
    if (payload.size() < 12) {
        return std::nullopt;
    }
    const uint16_t flags = read_u16(payload, 2);
    if ((flags & 0x8000) == 0) {
        return std::nullopt;  // a query, not a response
    }
    const uint16_t qd_count = read_u16(payload, 4);
    const uint16_t an_count = read_u16(payload, 6);

    DnsResponse resp;
    size_t off = 12;

    for (uint16_t q = 0; q < qd_count; ++q) {
        std::string name;
        if (!read_name(payload, off, name) || off + 4 > payload.size()) {
            resp.partial = true;
            return resp;
        }
        if (q == 0) {
            resp.query_name = name;
        }
        off += 4;  // qtype + qclass
    }

    struct CnameEdge {
        std::string alias;
        std::string target;
    };
    std::vector<CnameEdge> cnames;

    struct RawAddress {
        std::string owner;
        IpAddr addr;
        uint32_t ttl;
    };
    std::vector<RawAddress> raw;

    for (uint16_t a = 0; a < an_count; ++a) {
        std::string owner;
        if (!read_name(payload, off, owner) || off + 10 > payload.size()) {
            resp.partial = true;
            break;
        }
        const uint16_t rtype = read_u16(payload, off);
        const uint16_t rclass = read_u16(payload, off + 2);
        const uint32_t ttl = read_u32(payload, off + 4);
        const uint16_t rdlen = read_u16(payload, off + 8);
        off += 10;
        if (off + rdlen > payload.size()) {
            resp.partial = true;
            break;
        }
        if (rclass == 1) {  // IN
            if (rtype == 1 && rdlen == 4) {
                raw.push_back({owner, IpAddr::from_v4(payload.data() + off), ttl});
            } else if (rtype == 28 && rdlen == 16) {
                raw.push_back({owner, IpAddr::from_v6(payload.data() + off), ttl});
            } else if (rtype == 5) {
                std::string target;
                size_t rd_off = off;
                if (read_name(payload, rd_off, target)) {
                    cnames.push_back({owner, target});
                }
            }
        }
        off += rdlen;
        ++resp.answers_parsed;
    }

    // For each address, gather every name whose alias chain reaches its owner.
    for (const auto& r : raw) {
        DnsAddress out;
        out.addr = r.addr;
        out.ttl = r.ttl;
        out.names.push_back(r.owner);
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& edge : cnames) {
                const bool target_known =
                    std::find(out.names.begin(), out.names.end(), edge.target) != out.names.end();
                const bool alias_known =
                    std::find(out.names.begin(), out.names.end(), edge.alias) != out.names.end();
                if (target_known && !alias_known) {
                    out.names.push_back(edge.alias);
                    grew = true;
                }
            }
        }
        resp.addresses.push_back(std::move(out));
    }
    return resp;
}

}  // namespace flowforge
