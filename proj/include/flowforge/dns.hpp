#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforge/ip.hpp"

namespace flowforge {

// One resolved address from a DNS response, together with every name that
// leads to it inside the same message: the record's owner plus all aliases
// whose CNAME chain reaches that owner.
struct DnsAddress {
    IpAddr addr;
    uint32_t ttl = 0;
    std::vector<std::string> names;
};

struct DnsResponse {
    std::string query_name;            // first question, lowercase
    std::vector<DnsAddress> addresses;
    uint32_t answers_parsed = 0;
    bool partial = false;              // parsing stopped early on malformed data
};

// Parses a DNS response message (UDP payload). Returns nullopt when the
// payload is not a response or the header itself is unusable. Truncated or
// malformed answer sections yield a partial result with whatever records
// could be recovered, mirroring best-effort passive capture.
std::optional<DnsResponse> parse_dns_response(std::span<const uint8_t> payload);

}  // namespace flowforge
