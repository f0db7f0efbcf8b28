#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "flowforge/config.hpp"
#include "flowforge/ip.hpp"
#include "flowforge/packet.hpp"

namespace flowforge {

// Maps remote IPs to service classes. Two sources feed it: static CIDR
// prefixes from the config, and addresses learned from observed DNS
// responses whose names match a service's domain patterns. Prefixes win
// over DNS entries, longest prefix first.
//
// One writer (the DNS ingest path) and many concurrent readers; a
// shared_mutex guards the learned table. The prefix and regex tables are
// immutable after construction.
class ServiceMap {
public:
    using ServiceId = uint32_t;

    struct DnsEntry {
        ServiceId service = 0;
        uint64_t expires_at_ns = 0;  // UINT64_MAX: pinned forever
        uint64_t inserted_at_ns = 0;
    };

    struct IngestCounters {
        uint64_t responses = 0;  // usable DNS responses seen
        uint64_t queries = 0;    // ignored: questions carry no addresses
        uint64_t malformed = 0;  // payloads too broken to read a header from
        uint64_t partial = 0;    // responses that died mid-answer section
        uint64_t mappings = 0;   // table inserts/refreshes
    };

    explicit ServiceMap(const RuntimeConfig& cfg);

    // Feeds one captured packet. Only UDP port-53 payloads are considered;
    // everything else returns 0 untouched. Returns the number of address
    // mappings added or refreshed.
    size_t ingest_dns(const DecodedPacket& pkt, uint64_t now_ns);
    size_t ingest_dns_payload(std::span<const uint8_t> payload, uint64_t now_ns);

    // Prefix match first (longest wins, config order breaks ties), then an
    // unexpired learned entry. now_ns only gates expiry.
    std::optional<ServiceId> classify(const IpAddr& remote, uint64_t now_ns) const;

    // Drops expired entries. The classify path skips them lazily; this
    // reclaims the memory and runs from the pipeline's housekeeping tick.
    size_t sweep_expired(uint64_t now_ns);

    size_t dns_table_size() const;
    size_t prefix_count() const { return prefixes_.size(); }
    IngestCounters counters() const;

    const std::string& service_name(ServiceId id) const { return names_.at(id); }
    size_t service_count() const { return names_.size(); }

    // Debug dump of both tables, stable ordering.
    nlohmann::json dump(uint64_t now_ns) const;

private:
    std::optional<ServiceId> match_name(const std::string& name) const;

    struct PrefixEntry {
        CidrPrefix prefix;
        ServiceId service;
    };

    std::vector<std::string> names_;
    // Sorted by descending prefix length; scan order implements
    // longest-prefix-match with config order breaking ties.
    std::vector<PrefixEntry> prefixes_;
    // Owned copies so the map does not dangle if the config it was built
    // from goes away first.
    std::vector<std::pair<std::regex, ServiceId>> regex_index_;
    int64_t ttl_floor_s_;

    mutable std::shared_mutex mu_;
    std::unordered_map<IpAddr, DnsEntry, IpAddrHash> dns_table_;
    IngestCounters counters_;
};

}  // namespace flowforge
