#include "flowforge/service_map.hpp"

#include <algorithm>
#include <mutex>

#include "flowforge/dns.hpp"

namespace flowforge {

namespace {

constexpr uint64_t kNever = UINT64_MAX;
constexpr uint64_t kNsPerSec = 1000000000ull;

}  // namespace

ServiceMap::ServiceMap(const RuntimeConfig& cfg) : ttl_floor_s_(cfg.dns_ttl_floor_s) {
    for (ServiceId id = 0; id < cfg.services.size(); ++id) {
        const ServiceClassSpec& svc = cfg.services[id];
        names_.push_back(svc.name);
        for (const CidrPrefix& p : svc.prefixes) {
            prefixes_.push_back({p, id});
        }
        for (const std::regex& re : svc.domain_regexes) {
            regex_index_.emplace_back(re, id);
        }
    }
    // Stable sort keeps config order within a length class, which is the
    // documented tie-break when two services claim the same prefix.
    std::stable_sort(prefixes_.begin(), prefixes_.end(),
                     [](const PrefixEntry& a, const PrefixEntry& b) {
                         return a.prefix.length > b.prefix.length;
                     });
}

std::optional<ServiceMap::ServiceId> ServiceMap::match_name(const std::string& name) const {
    for (const auto& [re, id] : regex_index_) {
        if (std::regex_search(name, re)) {
            return id;
        }
    }
    return std::nullopt;
}

size_t ServiceMap::ingest_dns(const DecodedPacket& pkt, uint64_t now_ns) {
    if (pkt.transport != Transport::udp ||
        (pkt.src_port != 53 && pkt.dst_port != 53)) {
        return 0;
    }
    return ingest_dns_payload(pkt.payload_bytes, now_ns);
}

size_t ServiceMap::ingest_dns_payload(std::span<const uint8_t> payload, uint64_t now_ns) {
    if (payload.size() < 12) {
        std::unique_lock lock(mu_);
        ++counters_.malformed;
        return 0;
    }
    const bool is_response = (payload[2] & 0x80) != 0;
    auto response = parse_dns_response(payload);

    std::unique_lock lock(mu_);
    if (!response) {
        if (is_response) {
            ++counters_.malformed;
        } else {
            ++counters_.queries;
        }
        return 0;
    }
    ++counters_.responses;
    if (response->partial) {
        ++counters_.partial;
    }

    size_t added = 0;
    for (const DnsAddress& answer : response->addresses) {
        // A mapping is justified when the question or any alias on the
        // chain to this address belongs to a configured service.
        std::optional<ServiceId> service = match_name(response->query_name);
        for (size_t i = 0; !service && i < answer.names.size(); ++i) {
            service = match_name(answer.names[i]);
        }
        if (!service) {
            continue;
        }
        uint64_t expires = kNever;
        if (ttl_floor_s_ >= 0) {
            // At least one second so an entry is never dead on arrival.
            const uint64_t ttl_s = std::max<uint64_t>(
                std::max<uint64_t>(answer.ttl, static_cast<uint64_t>(ttl_floor_s_)), 1);
            expires = now_ns + ttl_s * kNsPerSec;
        }
        dns_table_[answer.addr] = DnsEntry{*service, expires, now_ns};
        ++added;
    }
    counters_.mappings += added;
    return added;
}

std::optional<ServiceMap::ServiceId> ServiceMap::classify(const IpAddr& remote,
                                                          uint64_t now_ns) const {
    for (const PrefixEntry& entry : prefixes_) {
        if (entry.prefix.contains(remote)) {
            return entry.service;
        }
    }
    std::shared_lock lock(mu_);
    auto it = dns_table_.find(remote);
    if (it != dns_table_.end() && it->second.expires_at_ns > now_ns) {
        return it->second.service;
    }
    return std::nullopt;
}

size_t ServiceMap::sweep_expired(uint64_t now_ns) {
    std::unique_lock lock(mu_);
    size_t removed = 0;
    for (auto it = dns_table_.begin(); it != dns_table_.end();) {
        if (it->second.expires_at_ns <= now_ns) {
            it = dns_table_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

size_t ServiceMap::dns_table_size() const {
    std::shared_lock lock(mu_);
    return dns_table_.size();
}

ServiceMap::IngestCounters ServiceMap::counters() const {
    std::shared_lock lock(mu_);
    return counters_;
}

nlohmann::json ServiceMap::dump(uint64_t now_ns) const {
    nlohmann::json prefixes = nlohmann::json::array();
    for (const PrefixEntry& entry : prefixes_) {
        prefixes.push_back({{"prefix", entry.prefix.to_string()},
                            {"service", names_[entry.service]}});
    }

    std::shared_lock lock(mu_);
    std::vector<std::pair<std::string, const DnsEntry*>> rows;
    rows.reserve(dns_table_.size());
    for (const auto& [addr, entry] : dns_table_) {
        rows.emplace_back(addr.to_string(), &entry);
    }
    std::sort(rows.begin(), rows.end());

    nlohmann::json dns = nlohmann::json::array();
    for (const auto& [text, entry] : rows) {
        nlohmann::json row = {{"ip", text},
                              {"service", names_[entry->service]},
                              {"expired", entry->expires_at_ns <= now_ns}};
        if (entry->expires_at_ns == kNever) {
            row["expires_at_ns"] = nullptr;
        } else {
            row["expires_at_ns"] = entry->expires_at_ns;
        }
        dns.push_back(std::move(row));
    }
    return {{"services", names_}, {"prefixes", prefixes}, {"dns", dns}};
}

}  // namespace flowforge
