#pragma once

#include <cstdint>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowforge/ip.hpp"

namespace flowforge {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One service class from the "Services" array: which flows to monitor, how to
// represent them, and at what granularity.
struct ServiceClassSpec {
    std::string name;
    std::vector<std::string> domains;        // regex sources, as configured
    std::vector<std::regex> domain_regexes;  // compiled, same order
    std::vector<std::string> prefix_texts;   // canonical CIDR form
    std::vector<CidrPrefix> prefixes;
    std::vector<std::string> collect;        // validated feature-class names
    uint32_t emit_interval_s = 10;
};

// The full runtime plan. Immutable after load; shared across all workers.
struct RuntimeConfig {
    // At most one may be set in the file; the CLI's --pcap/--iface flags fill
    // or override it. finalize_capture() enforces exactly-one before a run.
    std::string pcap_file;
    std::string capture_interface;

    std::vector<std::string> local_prefix_texts;
    std::vector<CidrPrefix> local_prefixes;

    uint32_t worker_count = 1;
    uint32_t flow_idle_timeout_s = 600;
    std::string output_directory = "out";
    uint64_t max_flows = 2000000;
    int64_t dns_ttl_floor_s = 300;   // -1: DNS mappings never expire
    bool drop_unclassified = false;  // skip cache entries for unmatched flows
    uint64_t rotate_mb = 64;
    uint32_t queue_depth = 8192;

    std::vector<ServiceClassSpec> services;

    // Parses and fully validates; throws ConfigError on the first violation.
    // Errors carry positions for syntax problems and name the offending
    // service/pattern/feature for semantic ones.
    static RuntimeConfig parse(const std::string& raw_text);
    static RuntimeConfig load_file(const std::string& path);

    // Applies command-line capture overrides and checks that exactly one
    // source ends up set. Every entry point that starts packet processing
    // calls this first.
    void finalize_capture(const std::string& pcap_override,
                          const std::string& iface_override);

    // Canonical JSON (stable key order, canonical prefixes). Reparsing the
    // serialized form yields an identical config.
    std::string serialize() const;

    // Fingerprint of the canonical form; embedded in profile reports so
    // comparisons across differing configs can be refused.
    uint64_t hash() const;
    std::string hash_hex() const;

    const ServiceClassSpec* find_service(const std::string& name) const;
};

}  // namespace flowforge
