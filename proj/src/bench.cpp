#include "flowforge/bench.hpp"

#include <chrono>
#include <random>
#include <utility>

#include <json.hpp>

#include "flowforge/config.hpp"
#include "flowforge/flow_cache.hpp"
#include "flowforge/ip.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/service_map.hpp"

namespace flowforge {

namespace {

constexpr uint64_t kBaseNs = 1700000000ull * 1000000000ull;

// A service that matches every benchmark flow. The collect list mirrors a
// deployment running both shipped use cases (video QoE plus per-flow byte
// capture), so an insert pays the full feature-state allocation bill the
// production path pays — that allocation is what separates inserts from
// updates, which only refresh an existing record.
RuntimeConfig bench_config(uint64_t flows) {
    nlohmann::json j = {
        {"System",
         {{"PcapFile", "bench.pcap"},
          {"LocalPrefixes", {"10.0.0.0/8"}},
          {"MaxFlows", flows + 16}}},
        {"Services",
         {{
             {"Name", "Bench"},
             {"Filter", {{"Prefixes", {"198.18.0.0/15"}}}},
             {"Collect",
              {"PacketCounters", "TCPCounters", "PacketTimes", "LatencyCounters",
               "VideoSegments", "BytesCopy(784)"}},
             {"Emit", 10},
         }}},
    };
    return RuntimeConfig::parse(j.dump());
}

// Distinct 5-tuples: the remote address walks 198.18.0.0/16 and the local
// port picks up the overflow, so any flow count stays collision-free. The
// local endpoint (10.x) always sorts below the remote (198.x), so filling
// lo/hi directly lands in canonical order.
std::pair<FlowKey, IpAddr> bench_flow(uint64_t i) {
    const uint8_t remote_bytes[4] = {198, 18, static_cast<uint8_t>(i >> 8),
                                     static_cast<uint8_t>(i)};
    const uint8_t local_bytes[4] = {10, 0, 0, 5};
    FlowKey key;
    key.protocol = Transport::tcp;
    key.addr_lo = IpAddr::from_v4(local_bytes);
    key.addr_hi = IpAddr::from_v4(remote_bytes);
    key.port_lo = static_cast<uint16_t>(1024 + (i >> 16));
    key.port_hi = 443;
    return {key, key.addr_hi};
}

}  // namespace

double CacheBenchResult::median_ratio() const {
    const uint64_t upd = update.reservoir.median();
    if (upd == 0) {
        return 0.0;
    }
    return static_cast<double>(insert.reservoir.median()) / static_cast<double>(upd);
}

nlohmann::json CacheBenchResult::to_json() const {
    auto side = [](const DurationStats& s) {
        return nlohmann::json{
            {"count", s.running.count},
            {"mean_ns", s.running.mean()},
            {"min_ns", s.running.min_or_zero()},
            {"max_ns", s.running.max},
            {"median_ns", s.reservoir.median()},
            {"p90_ns", s.reservoir.quantile(0.90)},
            {"p99_ns", s.reservoir.quantile(0.99)},
            {"exact", s.reservoir.exact()},
        };
    };
    return nlohmann::json{
        {"flows", flows},         {"updates", updates},
        {"wall_ns", wall_ns},     {"insert", side(insert)},
        {"update", side(update)}, {"median_ratio", median_ratio()},
    };
}

CacheBenchResult run_cache_bench(uint64_t flows, uint64_t updates, uint64_t seed) {
    if (flows == 0) {
        throw ConfigError("bench-cache needs at least one flow");
    }
    RuntimeConfig cfg = bench_config(flows);
    ServiceMap services(cfg);
    FlowCache cache(cfg, [&services](const IpAddr& remote, uint64_t now_ns) {
        return services.classify(remote, now_ns);
    });
    cache.set_latency_tracking(true);

    const auto wall_start = std::chrono::steady_clock::now();

    // Phase 1: each flow arrives once. Timestamps advance so nothing idles.
    for (uint64_t i = 0; i < flows; ++i) {
        auto [key, remote] = bench_flow(i);
        cache.touch(key, remote, kBaseNs + i);
    }

    // Phase 2: updates hit a uniform random existing flow.
    std::mt19937_64 rng(seed);
    for (uint64_t j = 0; j < updates; ++j) {
        auto [key, remote] = bench_flow(rng() % flows);
        cache.touch(key, remote, kBaseNs + flows + j);
    }

    const auto wall_end = std::chrono::steady_clock::now();

    CacheBenchResult result;
    result.flows = flows;
    result.updates = updates;
    result.wall_ns = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(wall_end - wall_start).count());
    CacheStats stats = cache.stats();
    result.insert = std::move(stats.insert_latency);
    result.update = std::move(stats.update_latency);
    return result;
}

}  // namespace flowforge
