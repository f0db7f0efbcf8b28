#pragma once

#include <cstdint>

#include <json.hpp>

#include "flowforge/stats.hpp"

namespace flowforge {

// Cache microbenchmark: N distinct-flow inserts followed by M updates over
// the same population, with per-operation latency tracking. Inserts pay for
// classification plus feature-state allocation; updates are a lookup and a
// timestamp refresh, which is the asymmetry this measures.
struct CacheBenchResult {
    uint64_t flows = 0;
    uint64_t updates = 0;
    uint64_t wall_ns = 0;
    DurationStats insert;
    DurationStats update;

    double median_ratio() const;
    nlohmann::json to_json() const;
};

CacheBenchResult run_cache_bench(uint64_t flows, uint64_t updates, uint64_t seed = 1);

}  // namespace flowforge
