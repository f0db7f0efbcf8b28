#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "flowforge/capture.hpp"
#include "flowforge/config.hpp"
#include "flowforge/flow_cache.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/pipeline.hpp"
#include "flowforge/stats.hpp"

namespace flowforge {

// Characteristics of the monotonic clock used around add_packet calls,
// measured once per profiling run. The empty-section overhead is reported
// alongside the numbers rather than subtracted from them: subtraction would
// hide its variance.
struct TimerInfo {
    uint64_t resolution_ns = 0;  // smallest observable clock step
    double overhead_ns = 0.0;    // median cost of timing an empty section
    bool coarse_warning = false; // set when the resolution exceeds 100 ns
};

TimerInfo measure_timer();

// Per-flow slice of the processing measurements, kept in memory for
// analysis (e.g. short-flow vs long-flow cost); not serialized.
struct FlowTiming {
    uint64_t calls = 0;
    uint64_t total_ns = 0;
};

// The three cost axes for one feature class: state held per collection
// cycle, per-call add_packet timing, and output bytes attributed to the
// class's emitted values.
struct ClassCost {
    std::vector<uint64_t> state_bytes;    // peak per completed cycle
    std::vector<uint64_t> storage_bytes;  // emitted per completed cycle
    uint64_t storage_total = 0;           // whole run, final flush included
    DurationStats add_packet;
    std::unordered_map<FlowKey, FlowTiming, FlowKeyHash> per_flow;

    explicit ClassCost(size_t reservoir = 65536) : add_packet(reservoir) {}
};

struct CostProfileReport {
    int schema = 1;
    std::string mode;  // "replay" or "live"
    std::string trace_id;
    std::string config_hash;
    std::vector<std::string> classes;
    std::map<std::string, uint64_t> emit_intervals_s;  // service -> seconds
    std::vector<uint64_t> cycle_end_ns;    // one entry per completed cycle
    std::vector<uint64_t> framing_bytes;   // per cycle, shared across classes
    uint64_t framing_total = 0;
    uint64_t output_total = 0;
    TimerInfo timer;
    std::map<std::string, ClassCost> per_class;
    RunCounters counters;  // from the state/storage pass
    uint64_t wall_ns = 0;

    nlohmann::json to_json() const;
};

struct ProfileOptions {
    // Feature specs to profile, e.g. {"PacketCounters", "PngCopy(28,28)"}.
    // Every service's Collect list is replaced by this set for the run.
    std::vector<std::string> classes;
    size_t reservoir = 65536;
    std::string trace_id;  // defaults to the pcap path / "live:<iface>"
};

// Sum of approximate_size() per feature class over every flow currently in
// the cache. `cfg` must be the config the cache was built from; it supplies
// the class name for each state slot.
std::map<std::string, uint64_t> profile_state(FlowCache& cache, const RuntimeConfig& cfg);

// Replaces every service's Collect list with `classes` (validated; duplicates
// rejected). Shared by the profiling entry points and the CLI.
RuntimeConfig config_with_classes(const RuntimeConfig& cfg,
                                  const std::vector<std::string>& classes);

// Profiles the configured trace: one normal replay measures state and
// storage per cycle, then one serial dedicated pass per class times its
// add_packet calls in isolation (no header parsing or cache access inside
// the timed section). Output files land under out_dir.
CostProfileReport profile_replay(const RuntimeConfig& cfg, const std::string& out_dir,
                                 const ProfileOptions& opts);

// Live variant: state and storage are measured on the live run while the
// traffic is teed to <out_dir>/profile-capture.pcap; the per-class timing
// passes then replay that capture so live and replay reports have the same
// shape. Returns when the source closes or `stop` becomes true.
CostProfileReport profile_live(const RuntimeConfig& cfg, CaptureSource& source,
                               const std::atomic<bool>& stop, const std::string& out_dir,
                               const ProfileOptions& opts);

}  // namespace flowforge
