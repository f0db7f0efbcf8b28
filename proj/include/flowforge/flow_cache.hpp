#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowforge/config.hpp"
#include "flowforge/features/feature.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/stats.hpp"

namespace flowforge {

// Everything the cache keeps per active flow. Feature states exist only for
// flows bound to a service; unclassified flows carry a bare record so the
// classify-once decision sticks.
struct FlowRecord {
    FlowKey key;
    std::optional<uint32_t> service;
    uint64_t created_at = 0;
    uint64_t last_seen = 0;
    IpAddr local_ip;
    IpAddr remote_ip;
    std::vector<std::unique_ptr<FeatureState>> feature_states;
};

struct CacheStats {
    uint64_t current_size = 0;
    uint64_t inserts = 0;
    uint64_t updates = 0;
    uint64_t evictions = 0;
    uint64_t rejected_full = 0;
    DurationStats insert_latency;
    DurationStats update_latency;
};

enum class UpsertStatus {
    inserted,
    updated,
    rejected_full,
    dropped_unclassified,
};

// Partitioned flow table. A flow's partition is a pure function of its key,
// so one worker owns all mutation for the flows it sees; the per-partition
// mutex exists for the emitter, which borrows whole partitions at interval
// boundaries. Capacity overflow rejects new flows rather than evicting
// active ones — eviction is idle-driven only.
class FlowCache {
public:
    using Classifier =
        std::function<std::optional<uint32_t>(const IpAddr& remote, uint64_t now_ns)>;
    using RecordFn = std::function<void(FlowRecord&)>;

    FlowCache(const RuntimeConfig& cfg, Classifier classify);

    // Full per-packet path: upsert plus one add_packet on every feature
    // state, all under the partition lock.
    UpsertStatus process_packet(const DecodedPacket& pkt);

    // Upsert without feature updates; the bench workload drives this.
    UpsertStatus touch(const FlowKey& key, const IpAddr& remote, uint64_t ts_ns);

    // Removes records idle strictly longer than timeout_s and hands each one
    // to final_collect (under the partition lock) before it is destroyed.
    size_t evict_idle(uint64_t now_ns, uint64_t timeout_s, const RecordFn& final_collect);

    // Final collection for every record, then clears the cache (end of a
    // replay). Records are offered in partition order.
    void drain(const RecordFn& final_collect);

    // Iteration under partition locks. fn must not call back into the cache.
    void for_each(const RecordFn& fn);
    void for_each_service(uint32_t service, const RecordFn& fn);
    void for_each_local(const IpAddr& local, const RecordFn& fn);

    size_t size() const;
    std::vector<size_t> partition_sizes() const;
    size_t partition_count() const { return partitions_.size(); }
    size_t partition_of(const FlowKey& key) const {
        return static_cast<size_t>(flow_key_hash(key) % partitions_.size());
    }

    // Aggregated over partitions; latency quantiles are exact while the
    // combined sample streams fit one reservoir.
    CacheStats stats() const;

    // Timing instrumentation for insert/update latency. Off by default so
    // the hot path carries no clock reads unless someone is measuring.
    void set_latency_tracking(bool enabled) { track_latency_ = enabled; }

private:
    struct Partition {
        mutable std::mutex mu;
        std::unordered_map<FlowKey, FlowRecord, FlowKeyHash> flows;
        CacheStats stats;
    };

    UpsertStatus upsert_locked(Partition& part, const FlowKey& key, const IpAddr& local,
                               const IpAddr& remote, uint64_t ts_ns, FlowRecord** out);

    std::vector<std::unique_ptr<Partition>> partitions_;
    Classifier classify_;
    // Collect lists per service id, resolved once at construction.
    std::vector<std::vector<std::string>> service_collect_;
    uint64_t max_flows_;
    bool drop_unclassified_;
    bool track_latency_ = false;
    std::atomic<uint64_t> size_{0};
};

}  // namespace flowforge
