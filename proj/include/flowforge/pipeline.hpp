#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flowforge/capture.hpp"
#include "flowforge/config.hpp"
#include "flowforge/emitter.hpp"
#include "flowforge/flow_cache.hpp"
#include "flowforge/service_map.hpp"

namespace flowforge {

struct RunCounters {
    uint64_t capture_records = 0;    // frames pulled from the source
    uint64_t packets_processed = 0;  // decoded and dispatched
    uint64_t packets_dropped = 0;    // queue overflow (live mode only)
    uint64_t decode_error_total = 0;
    std::map<std::string, uint64_t> decode_errors;  // by category
    uint64_t dns_packets = 0;   // port-53 payloads offered to ingest
    uint64_t dns_mappings = 0;  // addresses learned from them
    uint64_t cache_full_drops = 0;
    uint64_t unclassified_drops = 0;
    uint64_t emit_records = 0;

    nlohmann::json to_json() const;
};

struct PipelineResult {
    RunCounters counters;
    CacheStats cache;
    std::vector<std::string> output_files;
    uint64_t wall_ns = 0;
    double packets_per_s = 0.0;
};

// Wires capture → decode → DNS ingest → classify/update → timed emission.
//
// Replay mode is single-dispatcher with virtual time taken from packet
// timestamps: emit boundaries fire between packets, with worker queues
// drained first, so two runs over the same file produce identical output
// bytes. DNS responses also quiesce the workers before updating the service
// map — table changes land between packets exactly as in a serial run.
//
// Live mode trades that determinism for wall-clock timers: a separate
// thread collects each service on its Emit cadence while workers keep
// running (per-partition locks keep snapshots consistent), and full queues
// drop packets rather than block the capture loop.
class Pipeline {
public:
    Pipeline(const RuntimeConfig& cfg, const std::string& out_dir);
    ~Pipeline();

    PipelineResult run_replay();
    // stop is observed within ~100 ms; the CLI points it at a signal flag.
    PipelineResult run_live(CaptureSource& source, const std::atomic<bool>& stop);

    ServiceMap& service_map() { return map_; }
    FlowCache& cache() { return cache_; }

    // Storage accounting for the emitter (profiler hook).
    void set_storage_account(StorageAccount* account) { storage_account_ = account; }
    // Invoked after every replay boundary flush with the boundary timestamp;
    // the profiler samples per-class state sizes here.
    void set_boundary_hook(std::function<void(uint64_t)> hook) {
        boundary_hook_ = std::move(hook);
    }

    // Runs at every emit boundary after idle eviction but before interval
    // collection, i.e. while feature states still hold the full cycle's
    // accumulation. Used by the cost profiler to sample peak state size.
    void set_state_hook(std::function<void(uint64_t)> hook) {
        state_hook_ = std::move(hook);
    }
    // Artificial per-packet worker stall for overload testing.
    void set_worker_delay_for_test(uint64_t ns) { worker_delay_ns_ = ns; }

private:
    struct Job {
        std::vector<uint8_t> frame;
        DecodedPacket pkt;
    };

    class WorkerQueue {
    public:
        explicit WorkerQueue(size_t capacity) : capacity_(capacity) {}
        void push_wait(Job&& job);      // replay: backpressure, never drops
        bool push_try(Job&& job);       // live: false when full
        bool pop(Job& out);             // false when closed and drained
        void task_done();
        void wait_idle();               // blocks until nothing queued or in flight
        void close();

    private:
        std::mutex mu_;
        std::condition_variable cv_pop_, cv_push_, cv_idle_;
        std::deque<Job> queue_;
        size_t capacity_;
        uint64_t in_flight_ = 0;  // queued + currently being processed
        bool closed_ = false;
    };

    void start_workers();
    void stop_workers();
    void quiesce();
    void worker_main(size_t index);
    void dispatch(Job&& job, bool lossless);
    bool ingest_if_dns(const DecodedPacket& pkt, bool quiesce_first);
    uint64_t next_boundary() const;
    void flush_boundary(uint64_t boundary_ns);

    const RuntimeConfig& cfg_;
    std::string out_dir_;
    ServiceMap map_;
    FlowCache cache_;
    std::unique_ptr<Emitter> emitter_;

    std::vector<std::unique_ptr<WorkerQueue>> queues_;
    std::vector<std::thread> workers_;

    RunCounters counters_;
    std::atomic<uint64_t> cache_full_drops_{0};
    std::atomic<uint64_t> unclassified_drops_{0};
    std::atomic<uint64_t> queue_drops_{0};

    std::vector<uint64_t> next_emit_ns_;  // per service
    uint64_t run_start_ns_ = 0;

    StorageAccount* storage_account_ = nullptr;
    std::function<void(uint64_t)> boundary_hook_;
    std::function<void(uint64_t)> state_hook_;
    uint64_t worker_delay_ns_ = 0;
};

}  // namespace flowforge
