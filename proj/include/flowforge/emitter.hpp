#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowforge/config.hpp"
#include "flowforge/flow_cache.hpp"

namespace flowforge {

// Byte-accurate accounting of everything written, split into per-feature-class
// payload and framing (record scaffolding: key fields, timestamps, braces,
// newlines). The profiler checks this against actual file sizes, so every
// written byte must be attributed to exactly one bucket.
struct StorageAccount {
    std::map<std::string, uint64_t> class_bytes;
    uint64_t framing_bytes = 0;
    uint64_t total_bytes = 0;
    uint64_t records = 0;
};

// Builds EmitRecords from flow state and writes them as JSON lines, one file
// per service named `<service>-<start-epoch>.jsonl`, rotated after rotate_mb.
// Rows buffer up during a boundary (eviction finals plus interval
// collections) and flush() writes them sorted by flow age so identical runs
// produce identical bytes.
class Emitter {
public:
    Emitter(const RuntimeConfig& cfg, const std::string& out_dir, uint64_t run_start_ns);
    ~Emitter();

    // Collects every flow of the service for [start_ns, end_ns) and buffers
    // one row per flow that produced at least one feature output.
    void collect_interval(FlowCache& cache, uint32_t service, uint64_t start_ns,
                          uint64_t end_ns);

    // Final collection for a flow leaving the cache (idle eviction or end of
    // run). Always produces a row for service-bound flows; unclassified
    // flows have nothing to report and no file to report it in.
    void final_collect(FlowRecord& rec, uint64_t now_ns);

    // Writes all buffered rows: finals first, then interval rows, each group
    // ordered by (created_at, key).
    void flush();

    // Storage accounting sink; optional, may be swapped between intervals.
    void set_storage_account(StorageAccount* account) { account_ = account; }

    uint64_t records_written() const { return records_written_; }
    uint64_t bytes_written() const { return bytes_written_; }
    std::vector<std::string> files_written() const;

private:
    struct Row {
        uint32_t service;
        uint64_t created_at;
        FlowKey key;
        std::string line;                          // serialized record, no newline
        std::vector<std::pair<std::string, uint64_t>> class_sizes;
    };

    struct Writer {
        std::ofstream out;
        std::string base_path;  // without rotation suffix
        std::string current_path;
        uint64_t bytes = 0;     // in the currently open file
        uint32_t rotation = 0;
    };

    nlohmann::json build_record(const FlowRecord& rec, uint64_t start_ns, uint64_t end_ns,
                                bool final_record, double slot_s, CollectMode mode,
                                std::vector<std::pair<std::string, uint64_t>>* class_sizes);
    void write_row(const Row& row);
    Writer& writer_for(uint32_t service);

    const RuntimeConfig& cfg_;
    std::string out_dir_;
    uint64_t run_start_ns_;
    uint64_t rotate_bytes_;
    std::vector<uint64_t> last_flush_ns_;  // per service
    std::vector<Row> final_rows_;
    std::vector<Row> interval_rows_;
    std::map<uint32_t, Writer> writers_;
    StorageAccount* account_ = nullptr;
    uint64_t records_written_ = 0;
    uint64_t bytes_written_ = 0;
};

}  // namespace flowforge
