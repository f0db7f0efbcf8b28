#include "flowforge/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "flowforge/log.hpp"

namespace flowforge {

namespace {

constexpr uint64_t kNsPerSec = 1000000000ull;
constexpr uint64_t kNoBoundary = UINT64_MAX;

uint64_t wall_now_ns() {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

uint64_t steady_now_ns() {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

bool looks_like_dns(const DecodedPacket& pkt) {
    return pkt.transport == Transport::udp &&
           (pkt.src_port == 53 || pkt.dst_port == 53) && !pkt.payload_bytes.empty();
}

}  // namespace

nlohmann::json RunCounters::to_json() const {
    return {
        {"capture_records", capture_records},
        {"packets_processed", packets_processed},
        {"packets_dropped", packets_dropped},
        {"decode_errors", {{"total", decode_error_total}, {"by_category", decode_errors}}},
        {"dns", {{"packets", dns_packets}, {"mappings", dns_mappings}}},
        {"cache_full_drops", cache_full_drops},
        {"unclassified_drops", unclassified_drops},
        {"emit_records", emit_records},
    };
}

// ---- worker queue -----------------------------------------------------------

void Pipeline::WorkerQueue::push_wait(Job&& job) {
    std::unique_lock lock(mu_);
    cv_push_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
    if (closed_) {
        return;
    }
    queue_.push_back(std::move(job));
    ++in_flight_;
    cv_pop_.notify_one();
}

bool Pipeline::WorkerQueue::push_try(Job&& job) {
    std::lock_guard lock(mu_);
    if (closed_ || queue_.size() >= capacity_) {
        return false;
    }
    queue_.push_back(std::move(job));
    ++in_flight_;
    cv_pop_.notify_one();
    return true;
}

bool Pipeline::WorkerQueue::pop(Job& out) {
    std::unique_lock lock(mu_);
    cv_pop_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) {
        return false;
    }
    out = std::move(queue_.front());
    queue_.pop_front();
    cv_push_.notify_one();
    return true;
}

void Pipeline::WorkerQueue::task_done() {
    std::lock_guard lock(mu_);
    --in_flight_;
    if (in_flight_ == 0) {
        cv_idle_.notify_all();
    }
}

void Pipeline::WorkerQueue::wait_idle() {
    std::unique_lock lock(mu_);
    cv_idle_.wait(lock, [&] { return in_flight_ == 0; });
}

void Pipeline::WorkerQueue::close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_pop_.notify_all();
    cv_push_.notify_all();
}

// ---- pipeline ---------------------------------------------------------------

Pipeline::Pipeline(const RuntimeConfig& cfg, const std::string& out_dir)
    : cfg_(cfg),
      out_dir_(out_dir),
      map_(cfg),
      cache_(cfg, [this](const IpAddr& remote, uint64_t now_ns) {
          return map_.classify(remote, now_ns);
      }) {}

Pipeline::~Pipeline() {
    stop_workers();
}

void Pipeline::start_workers() {
    stop_workers();
    queues_.clear();
    for (uint32_t i = 0; i < cfg_.worker_count; ++i) {
        queues_.push_back(std::make_unique<WorkerQueue>(cfg_.queue_depth));
    }
    for (uint32_t i = 0; i < cfg_.worker_count; ++i) {
        workers_.emplace_back(&Pipeline::worker_main, this, i);
    }
}

void Pipeline::stop_workers() {
    for (auto& q : queues_) {
        q->close();
    }
    for (auto& t : workers_) {
        if (t.joinable()) {
            t.join();
        }
    }
    workers_.clear();
}

void Pipeline::quiesce() {
    for (auto& q : queues_) {
        q->wait_idle();
    }
}

void Pipeline::worker_main(size_t index) {
    WorkerQueue& queue = *queues_[index];
    Job job;
    while (queue.pop(job)) {
        if (worker_delay_ns_ > 0) {
            const uint64_t until = steady_now_ns() + worker_delay_ns_;
            while (steady_now_ns() < until) {
                // busy wait: simulates an expensive feature under test
            }
        }
        switch (cache_.process_packet(job.pkt)) {
            case UpsertStatus::rejected_full:
                cache_full_drops_.fetch_add(1, std::memory_order_relaxed);
                break;
            case UpsertStatus::dropped_unclassified:
                unclassified_drops_.fetch_add(1, std::memory_order_relaxed);
                break;
            default:
                break;
        }
        queue.task_done();
    }
}

void Pipeline::dispatch(Job&& job, bool lossless) {
    const size_t idx = cache_.partition_of(flow_key(job.pkt));
    if (lossless) {
        queues_[idx]->push_wait(std::move(job));
        ++counters_.packets_processed;
    } else if (queues_[idx]->push_try(std::move(job))) {
        ++counters_.packets_processed;
    } else {
        queue_drops_.fetch_add(1, std::memory_order_relaxed);
    }
}

bool Pipeline::ingest_if_dns(const DecodedPacket& pkt, bool quiesce_first) {
    if (!looks_like_dns(pkt)) {
        return false;
    }
    if (quiesce_first) {
        // Table changes must land between packets, as in a serial run.
        quiesce();
    }
    ++counters_.dns_packets;
    counters_.dns_mappings += map_.ingest_dns(pkt, pkt.timestamp_ns);
    return true;
}

uint64_t Pipeline::next_boundary() const {
    uint64_t next = kNoBoundary;
    for (uint64_t b : next_emit_ns_) {
        next = std::min(next, b);
    }
    return next;
}

void Pipeline::flush_boundary(uint64_t boundary_ns) {
    cache_.evict_idle(boundary_ns, cfg_.flow_idle_timeout_s, [&](FlowRecord& rec) {
        emitter_->final_collect(rec, boundary_ns);
    });
    if (state_hook_) {
        // After eviction, before interval collection: feature states still
        // hold the whole cycle's accumulation, so this is the cycle peak.
        state_hook_(boundary_ns);
    }
    for (uint32_t s = 0; s < next_emit_ns_.size(); ++s) {
        if (next_emit_ns_[s] == boundary_ns) {
            const uint64_t emit_ns = cfg_.services[s].emit_interval_s * kNsPerSec;
            emitter_->collect_interval(cache_, s, boundary_ns - emit_ns, boundary_ns);
            next_emit_ns_[s] += emit_ns;
        }
    }
    map_.sweep_expired(boundary_ns);
    emitter_->flush();
    if (boundary_hook_) {
        boundary_hook_(boundary_ns);
    }
}

PipelineResult Pipeline::run_replay() {
    PcapReplaySource source(cfg_.pcap_file);
    counters_ = RunCounters{};
    cache_full_drops_ = 0;
    unclassified_drops_ = 0;
    queue_drops_ = 0;
    next_emit_ns_.clear();
    emitter_.reset();

    const uint64_t t0 = steady_now_ns();
    start_workers();

    uint64_t last_ts = 0;
    bool have_first = false;
    RawRecord rec;
    while (source.poll(rec, 0) == CaptureSource::Poll::packet) {
        ++counters_.capture_records;
        DecodeError err = DecodeError::none;
        auto pkt = decode_frame(rec.data, rec.timestamp_ns, rec.orig_len,
                                cfg_.local_prefixes, &err);
        if (!pkt) {
            ++counters_.decode_error_total;
            ++counters_.decode_errors[decode_error_name(err)];
            continue;
        }
        if (!have_first) {
            have_first = true;
            run_start_ns_ = pkt->timestamp_ns;
            emitter_ = std::make_unique<Emitter>(cfg_, out_dir_, run_start_ns_);
            emitter_->set_storage_account(storage_account_);
            next_emit_ns_.clear();
            for (const ServiceClassSpec& svc : cfg_.services) {
                next_emit_ns_.push_back(run_start_ns_ + svc.emit_interval_s * kNsPerSec);
            }
        }
        last_ts = std::max(last_ts, pkt->timestamp_ns);

        // Virtual time: packet timestamps drive the emit clock.
        uint64_t boundary;
        while ((boundary = next_boundary()) != kNoBoundary &&
               pkt->timestamp_ns >= boundary) {
            quiesce();
            flush_boundary(boundary);
        }

        if (ingest_if_dns(*pkt, /*quiesce_first=*/true)) {
            // fall through: the DNS packet is also a flow packet
        }
        dispatch(Job{std::move(rec.data), *pkt}, /*lossless=*/true);
    }

    quiesce();
    if (emitter_) {
        const uint64_t eof_ts = std::max(last_ts, run_start_ns_);
        cache_.drain([&](FlowRecord& r) { emitter_->final_collect(r, eof_ts); });
        emitter_->flush();
    }
    stop_workers();

    PipelineResult result;
    counters_.packets_dropped = queue_drops_.load();
    counters_.cache_full_drops = cache_full_drops_.load();
    counters_.unclassified_drops = unclassified_drops_.load();
    counters_.emit_records = emitter_ ? emitter_->records_written() : 0;
    result.counters = counters_;
    result.cache = cache_.stats();
    if (emitter_) {
        result.output_files = emitter_->files_written();
    }
    result.wall_ns = steady_now_ns() - t0;
    result.packets_per_s =
        result.wall_ns == 0
            ? 0.0
            : static_cast<double>(counters_.packets_processed) /
                  (static_cast<double>(result.wall_ns) / static_cast<double>(kNsPerSec));
    return result;
}

PipelineResult Pipeline::run_live(CaptureSource& source, const std::atomic<bool>& stop) {
    counters_ = RunCounters{};
    cache_full_drops_ = 0;
    unclassified_drops_ = 0;
    queue_drops_ = 0;

    run_start_ns_ = wall_now_ns();
    emitter_ = std::make_unique<Emitter>(cfg_, out_dir_, run_start_ns_);
    emitter_->set_storage_account(storage_account_);
    next_emit_ns_.clear();
    for (const ServiceClassSpec& svc : cfg_.services) {
        next_emit_ns_.push_back(run_start_ns_ + svc.emit_interval_s * kNsPerSec);
    }

    const uint64_t t0 = steady_now_ns();
    start_workers();

    // Wall-clock emit timers run beside the capture loop; per-partition
    // locks inside the cache keep their snapshots consistent.
    std::atomic<bool> emit_stop{false};
    std::thread emit_thread([&] {
        while (!emit_stop.load(std::memory_order_relaxed)) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            uint64_t boundary;
            while ((boundary = next_boundary()) != kNoBoundary &&
                   wall_now_ns() >= boundary) {
                flush_boundary(boundary);
            }
        }
    });

    uint64_t last_log_ns = t0;
    RawRecord rec;
    while (!stop.load(std::memory_order_relaxed)) {
        const auto got = source.poll(rec, 100);
        if (got == CaptureSource::Poll::closed) {
            break;
        }
        if (got == CaptureSource::Poll::timeout) {
            continue;
        }
        ++counters_.capture_records;
        DecodeError err = DecodeError::none;
        auto pkt = decode_frame(rec.data, rec.timestamp_ns, rec.orig_len,
                                cfg_.local_prefixes, &err);
        if (!pkt) {
            ++counters_.decode_error_total;
            ++counters_.decode_errors[decode_error_name(err)];
            continue;
        }
        ingest_if_dns(*pkt, /*quiesce_first=*/false);
        dispatch(Job{std::move(rec.data), *pkt}, /*lossless=*/false);

        const uint64_t now = steady_now_ns();
        if (now - last_log_ns >= 5 * kNsPerSec) {
            last_log_ns = now;
            FF_LOG_INFO("live: %llu processed, %llu dropped, cache %zu flows",
                        static_cast<unsigned long long>(counters_.packets_processed),
                        static_cast<unsigned long long>(
                            queue_drops_.load(std::memory_order_relaxed)),
                        cache_.size());
        }
    }

    emit_stop = true;
    emit_thread.join();
    quiesce();
    stop_workers();

    // Graceful shutdown: everything still in the cache gets its final record.
    const uint64_t end_ns = wall_now_ns();
    cache_.drain([&](FlowRecord& r) { emitter_->final_collect(r, end_ns); });
    emitter_->flush();

    PipelineResult result;
    counters_.packets_dropped = queue_drops_.load();
    counters_.cache_full_drops = cache_full_drops_.load();
    counters_.unclassified_drops = unclassified_drops_.load();
    counters_.emit_records = emitter_->records_written();
    result.counters = counters_;
    result.cache = cache_.stats();
    result.output_files = emitter_->files_written();
    result.wall_ns = steady_now_ns() - t0;
    result.packets_per_s =
        result.wall_ns == 0
            ? 0.0
            : static_cast<double>(counters_.packets_processed) /
                  (static_cast<double>(result.wall_ns) / static_cast<double>(kNsPerSec));
    return result;
}

}  // namespace flowforge
