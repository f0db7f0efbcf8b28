#include "flowforge/flow_cache.hpp"

#include <chrono>

namespace flowforge {

namespace {

constexpr uint64_t kNsPerSec = 1000000000ull;

uint64_t now_ticks() {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

}  // namespace

FlowCache::FlowCache(const RuntimeConfig& cfg, Classifier classify)
    : classify_(std::move(classify)),
      max_flows_(cfg.max_flows),
      drop_unclassified_(cfg.drop_unclassified) {
    for (uint32_t i = 0; i < cfg.worker_count; ++i) {
        partitions_.push_back(std::make_unique<Partition>());
    }
    service_collect_.reserve(cfg.services.size());
    for (const ServiceClassSpec& svc : cfg.services) {
        service_collect_.push_back(svc.collect);
    }
}

UpsertStatus FlowCache::upsert_locked(Partition& part, const FlowKey& key,
                                      const IpAddr& local, const IpAddr& remote,
                                      uint64_t ts_ns, FlowRecord** out) {
    const uint64_t t0 = track_latency_ ? now_ticks() : 0;

    auto it = part.flows.find(key);
    if (it != part.flows.end()) {
        FlowRecord& rec = it->second;
        rec.last_seen = std::max(rec.last_seen, ts_ns);
        ++part.stats.updates;
        if (track_latency_) {
            part.stats.update_latency.add(now_ticks() - t0);
        }
        *out = &rec;
        return UpsertStatus::updated;
    }

    std::optional<uint32_t> service = classify_ ? classify_(remote, ts_ns) : std::nullopt;
    if (!service && drop_unclassified_) {
        *out = nullptr;
        return UpsertStatus::dropped_unclassified;
    }

    // Optimistic global reservation keeps the cap exact without a lock
    // spanning partitions.
    if (size_.fetch_add(1, std::memory_order_relaxed) >= max_flows_) {
        size_.fetch_sub(1, std::memory_order_relaxed);
        ++part.stats.rejected_full;
        *out = nullptr;
        return UpsertStatus::rejected_full;
    }

    FlowRecord rec;
    rec.key = key;
    rec.service = service;
    rec.created_at = ts_ns;
    rec.last_seen = ts_ns;
    rec.local_ip = local;
    rec.remote_ip = remote;
    if (service) {
        const auto& collect = service_collect_.at(*service);
        rec.feature_states.reserve(collect.size());
        for (const std::string& spec : collect) {
            rec.feature_states.push_back(make_feature_state(spec));
        }
    }
    auto [pos, inserted] = part.flows.emplace(key, std::move(rec));
    (void)inserted;
    ++part.stats.inserts;
    if (track_latency_) {
        part.stats.insert_latency.add(now_ticks() - t0);
    }
    *out = &pos->second;
    return UpsertStatus::inserted;
}

UpsertStatus FlowCache::process_packet(const DecodedPacket& pkt) {
    const FlowKey key = flow_key(pkt);
    Partition& part = *partitions_[partition_of(key)];
    std::lock_guard lock(part.mu);

    FlowRecord* rec = nullptr;
    const UpsertStatus status =
        upsert_locked(part, key, pkt.local_ip(), pkt.remote_ip(), pkt.timestamp_ns, &rec);
    if (rec != nullptr) {
        for (auto& state : rec->feature_states) {
            state->add_packet(pkt);
        }
    }
    return status;
}

UpsertStatus FlowCache::touch(const FlowKey& key, const IpAddr& remote, uint64_t ts_ns) {
    Partition& part = *partitions_[partition_of(key)];
    std::lock_guard lock(part.mu);
    FlowRecord* rec = nullptr;
    return upsert_locked(part, key, IpAddr{}, remote, ts_ns, &rec);
}

size_t FlowCache::evict_idle(uint64_t now_ns, uint64_t timeout_s,
                             const RecordFn& final_collect) {
    const uint64_t timeout_ns = timeout_s * kNsPerSec;
    size_t removed = 0;
    for (auto& part_ptr : partitions_) {
        Partition& part = *part_ptr;
        std::lock_guard lock(part.mu);
        for (auto it = part.flows.begin(); it != part.flows.end();) {
            FlowRecord& rec = it->second;
            const bool idle = now_ns > rec.last_seen && now_ns - rec.last_seen > timeout_ns;
            if (idle) {
                if (final_collect) {
                    final_collect(rec);
                }
                it = part.flows.erase(it);
                ++part.stats.evictions;
                size_.fetch_sub(1, std::memory_order_relaxed);
                ++removed;
            } else {
                ++it;
            }
        }
    }
    return removed;
}

void FlowCache::drain(const RecordFn& final_collect) {
    for (auto& part_ptr : partitions_) {
        Partition& part = *part_ptr;
        std::lock_guard lock(part.mu);
        for (auto& [key, rec] : part.flows) {
            if (final_collect) {
                final_collect(rec);
            }
            ++part.stats.evictions;
            size_.fetch_sub(1, std::memory_order_relaxed);
        }
        part.flows.clear();
    }
}

void FlowCache::for_each(const RecordFn& fn) {
    for (auto& part_ptr : partitions_) {
        Partition& part = *part_ptr;
        std::lock_guard lock(part.mu);
        for (auto& [key, rec] : part.flows) {
            fn(rec);
        }
    }
}

void FlowCache::for_each_service(uint32_t service, const RecordFn& fn) {
    for_each([&](FlowRecord& rec) {
        if (rec.service && *rec.service == service) {
            fn(rec);
        }
    });
}

void FlowCache::for_each_local(const IpAddr& local, const RecordFn& fn) {
    for_each([&](FlowRecord& rec) {
        if (rec.local_ip == local) {
            fn(rec);
        }
    });
}

size_t FlowCache::size() const {
    return size_.load(std::memory_order_relaxed);
}

std::vector<size_t> FlowCache::partition_sizes() const {
    std::vector<size_t> sizes;
    sizes.reserve(partitions_.size());
    for (const auto& part_ptr : partitions_) {
        std::lock_guard lock(part_ptr->mu);
        sizes.push_back(part_ptr->flows.size());
    }
    return sizes;
}

CacheStats FlowCache::stats() const {
    CacheStats total;
    for (const auto& part_ptr : partitions_) {
        std::lock_guard lock(part_ptr->mu);
        const CacheStats& s = part_ptr->stats;
        total.inserts += s.inserts;
        total.updates += s.updates;
        total.evictions += s.evictions;
        total.rejected_full += s.rejected_full;
        total.insert_latency.absorb(s.insert_latency);
        total.update_latency.absorb(s.update_latency);
    }
    total.current_size = size_.load(std::memory_order_relaxed);
    return total;
}

}  // namespace flowforge
