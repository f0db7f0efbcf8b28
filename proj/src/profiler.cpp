#include "flowforge/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <limits>

#include "flowforge/features/feature.hpp"
#include "flowforge/log.hpp"
#include "flowforge/pcap_io.hpp"
#include "flowforge/service_map.hpp"

namespace flowforge {

namespace {

using SteadyClock = std::chrono::steady_clock;

uint64_t now_ns() {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            SteadyClock::now().time_since_epoch())
            .count());
}

constexpr uint64_t kNsPerSec = 1000000000ull;

// Forwards an inner capture source while writing every packet to a pcap so
// the timing passes can replay exactly what the live run saw.
class TeeSource : public CaptureSource {
public:
    TeeSource(CaptureSource& inner, const std::string& path)
        : inner_(inner), writer_(std::make_unique<PcapWriter>(path)) {}

    Poll poll(RawRecord& out, int timeout_ms) override {
        const Poll p = inner_.poll(out, timeout_ms);
        if (p == Poll::packet && writer_) {
            writer_->write(out.timestamp_ns, out.orig_len, out.data);
        }
        return p;
    }

    void finish() { writer_.reset(); }

private:
    CaptureSource& inner_;
    std::unique_ptr<PcapWriter> writer_;
};

// One serial pass over the trace for a single feature class. Only the
// add_packet call sits between the clock reads; flow lookup, decoding and
// classification happen outside so their cost never contaminates the
// sample. Collection still fires at emit boundaries to keep reset-style
// state (and therefore per-call cost) on its normal lifecycle.
void time_class_pass(const RuntimeConfig& cfg, const std::string& trace,
                     const std::string& spec, ClassCost& out) {
    ServiceMap services(cfg);

    struct Slot {
        std::unique_ptr<FeatureState> state;  // null for unclassified flows
        uint32_t service = 0;
    };
    std::unordered_map<FlowKey, Slot, FlowKeyHash> flows;

    PcapReader reader(trace);
    RawRecord rec;
    std::vector<uint64_t> next_emit;
    bool first = true;

    while (reader.next(rec)) {
        auto pkt = decode_frame(rec.data, rec.timestamp_ns, rec.orig_len,
                                cfg.local_prefixes);
        if (!pkt) {
            continue;
        }
        if (first) {
            first = false;
            next_emit.reserve(cfg.services.size());
            for (const auto& svc : cfg.services) {
                next_emit.push_back(pkt->timestamp_ns + svc.emit_interval_s * kNsPerSec);
            }
        }
        for (uint32_t s = 0; s < next_emit.size(); ++s) {
            const uint64_t emit_ns = cfg.services[s].emit_interval_s * kNsPerSec;
            while (pkt->timestamp_ns >= next_emit[s]) {
                for (auto& [key, slot] : flows) {
                    if (slot.state && slot.service == s) {
                        slot.state->collect(static_cast<double>(cfg.services[s].emit_interval_s),
                                            CollectMode::interval);
                    }
                }
                next_emit[s] += emit_ns;
            }
        }
        services.ingest_dns(*pkt, pkt->timestamp_ns);

        const FlowKey key = flow_key(*pkt);
        auto it = flows.find(key);
        if (it == flows.end()) {
            // Mirror the cache: classification happens once, at the first
            // packet. Unclassified flows stay as tombstones so a later DNS
            // mapping cannot retroactively change their fate.
            Slot slot;
            if (auto svc = services.classify(pkt->remote_ip(), pkt->timestamp_ns)) {
                slot.service = *svc;
                slot.state = make_feature_state(spec);
            }
            it = flows.emplace(key, std::move(slot)).first;
        }
        FeatureState* state = it->second.state.get();
        if (state == nullptr) {
            continue;
        }

        const uint64_t t0 = now_ns();
        state->add_packet(*pkt);
        const uint64_t dt = now_ns() - t0;

        out.add_packet.add(dt);
        FlowTiming& ft = out.per_flow[key];
        ++ft.calls;
        ft.total_ns += dt;
    }
}

// Shared between replay and live profiling: wires the state/storage hooks,
// runs the pipeline, then runs the per-class timing passes over `trace`.
// `before_timing` runs between the two phases (the live path uses it to
// flush the teed capture before the timing passes replay it).
CostProfileReport profile_common(const RuntimeConfig& prof_cfg, const std::string& out_dir,
                                 const ProfileOptions& opts, bool live,
                                 CaptureSource* source, const std::atomic<bool>* stop,
                                 const std::string& timing_trace,
                                 const std::function<void()>& before_timing) {
    CostProfileReport rep;
    rep.mode = live ? "live" : "replay";
    rep.trace_id = opts.trace_id;
    rep.config_hash = prof_cfg.hash_hex();
    rep.classes = opts.classes;
    for (const auto& svc : prof_cfg.services) {
        rep.emit_intervals_s[svc.name] = svc.emit_interval_s;
    }
    for (const auto& cls : opts.classes) {
        rep.per_class.emplace(cls, ClassCost(opts.reservoir));
    }
    rep.timer = measure_timer();
    if (rep.timer.coarse_warning) {
        FF_LOG_WARN("timer resolution %llu ns is coarser than 100 ns; "
                    "per-call timings will be quantized",
                    static_cast<unsigned long long>(rep.timer.resolution_ns));
    }

    Pipeline pipe(prof_cfg, out_dir);
    StorageAccount account;
    pipe.set_storage_account(&account);

    std::map<std::string, uint64_t> prev_storage;
    uint64_t prev_framing = 0;
    pipe.set_state_hook([&](uint64_t boundary_ns) {
        auto sizes = profile_state(pipe.cache(), prof_cfg);
        for (const auto& cls : opts.classes) {
            const auto it = sizes.find(cls);
            rep.per_class.at(cls).state_bytes.push_back(it == sizes.end() ? 0 : it->second);
        }
        rep.cycle_end_ns.push_back(boundary_ns);
    });
    pipe.set_boundary_hook([&](uint64_t) {
        for (const auto& cls : opts.classes) {
            const auto it = account.class_bytes.find(cls);
            const uint64_t cur = it == account.class_bytes.end() ? 0 : it->second;
            rep.per_class.at(cls).storage_bytes.push_back(cur - prev_storage[cls]);
            prev_storage[cls] = cur;
        }
        rep.framing_bytes.push_back(account.framing_bytes - prev_framing);
        prev_framing = account.framing_bytes;
    });

    const PipelineResult result = live ? pipe.run_live(*source, *stop) : pipe.run_replay();
    rep.counters = result.counters;
    rep.wall_ns = result.wall_ns;
    for (const auto& cls : opts.classes) {
        const auto it = account.class_bytes.find(cls);
        rep.per_class.at(cls).storage_total = it == account.class_bytes.end() ? 0 : it->second;
    }
    rep.framing_total = account.framing_bytes;
    rep.output_total = account.total_bytes;

    if (before_timing) {
        before_timing();
    }
    for (const auto& cls : opts.classes) {
        time_class_pass(prof_cfg, timing_trace, cls, rep.per_class.at(cls));
    }
    return rep;
}

}  // namespace

TimerInfo measure_timer() {
    TimerInfo info;

    uint64_t best = std::numeric_limits<uint64_t>::max();
    for (int i = 0; i < 512; ++i) {
        const uint64_t a = now_ns();
        uint64_t b = now_ns();
        while (b == a) {
            b = now_ns();
        }
        best = std::min(best, b - a);
    }
    info.resolution_ns = best;

    SampleReservoir empties(4096);
    for (int i = 0; i < 4096; ++i) {
        const uint64_t a = now_ns();
        const uint64_t b = now_ns();
        empties.add(b - a);
    }
    info.overhead_ns = static_cast<double>(empties.median());
    info.coarse_warning = info.resolution_ns > 100;
    return info;
}

std::map<std::string, uint64_t> profile_state(FlowCache& cache, const RuntimeConfig& cfg) {
    std::map<std::string, uint64_t> totals;
    cache.for_each([&](FlowRecord& rec) {
        if (!rec.service) {
            return;
        }
        const auto& names = cfg.services[*rec.service].collect;
        const size_t n = std::min(names.size(), rec.feature_states.size());
        for (size_t i = 0; i < n; ++i) {
            totals[names[i]] += rec.feature_states[i]->approximate_size();
        }
    });
    return totals;
}

RuntimeConfig config_with_classes(const RuntimeConfig& cfg,
                                  const std::vector<std::string>& classes) {
    if (classes.empty()) {
        throw ConfigError("profiling requires at least one feature class");
    }
    for (size_t i = 0; i < classes.size(); ++i) {
        std::string error;
        if (!validate_feature_spec(classes[i], &error)) {
            throw ConfigError("class \"" + classes[i] + "\": " + error);
        }
        for (size_t j = 0; j < i; ++j) {
            if (classes[j] == classes[i]) {
                throw ConfigError("class \"" + classes[i] + "\" listed twice");
            }
        }
    }
    RuntimeConfig out = cfg;
    for (auto& svc : out.services) {
        svc.collect = classes;
    }
    return out;
}

CostProfileReport profile_replay(const RuntimeConfig& cfg, const std::string& out_dir,
                                 const ProfileOptions& opts) {
    RuntimeConfig prof_cfg = config_with_classes(cfg, opts.classes);
    ProfileOptions eff = opts;
    if (eff.trace_id.empty()) {
        eff.trace_id = prof_cfg.pcap_file;
    }
    return profile_common(prof_cfg, out_dir, eff, /*live=*/false, nullptr, nullptr,
                          prof_cfg.pcap_file, {});
}

CostProfileReport profile_live(const RuntimeConfig& cfg, CaptureSource& source,
                               const std::atomic<bool>& stop, const std::string& out_dir,
                               const ProfileOptions& opts) {
    RuntimeConfig prof_cfg = config_with_classes(cfg, opts.classes);
    ProfileOptions eff = opts;
    if (eff.trace_id.empty()) {
        eff.trace_id = "live:" + prof_cfg.capture_interface;
    }
    std::filesystem::create_directories(out_dir);
    const std::string tee_path =
        (std::filesystem::path(out_dir) / "profile-capture.pcap").string();

    TeeSource tee(source, tee_path);
    return profile_common(prof_cfg, out_dir, eff, /*live=*/true, &tee, &stop, tee_path,
                          [&tee] { tee.finish(); });
}

nlohmann::json CostProfileReport::to_json() const {
    nlohmann::json per = nlohmann::json::object();
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) {
        grid[i] = static_cast<double>(i) / 100.0;
    }
    for (const auto& [name, cost] : per_class) {
        const RunningStats& run = cost.add_packet.running;
        const SampleReservoir& res = cost.add_packet.reservoir;
        per[name] = {
            {"state_bytes_per_cycle", cost.state_bytes},
            {"storage_bytes_per_cycle", cost.storage_bytes},
            {"storage_total_bytes", cost.storage_total},
            {"add_packet_ns",
             {
                 {"count", run.count},
                 {"mean", run.mean()},
                 {"min", run.min_or_zero()},
                 {"max", run.max},
                 {"median", res.median()},
                 {"p90", res.quantile(0.90)},
                 {"p99", res.quantile(0.99)},
                 {"quantiles", res.quantiles(grid)},
                 {"reservoir_capacity", res.capacity()},
                 {"exact", res.exact()},
             }},
        };
    }
    return nlohmann::json{
        {"schema", schema},
        {"mode", mode},
        {"trace", trace_id},
        {"config_hash", config_hash},
        {"classes", classes},
        {"emit_intervals_s", emit_intervals_s},
        {"cycle_end_ns", cycle_end_ns},
        {"framing_bytes_per_cycle", framing_bytes},
        {"framing_total_bytes", framing_total},
        {"output_total_bytes", output_total},
        {"timer",
         {
             {"resolution_ns", timer.resolution_ns},
             {"overhead_ns", timer.overhead_ns},
             {"coarse_warning", timer.coarse_warning},
         }},
        {"per_class", per},
        {"run",
         {
             {"counters", counters.to_json()},
             {"wall_ns", wall_ns},
         }},
    };
}

}  // namespace flowforge
