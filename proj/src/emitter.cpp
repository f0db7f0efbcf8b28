#include "flowforge/emitter.hpp"

#include <algorithm>
#include <filesystem>
#include <tuple>

namespace flowforge {

namespace {

constexpr uint64_t kNsPerSec = 1000000000ull;

// Service names come from user config; keep filenames tame.
std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (!ok) {
            c = '_';
        }
    }
    return out.empty() ? "service" : out;
}

}  // namespace

Emitter::Emitter(const RuntimeConfig& cfg, const std::string& out_dir, uint64_t run_start_ns)
    : cfg_(cfg),
      out_dir_(out_dir),
      run_start_ns_(run_start_ns),
      rotate_bytes_(cfg.rotate_mb * 1024 * 1024),
      last_flush_ns_(cfg.services.size(), run_start_ns) {
    std::filesystem::create_directories(out_dir_);
}

Emitter::~Emitter() {
    flush();
}

nlohmann::json Emitter::build_record(
    const FlowRecord& rec, uint64_t start_ns, uint64_t end_ns, bool final_record,
    double slot_s, CollectMode mode,
    std::vector<std::pair<std::string, uint64_t>>* class_sizes) {
    const ServiceClassSpec& svc = cfg_.services[*rec.service];

    const bool local_is_lo = rec.local_ip == rec.key.addr_lo;
    nlohmann::json features = nlohmann::json::object();
    for (size_t i = 0; i < rec.feature_states.size(); ++i) {
        auto out = rec.feature_states[i]->collect(slot_s, mode);
        if (out) {
            const std::string& name = svc.collect[i];
            class_sizes->emplace_back(name, out->dump().size());
            features[name] = std::move(*out);
        }
    }

    return nlohmann::json{
        {"interval_start", start_ns},
        {"interval_end", end_ns},
        {"service", svc.name},
        {"final", final_record},
        {"flow",
         {{"proto", rec.key.protocol == Transport::tcp ? "tcp" : "udp"},
          {"local_ip", rec.local_ip.to_string()},
          {"local_port", local_is_lo ? rec.key.port_lo : rec.key.port_hi},
          {"remote_ip", rec.remote_ip.to_string()},
          {"remote_port", local_is_lo ? rec.key.port_hi : rec.key.port_lo}}},
        {"features", std::move(features)},
    };
}

void Emitter::collect_interval(FlowCache& cache, uint32_t service, uint64_t start_ns,
                               uint64_t end_ns) {
    const double slot_s =
        static_cast<double>(end_ns - start_ns) / static_cast<double>(kNsPerSec);
    cache.for_each_service(service, [&](FlowRecord& rec) {
        // A flow that saw no packets this interval is left untouched: its
        // states were reset at the previous collection, so invoking them
        // again would only emit zero-valued rows.
        if (rec.last_seen < start_ns) {
            return;
        }
        std::vector<std::pair<std::string, uint64_t>> sizes;
        nlohmann::json j = build_record(rec, start_ns, end_ns, false, slot_s,
                                        CollectMode::interval, &sizes);
        // A flow with nothing to say this interval produces no record.
        if (j["features"].empty()) {
            return;
        }
        interval_rows_.push_back(
            Row{service, rec.created_at, rec.key, j.dump(), std::move(sizes)});
    });
    last_flush_ns_[service] = end_ns;
}

void Emitter::final_collect(FlowRecord& rec, uint64_t now_ns) {
    if (!rec.service) {
        return;  // unclassified flows have no output stream
    }
    const uint32_t service = *rec.service;
    uint64_t start_ns = std::max(rec.created_at, last_flush_ns_[service]);
    if (start_ns > now_ns) {
        start_ns = now_ns;
    }
    // Zero-length tails still need a usable rate denominator.
    const uint64_t slot_ns = std::max<uint64_t>(now_ns - start_ns, 1);
    const double slot_s = static_cast<double>(slot_ns) / static_cast<double>(kNsPerSec);

    std::vector<std::pair<std::string, uint64_t>> sizes;
    nlohmann::json j = build_record(rec, start_ns, now_ns, true, slot_s,
                                    CollectMode::final_flush, &sizes);
    // Final records are written even when empty: they are the one guaranteed
    // trace that a flow existed and left.
    final_rows_.push_back(Row{service, rec.created_at, rec.key, j.dump(), std::move(sizes)});
}

void Emitter::flush() {
    auto order = [](const Row& a, const Row& b) {
        return std::tie(a.created_at, a.key) < std::tie(b.created_at, b.key);
    };
    std::sort(final_rows_.begin(), final_rows_.end(), order);
    std::sort(interval_rows_.begin(), interval_rows_.end(), order);
    for (const Row& row : final_rows_) {
        write_row(row);
    }
    for (const Row& row : interval_rows_) {
        write_row(row);
    }
    final_rows_.clear();
    interval_rows_.clear();
    for (auto& [service, writer] : writers_) {
        writer.out.flush();
    }
}

Emitter::Writer& Emitter::writer_for(uint32_t service) {
    auto it = writers_.find(service);
    if (it != writers_.end()) {
        return it->second;
    }
    Writer w;
    const std::string stem = sanitize(cfg_.services[service].name) + "-" +
                             std::to_string(run_start_ns_ / kNsPerSec);
    w.base_path = (std::filesystem::path(out_dir_) / stem).string();
    w.current_path = w.base_path + ".jsonl";
    w.out.open(w.current_path, std::ios::binary | std::ios::trunc);
    return writers_.emplace(service, std::move(w)).first->second;
}

void Emitter::write_row(const Row& row) {
    Writer& w = writer_for(row.service);
    const uint64_t line_bytes = row.line.size() + 1;

    if (w.bytes > 0 && w.bytes + line_bytes > rotate_bytes_) {
        w.out.close();
        ++w.rotation;
        w.current_path = w.base_path + "." + std::to_string(w.rotation) + ".jsonl";
        w.out.open(w.current_path, std::ios::binary | std::ios::trunc);
        w.bytes = 0;
    }

    w.out.write(row.line.data(), static_cast<std::streamsize>(row.line.size()));
    w.out.put('\n');
    w.bytes += line_bytes;
    bytes_written_ += line_bytes;
    ++records_written_;

    if (account_ != nullptr) {
        uint64_t feature_bytes = 0;
        for (const auto& [name, size] : row.class_sizes) {
            account_->class_bytes[name] += size;
            feature_bytes += size;
        }
        account_->framing_bytes += line_bytes - feature_bytes;
        account_->total_bytes += line_bytes;
        ++account_->records;
    }
}

std::vector<std::string> Emitter::files_written() const {
    std::vector<std::string> files;
    for (const auto& [service, w] : writers_) {
        for (uint32_t r = 0; r <= w.rotation; ++r) {
            if (r == 0) {
                files.push_back(w.base_path + ".jsonl");
            } else {
                files.push_back(w.base_path + "." + std::to_string(r) + ".jsonl");
            }
        }
    }
    return files;
}

}  // namespace flowforge
