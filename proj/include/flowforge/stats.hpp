#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace flowforge {

// Streaming count/mean/min/max over uint64 samples (durations in ns, sizes in bytes).
struct RunningStats {
    uint64_t count = 0;
    double sum = 0.0;
    uint64_t min = std::numeric_limits<uint64_t>::max();
    uint64_t max = 0;

    void add(uint64_t v) {
        ++count;
        sum += static_cast<double>(v);
        min = std::min(min, v);
        max = std::max(max, v);
    }

    double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
    uint64_t min_or_zero() const { return count == 0 ? 0 : min; }
};

// Fixed-size reservoir (algorithm R) for quantiles over an unbounded stream.
// Exact as long as the stream fits in the reservoir. Seeded deterministically.
class SampleReservoir {
public:
    explicit SampleReservoir(size_t capacity = 65536, uint64_t seed = 0x5eed5eedULL)
        : capacity_(capacity), rng_(seed) {
        samples_.reserve(std::min<size_t>(capacity, 4096));
    }

    void add(uint64_t v) {
        ++seen_;
        if (samples_.size() < capacity_) {
            samples_.push_back(v);
            return;
        }
        std::uniform_int_distribution<uint64_t> dist(0, seen_ - 1);
        const uint64_t slot = dist(rng_);
        if (slot < capacity_) {
            samples_[slot] = v;
        }
    }

    uint64_t seen() const { return seen_; }
    size_t size() const { return samples_.size(); }
    size_t capacity() const { return capacity_; }
    bool exact() const { return seen_ <= capacity_; }

    // Quantile by nearest-rank over the sorted reservoir; q in [0, 1].
    uint64_t quantile(double q) const {
        if (samples_.empty()) {
            return 0;
        }
        std::vector<uint64_t> sorted = samples_;
        std::sort(sorted.begin(), sorted.end());
        return pick(sorted, q);
    }

    uint64_t median() const { return quantile(0.5); }

    // Folds another reservoir's retained samples into this one. Exact when
    // the combined streams fit; otherwise an approximation that slightly
    // over-weights the other stream's survivors, which is fine for the
    // diagnostic aggregation this is used for.
    void absorb(const SampleReservoir& other) {
        for (uint64_t v : other.samples_) {
            add(v);
        }
    }

    // All requested quantiles with a single sort.
    std::vector<uint64_t> quantiles(const std::vector<double>& qs) const {
        std::vector<uint64_t> out;
        out.reserve(qs.size());
        if (samples_.empty()) {
            out.assign(qs.size(), 0);
            return out;
        }
        std::vector<uint64_t> sorted = samples_;
        std::sort(sorted.begin(), sorted.end());
        for (double q : qs) {
            out.push_back(pick(sorted, q));
        }
        return out;
    }

private:
    static uint64_t pick(const std::vector<uint64_t>& sorted, double q) {
        q = std::clamp(q, 0.0, 1.0);
        size_t idx = static_cast<size_t>(q * static_cast<double>(sorted.size() - 1) + 0.5);
        idx = std::min(idx, sorted.size() - 1);
        return sorted[idx];
    }

    size_t capacity_;
    uint64_t seen_ = 0;
    std::vector<uint64_t> samples_;
    std::mt19937_64 rng_;
};

// Combined stream statistics used for latency/size measurements.
struct DurationStats {
    RunningStats running;
    SampleReservoir reservoir;

    explicit DurationStats(size_t reservoir_capacity = 65536)
        : reservoir(reservoir_capacity) {}

    void add(uint64_t v) {
        running.add(v);
        reservoir.add(v);
    }

    void absorb(const DurationStats& other) {
        if (other.running.count == 0) {
            return;
        }
        running.count += other.running.count;
        running.sum += other.running.sum;
        running.min = std::min(running.min, other.running.min);
        running.max = std::max(running.max, other.running.max);
        reservoir.absorb(other.reservoir);
    }
};

}  // namespace flowforge
