#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowforge/packet.hpp"

namespace flowforge {

// Why collect is being invoked: at a regular emit boundary, or as the last
// collection a flow will ever see (idle eviction or end of trace).
enum class CollectMode {
    interval,
    final_flush,
};

// Per-flow, per-feature-class mutable state. One instance per (flow, class);
// the owning partition worker is the only caller of add_packet, so
// implementations need no internal locking.
class FeatureState {
public:
    virtual ~FeatureState() = default;

    // Called for every packet of the owning flow, in capture-timestamp order.
    virtual void add_packet(const DecodedPacket& pkt) = 0;

    // Aggregates the interval and returns this class's output value, or
    // nullopt when there is nothing to report this cycle (e.g. an image that
    // was already emitted). slot_size_s is the interval length in seconds.
    // Interval-scoped accumulators reset; cumulative trackers persist.
    virtual std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) = 0;

    // Current in-use bytes of this state, including owned buffer capacity.
    // Consumed by the cost profiler's state axis.
    virtual size_t approximate_size() const = 0;
};

// Parses a configured feature-class name such as "PacketCounters" or
// "PngCopy(28,28,headers)" and returns a fresh state instance. Throws
// std::invalid_argument naming the offender and listing registered classes
// when the name or its parameters are invalid. Names are case-sensitive.
std::unique_ptr<FeatureState> make_feature_state(const std::string& spec);

// Validates a feature-class name without instantiating per-flow state.
// Returns an explanatory message via `error` on failure.
bool validate_feature_spec(const std::string& spec, std::string* error);

// Base names accepted by the registry, in registration order.
const std::vector<std::string>& registered_feature_names();

}  // namespace flowforge
