#pragma once

#include <vector>

#include "flowforge/features/feature.hpp"

namespace flowforge {

// Which byte spans of each packet feed a copy-style feature.
enum class CopyLayers : uint8_t { headers, payload, both };

const char* copy_layers_name(CopyLayers layers);
bool parse_copy_layers(const std::string& text, CopyLayers* out);

// Progressive byte acquisition shared by BytesCopy and PngCopy: fills a
// fixed-size buffer from the selected spans of each packet in capture order
// ("both" means headers then payload per packet) and becomes a no-op once
// full. The buffer is allocated up front so state cost is visible from the
// first packet.
class ByteAcquisition {
public:
    ByteAcquisition(size_t target, CopyLayers layers);

    // Returns true when this packet completed the buffer.
    bool absorb(const DecodedPacket& pkt);

    bool complete() const { return buffer_.size() == target_; }
    size_t filled() const { return buffer_.size(); }
    size_t target() const { return target_; }
    CopyLayers layers() const { return layers_; }
    const std::vector<uint8_t>& buffer() const { return buffer_; }

    // Zero-pads up to the target; used at final collection for short flows.
    void pad_to_target();
    size_t capacity_bytes() const { return buffer_.capacity(); }

private:
    void append(std::span<const uint8_t> bytes);

    size_t target_;
    CopyLayers layers_;
    std::vector<uint8_t> buffer_;
};

// Raw-bytes flow representation: the first `size` bytes of the selected
// layers, emitted once as base64 when the buffer completes (or zero-padded
// with truncated=true at the flow's final collection).
class BytesCopyState final : public FeatureState {
public:
    BytesCopyState(size_t target, CopyLayers layers);

    void add_packet(const DecodedPacket& pkt) override;
    std::optional<nlohmann::json> collect(double slot_size_s, CollectMode mode) override;
    size_t approximate_size() const override;

    const ByteAcquisition& acquisition() const { return acq_; }

private:
    ByteAcquisition acq_;
    bool emitted_ = false;
};

}  // namespace flowforge
