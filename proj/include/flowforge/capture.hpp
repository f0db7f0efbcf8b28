#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>

#include "flowforge/pcap_io.hpp"

namespace flowforge {

// Where packets come from. poll() must return within roughly timeout_ms even
// when no traffic arrives, so the caller can notice shutdown requests.
class CaptureSource {
public:
    enum class Poll { packet, timeout, closed };

    virtual ~CaptureSource() = default;
    virtual Poll poll(RawRecord& out, int timeout_ms) = 0;
};

// Replays a capture file; never yields timeouts.
class PcapReplaySource : public CaptureSource {
public:
    explicit PcapReplaySource(const std::string& path) : reader_(path) {}
    Poll poll(RawRecord& out, int timeout_ms) override;

private:
    PcapReader reader_;
};

// In-process source for exercising the live pipeline in tests: one side
// pushes frames, the pipeline consumes them with live-mode semantics.
class FakeLiveSource : public CaptureSource {
public:
    void push(RawRecord record);
    void close();
    Poll poll(RawRecord& out, int timeout_ms) override;

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<RawRecord> queue_;
    bool closed_ = false;
};

// AF_PACKET capture on a named interface; frames are timestamped with the
// wall clock on receipt. Requires CAP_NET_RAW.
class AfPacketSource : public CaptureSource {
public:
    explicit AfPacketSource(const std::string& iface);
    ~AfPacketSource() override;
    AfPacketSource(const AfPacketSource&) = delete;
    AfPacketSource& operator=(const AfPacketSource&) = delete;

    Poll poll(RawRecord& out, int timeout_ms) override;

private:
    int fd_ = -1;
};

}  // namespace flowforge
