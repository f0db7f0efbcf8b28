#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace flowforge {

// One captured frame as stored in the trace file.
struct RawRecord {
    uint64_t timestamp_ns = 0;
    uint32_t orig_len = 0;       // length on the wire
    std::vector<uint8_t> data;   // captured bytes (may be shorter than orig_len)
};

// Streaming reader for classic pcap (usec and nsec magics, either byte order)
// and pcapng (section header + interface description + enhanced packet blocks).
// Only Ethernet link type is accepted. Corrupt framing raises std::runtime_error.
class PcapReader {
public:
    explicit PcapReader(const std::string& path);

    // Fills `out` with the next packet. Returns false on clean end of file.
    bool next(RawRecord& out);

    uint32_t link_type() const { return link_type_; }
    uint64_t packets_read() const { return packets_read_; }
    const std::string& path() const { return path_; }

private:
    bool next_classic(RawRecord& out);
    bool next_ng(RawRecord& out);
    void parse_ng_section_header(std::span<const uint8_t> body);
    void parse_ng_interface(std::span<const uint8_t> body);

    [[noreturn]] void corrupt(const std::string& what) const;

    std::ifstream in_;
    std::string path_;
    bool is_ng_ = false;
    bool swap_ = false;             // classic pcap: header byte order differs from host
    bool ng_big_endian_ = false;    // pcapng: current section byte order
    uint64_t ts_divisor_ = 1000;    // classic: usec -> ns multiplier handled via this
    bool classic_nanos_ = false;
    uint32_t link_type_ = 0;
    uint64_t packets_read_ = 0;

    struct NgInterface {
        uint32_t link_type = 1;
        // Ticks per second for this interface's timestamps (default 10^6).
        uint64_t ticks_per_sec = 1000000;
    };
    std::vector<NgInterface> ng_interfaces_;
    std::vector<uint8_t> block_buf_;
};

// Classic pcap writer, used by tools and test fixtures. Writes the nanosecond
// magic so fixture timestamps survive the round trip exactly.
class PcapWriter {
public:
    explicit PcapWriter(const std::string& path, uint32_t snaplen = 262144);
    void write(uint64_t timestamp_ns, uint32_t orig_len, std::span<const uint8_t> data);
    void write(uint64_t timestamp_ns, std::span<const uint8_t> data);
    uint64_t packets_written() const { return packets_written_; }
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    uint64_t packets_written_ = 0;
};

}  // namespace flowforge
