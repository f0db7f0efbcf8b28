#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowforge/packet.hpp"

namespace flowforge::test {

// ---- raw frame construction -------------------------------------------------

struct FrameSpec {
    std::string src_ip = "10.0.0.5";
    std::string dst_ip = "93.184.216.34";
    uint16_t src_port = 40000;
    uint16_t dst_port = 443;
    bool tcp = true;
    uint32_t seq = 0;
    uint32_t ack_no = 0;
    uint8_t flags = 0;          // raw TCP flag byte (FIN=1, SYN=2, RST=4, PSH=8, ACK=16, URG=32)
    uint16_t window = 65535;
    std::vector<uint8_t> payload;
    int vlan_tags = 0;          // stacked 802.1Q tags to insert
    size_t pad_to = 0;          // minimum frame size; zero-padded at the end
};

// Assembles a complete Ethernet/IP/transport frame. IP version follows the
// address strings; IPv4 header checksums are computed properly so fixtures
// survive independent dissection.
std::vector<uint8_t> build_frame(const FrameSpec& spec);

// ---- direct DecodedPacket fixtures (bypassing the wire format) -------------

struct SynthSpec {
    Direction dir = Direction::out;
    bool tcp = true;
    uint64_t ts_ns = 0;
    uint32_t data_len = 0;
    uint32_t header_len = 40;
    uint32_t wire_len = 0;      // 0 means 14 + header_len + data_len
    uint32_t seq = 0;
    uint32_t ack_no = 0;
    bool syn = false, ack = false, fin = false, rst = false, psh = false, urg = false;
    uint16_t window = 65535;
    uint8_t header_fill = 0xAA;
    uint8_t payload_fill = 0x55;
};

// Owns the byte storage the packet's spans point into; keep it alive as long
// as the DecodedPacket is used.
struct SynthPacket {
    std::vector<uint8_t> header;
    std::vector<uint8_t> payload;
    DecodedPacket pkt;
};

SynthPacket synth_packet(const SynthSpec& spec);

// ---- DNS response fixtures --------------------------------------------------

constexpr uint16_t kDnsTypeA = 1;
constexpr uint16_t kDnsTypeCname = 5;
constexpr uint16_t kDnsTypeAaaa = 28;

struct DnsAnswerFix {
    std::string owner;
    uint16_t type = kDnsTypeA;
    uint32_t ttl = 300;
    // For A/AAAA: address text; for CNAME: target name.
    std::string value;
};

// Builds a DNS response payload for one question plus the given answers.
// When compress is set, answer owners equal to the query name are emitted as
// a compression pointer to the question section.
std::vector<uint8_t> build_dns_response(const std::string& query,
                                        const std::vector<DnsAnswerFix>& answers,
                                        bool compress = false);

// ---- misc -------------------------------------------------------------------

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);

}  // namespace flowforge::test
