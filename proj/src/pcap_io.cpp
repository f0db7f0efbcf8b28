#include "flowforge/pcap_io.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace flowforge {

namespace {

constexpr uint32_t kMagicUsec = 0xA1B2C3D4;
constexpr uint32_t kMagicUsecSwapped = 0xD4C3B2A1;
constexpr uint32_t kMagicNsec = 0xA1B23C4D;
constexpr uint32_t kMagicNsecSwapped = 0x4D3CB2A1;
constexpr uint32_t kMagicNgSection = 0x0A0D0D0A;
constexpr uint32_t kNgByteOrder = 0x1A2B3C4D;

constexpr uint32_t kLinkEthernet = 1;

uint32_t bswap32(uint32_t v) {
    return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) |
           ((v & 0x00FF0000u) >> 8) | ((v & 0xFF000000u) >> 24);
}

uint16_t bswap16(uint16_t v) {
    return static_cast<uint16_t>((v << 8) | (v >> 8));
}

uint32_t load_u32(const uint8_t* p, bool big_endian) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::little) {
        return big_endian ? bswap32(v) : v;
    } else {
        return big_endian ? v : bswap32(v);
    }
}

uint16_t load_u16(const uint8_t* p, bool big_endian) {
    uint16_t v;
    std::memcpy(&v, p, 2);
    if constexpr (std::endian::native == std::endian::little) {
        return big_endian ? bswap16(v) : v;
    } else {
        return big_endian ? v : bswap16(v);
    }
}

}  // namespace

PcapReader::PcapReader(const std::string& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) {
        throw std::runtime_error("cannot open trace file: " + path);
    }
    uint8_t head[24];
    in_.read(reinterpret_cast<char*>(head), 24);
    if (in_.gcount() < 24) {
        corrupt("file shorter than a capture header");
    }
    uint32_t magic;
    std::memcpy(&magic, head, 4);

    if (magic == kMagicNgSection) {
        is_ng_ = true;
        // head already contains the first 24 bytes of the section header block;
        // byte order magic sits at offset 8.
        uint32_t bom;
        std::memcpy(&bom, head + 8, 4);
        if (bom == kNgByteOrder) {
            ng_big_endian_ = std::endian::native == std::endian::big;
        } else if (bswap32(bom) == kNgByteOrder) {
            ng_big_endian_ = std::endian::native == std::endian::little;
        } else {
            corrupt("bad pcapng byte-order magic");
        }
        const uint32_t block_len = load_u32(head + 4, ng_big_endian_);
        if (block_len < 28 || block_len % 4 != 0) {
            corrupt("bad pcapng section header length");
        }
        // Skip the rest of the SHB (options + trailing length).
        in_.seekg(static_cast<std::streamoff>(block_len) - 24, std::ios::cur);
        if (!in_) {
            corrupt("truncated pcapng section header");
        }
        link_type_ = kLinkEthernet;  // confirmed when the first IDB arrives
        return;
    }

    switch (magic) {
        case kMagicUsec: swap_ = false; classic_nanos_ = false; break;
        case kMagicUsecSwapped: swap_ = true; classic_nanos_ = false; break;
        case kMagicNsec: swap_ = false; classic_nanos_ = true; break;
        case kMagicNsecSwapped: swap_ = true; classic_nanos_ = true; break;
        default:
            throw std::runtime_error(path_ + ": not a pcap or pcapng file (magic mismatch)");
    }
    auto fix32 = [this](const uint8_t* p) {
        uint32_t v;
        std::memcpy(&v, p, 4);
        return swap_ ? bswap32(v) : v;
    };
    link_type_ = fix32(head + 20);
    if (link_type_ != kLinkEthernet) {
        throw std::runtime_error(path_ + ": unsupported link type " + std::to_string(link_type_) +
                                 " (only Ethernet is supported)");
    }
}

bool PcapReader::next(RawRecord& out) {
    return is_ng_ ? next_ng(out) : next_classic(out);
}

bool PcapReader::next_classic(RawRecord& out) {
    uint8_t rec[16];
    in_.read(reinterpret_cast<char*>(rec), 16);
    if (in_.gcount() == 0 && in_.eof()) {
        return false;
    }
    if (in_.gcount() < 16) {
        corrupt("truncated record header");
    }
    auto fix32 = [this](const uint8_t* p) {
        uint32_t v;
        std::memcpy(&v, p, 4);
        return swap_ ? bswap32(v) : v;
    };
    const uint32_t ts_sec = fix32(rec);
    const uint32_t ts_sub = fix32(rec + 4);
    const uint32_t incl_len = fix32(rec + 8);
    const uint32_t orig_len = fix32(rec + 12);
    if (incl_len > (1u << 28)) {
        corrupt("implausible record length " + std::to_string(incl_len));
    }
    out.timestamp_ns = static_cast<uint64_t>(ts_sec) * 1000000000ULL +
                       (classic_nanos_ ? ts_sub : static_cast<uint64_t>(ts_sub) * 1000ULL);
    out.orig_len = orig_len;
    out.data.resize(incl_len);
    in_.read(reinterpret_cast<char*>(out.data.data()), incl_len);
    if (static_cast<uint32_t>(in_.gcount()) < incl_len) {
        corrupt("record body shorter than its declared length");
    }
    ++packets_read_;
    return true;
}

bool PcapReader::next_ng(RawRecord& out) {
    for (;;) {
        uint8_t head[8];
        in_.read(reinterpret_cast<char*>(head), 8);
        if (in_.gcount() == 0 && in_.eof()) {
            return false;
        }
        if (in_.gcount() < 8) {
            corrupt("truncated pcapng block header");
        }
        const uint32_t block_type = load_u32(head, ng_big_endian_);
        const uint32_t block_len = load_u32(head + 4, ng_big_endian_);
        if (block_len < 12 || block_len % 4 != 0 || block_len > (1u << 28)) {
            corrupt("bad pcapng block length " + std::to_string(block_len));
        }
        block_buf_.resize(block_len - 12);
        in_.read(reinterpret_cast<char*>(block_buf_.data()),
                 static_cast<std::streamsize>(block_buf_.size()));
        if (static_cast<size_t>(in_.gcount()) < block_buf_.size()) {
            corrupt("truncated pcapng block body");
        }
        uint8_t trail[4];
        in_.read(reinterpret_cast<char*>(trail), 4);
        if (in_.gcount() < 4 || load_u32(trail, ng_big_endian_) != block_len) {
            corrupt("pcapng trailing block length mismatch");
        }
        std::span<const uint8_t> body(block_buf_);

        switch (block_type) {
            case kMagicNgSection:
                parse_ng_section_header(body);
                continue;
            case 1:  // Interface Description Block
                parse_ng_interface(body);
                continue;
            case 6: {  // Enhanced Packet Block
                if (body.size() < 20) {
                    corrupt("short enhanced packet block");
                }
                const uint32_t iface = load_u32(body.data(), ng_big_endian_);
                const uint64_t ts = (static_cast<uint64_t>(load_u32(body.data() + 4, ng_big_endian_)) << 32) |
                                    load_u32(body.data() + 8, ng_big_endian_);
                const uint32_t cap_len = load_u32(body.data() + 12, ng_big_endian_);
                const uint32_t orig_len = load_u32(body.data() + 16, ng_big_endian_);
                if (body.size() < 20 + cap_len) {
                    corrupt("enhanced packet data exceeds block");
                }
                uint64_t ticks = 1000000;
                if (iface < ng_interfaces_.size()) {
                    ticks = ng_interfaces_[iface].ticks_per_sec;
                }
                const uint64_t sec = ts / ticks;
                const uint64_t frac = ts % ticks;
                out.timestamp_ns = sec * 1000000000ULL + frac * (1000000000ULL / ticks);
                out.orig_len = orig_len;
                out.data.assign(body.begin() + 20, body.begin() + 20 + cap_len);
                ++packets_read_;
                return true;
            }
            default:
                // Name resolution, statistics, custom blocks: skip.
                continue;
        }
    }
}

void PcapReader::parse_ng_section_header(std::span<const uint8_t> body) {
    if (body.size() < 16) {
        corrupt("short pcapng section header block");
    }
    uint32_t bom;
    std::memcpy(&bom, body.data(), 4);
    if (bom == kNgByteOrder) {
        ng_big_endian_ = std::endian::native == std::endian::big;
    } else if (bswap32(bom) == kNgByteOrder) {
        ng_big_endian_ = std::endian::native == std::endian::little;
    } else {
        corrupt("bad pcapng byte-order magic");
    }
    ng_interfaces_.clear();
}

void PcapReader::parse_ng_interface(std::span<const uint8_t> body) {
    if (body.size() < 8) {
        corrupt("short pcapng interface block");
    }
    NgInterface iface;
    iface.link_type = load_u16(body.data(), ng_big_endian_);
    if (iface.link_type != kLinkEthernet) {
        throw std::runtime_error(path_ + ": unsupported link type " +
                                 std::to_string(iface.link_type) + " (only Ethernet is supported)");
    }
    // Scan options for if_tsresol (code 9).
    size_t off = 8;
    while (off + 4 <= body.size()) {
        const uint16_t code = load_u16(body.data() + off, ng_big_endian_);
        const uint16_t len = load_u16(body.data() + off + 2, ng_big_endian_);
        off += 4;
        if (off + len > body.size()) {
            break;
        }
        if (code == 0) {
            break;  // opt_endofopt
        }
        if (code == 9 && len >= 1) {
            const uint8_t v = body[off];
            if ((v & 0x80) != 0) {
                iface.ticks_per_sec = 1ULL << (v & 0x7F);
            } else {
                iface.ticks_per_sec = 1;
                for (uint8_t i = 0; i < v; ++i) {
                    iface.ticks_per_sec *= 10;
                }
            }
            if (iface.ticks_per_sec == 0 || iface.ticks_per_sec > 1000000000ULL) {
                iface.ticks_per_sec = 1000000;
            }
        }
        off += (len + 3u) & ~3u;  // options are padded to 4 bytes
    }
    ng_interfaces_.push_back(iface);
    link_type_ = iface.link_type;
}

void PcapReader::corrupt(const std::string& what) const {
    throw std::runtime_error(path_ + ": corrupt capture (" + what + ") near offset " +
                             std::to_string(static_cast<long long>(const_cast<std::ifstream&>(in_).tellg())));
}

PcapWriter::PcapWriter(const std::string& path, uint32_t snaplen) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw std::runtime_error("cannot open output trace file: " + path);
    }
    uint8_t head[24] = {};
    const uint32_t magic = kMagicNsec;
    const uint16_t ver_major = 2;
    const uint16_t ver_minor = 4;
    const uint32_t link = kLinkEthernet;
    std::memcpy(head, &magic, 4);
    std::memcpy(head + 4, &ver_major, 2);
    std::memcpy(head + 6, &ver_minor, 2);
    std::memcpy(head + 16, &snaplen, 4);
    std::memcpy(head + 20, &link, 4);
    out_.write(reinterpret_cast<const char*>(head), 24);
}

void PcapWriter::write(uint64_t timestamp_ns, uint32_t orig_len, std::span<const uint8_t> data) {
    uint8_t rec[16];
    const uint32_t ts_sec = static_cast<uint32_t>(timestamp_ns / 1000000000ULL);
    const uint32_t ts_nsec = static_cast<uint32_t>(timestamp_ns % 1000000000ULL);
    const uint32_t incl_len = static_cast<uint32_t>(data.size());
    std::memcpy(rec, &ts_sec, 4);
    std::memcpy(rec + 4, &ts_nsec, 4);
    std::memcpy(rec + 8, &incl_len, 4);
    std::memcpy(rec + 12, &orig_len, 4);
    out_.write(reinterpret_cast<const char*>(rec), 16);
    out_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out_) {
        throw std::runtime_error("failed writing trace record");
    }
    ++packets_written_;
}

void PcapWriter::write(uint64_t timestamp_ns, std::span<const uint8_t> data) {
    write(timestamp_ns, static_cast<uint32_t>(data.size()), data);
}

}  // namespace flowforge
