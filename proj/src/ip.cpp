#include "flowforge/ip.hpp"

#include <arpa/inet.h>

#include <cstring>
#include <stdexcept>

namespace flowforge {

IpAddr IpAddr::from_v4(const uint8_t* p) {
    IpAddr a;
    a.v6 = false;
    std::memcpy(a.bytes.data(), p, 4);
    return a;
}

IpAddr IpAddr::from_v6(const uint8_t* p) {
    IpAddr a;
    a.v6 = true;
    std::memcpy(a.bytes.data(), p, 16);
    return a;
}

std::optional<IpAddr> IpAddr::try_parse(std::string_view text) {
    std::string buf(text);
    IpAddr a;
    if (buf.find(':') != std::string::npos) {
        a.v6 = true;
        if (inet_pton(AF_INET6, buf.c_str(), a.bytes.data()) != 1) {
            return std::nullopt;
        }
    } else {
        a.v6 = false;
        if (inet_pton(AF_INET, buf.c_str(), a.bytes.data()) != 1) {
            return std::nullopt;
        }
    }
    return a;
}

IpAddr IpAddr::parse(std::string_view text) {
    auto a = try_parse(text);
    if (!a) {
        throw std::invalid_argument("invalid IP address \"" + std::string(text) + "\"");
    }
    return *a;
}

std::string IpAddr::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {};
    if (v6) {
        inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf));
    } else {
        inet_ntop(AF_INET, bytes.data(), buf, sizeof(buf));
    }
    return buf;
}

std::optional<CidrPrefix> CidrPrefix::try_parse(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return std::nullopt;
    }
    auto addr = IpAddr::try_parse(text.substr(0, slash));
    if (!addr) {
        return std::nullopt;
    }
    int len = -1;
    std::string_view len_text = text.substr(slash + 1);
    if (len_text.empty() || len_text.size() > 3) {
        return std::nullopt;
    }
    len = 0;
    for (char c : len_text) {
        if (c < '0' || c > '9') {
            return std::nullopt;
        }
        len = len * 10 + (c - '0');
    }
    const int max_len = addr->v6 ? 128 : 32;
    if (len > max_len) {
        return std::nullopt;
    }

    CidrPrefix p;
    p.base = *addr;
    p.length = static_cast<uint8_t>(len);
    // Canonicalize: zero host bits.
    const int addr_bits = addr->v6 ? 128 : 32;
    for (int bit = len; bit < addr_bits; ++bit) {
        p.base.bytes[bit / 8] &= static_cast<uint8_t>(~(0x80u >> (bit % 8)));
    }
    return p;
}

CidrPrefix CidrPrefix::parse(std::string_view text) {
    auto p = try_parse(text);
    if (!p) {
        throw std::invalid_argument("invalid CIDR prefix \"" + std::string(text) + "\"");
    }
    return *p;
}

bool CidrPrefix::contains(const IpAddr& addr) const {
    if (addr.v6 != base.v6) {
        return false;
    }
    int remaining = length;
    for (int i = 0; remaining > 0; ++i) {
        if (remaining >= 8) {
            if (addr.bytes[i] != base.bytes[i]) {
                return false;
            }
            remaining -= 8;
        } else {
            const uint8_t mask = static_cast<uint8_t>(0xFFu << (8 - remaining));
            return (addr.bytes[i] & mask) == (base.bytes[i] & mask);
        }
    }
    return true;
}

std::string CidrPrefix::to_string() const {
    return base.to_string() + "/" + std::to_string(length);
}

bool matches_any(const IpAddr& addr, const std::vector<CidrPrefix>& prefixes) {
    for (const auto& p : prefixes) {
        if (p.contains(addr)) {
            return true;
        }
    }
    return false;
}

}  // namespace flowforge
