#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

// IPv4 or IPv6 address. IPv4 occupies bytes[0..3], the rest zero.
struct IpAddr {
    bool v6 = false;
    std::array<uint8_t, 16> bytes{};

    static IpAddr from_v4(const uint8_t* p);
    static IpAddr from_v6(const uint8_t* p);
    static std::optional<IpAddr> try_parse(std::string_view text);
    // Throws std::invalid_argument naming the offending text.
    static IpAddr parse(std::string_view text);

    std::string to_string() const;

    auto operator<=>(const IpAddr&) const = default;
};

// CIDR prefix in canonical form (host bits zeroed at parse time).
struct CidrPrefix {
    IpAddr base;
    uint8_t length = 0;

    static std::optional<CidrPrefix> try_parse(std::string_view text);
    // Throws std::invalid_argument naming the offending text.
    static CidrPrefix parse(std::string_view text);

    bool contains(const IpAddr& addr) const;
    std::string to_string() const;

    auto operator<=>(const CidrPrefix&) const = default;
};

bool matches_any(const IpAddr& addr, const std::vector<CidrPrefix>& prefixes);

struct IpAddrHash {
    size_t operator()(const IpAddr& a) const {
        // FNV-1a over the 16 address bytes plus the family flag.
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint8_t b) {
            h ^= b;
            h *= 1099511628211ull;
        };
        mix(a.v6 ? 6 : 4);
        for (uint8_t b : a.bytes) {
            mix(b);
        }
        return static_cast<size_t>(h);
    }
};

}  // namespace flowforge
