#include <doctest.h>

#include <algorithm>

#include "flowforge/dns.hpp"
#include "support/testutil.hpp"

using namespace flowforge;
using namespace flowforge::test;

namespace {

bool has_name(const DnsAddress& a, const std::string& name) {
    return std::find(a.names.begin(), a.names.end(), name) != a.names.end();
}

}  // namespace

TEST_CASE("simple A response") {
    const auto msg = build_dns_response("foo.nflxvideo.net",
                                        {{"foo.nflxvideo.net", kDnsTypeA, 300, "23.246.10.1"}});
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    CHECK(resp->query_name == "foo.nflxvideo.net");
    REQUIRE(resp->addresses.size() == 1);
    CHECK(resp->addresses[0].addr.to_string() == "23.246.10.1");
    CHECK(resp->addresses[0].ttl == 300);
    CHECK(has_name(resp->addresses[0], "foo.nflxvideo.net"));
    CHECK_FALSE(resp->partial);
}

TEST_CASE("queries are rejected, responses accepted") {
    auto msg = build_dns_response("x.test", {});
    // Clear the QR bit.
    msg[2] = 0x01;
    CHECK_FALSE(parse_dns_response(msg));
}

TEST_CASE("cname chain carries all names to the address") {
    const auto msg = build_dns_response(
        "www.svc.test",
        {
            {"www.svc.test", kDnsTypeCname, 60, "edge.cdn.test"},
            {"edge.cdn.test", kDnsTypeA, 120, "192.0.2.7"},
        });
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    REQUIRE(resp->addresses.size() == 1);
    const DnsAddress& a = resp->addresses[0];
    CHECK(a.addr.to_string() == "192.0.2.7");
    CHECK(a.ttl == 120);
    CHECK(has_name(a, "edge.cdn.test"));
    CHECK(has_name(a, "www.svc.test"));
}

TEST_CASE("two-hop cname chain resolves transitively") {
    const auto msg = build_dns_response(
        "a.example",
        {
            {"a.example", kDnsTypeCname, 60, "b.example"},
            {"b.example", kDnsTypeCname, 60, "c.example"},
            {"c.example", kDnsTypeA, 60, "198.51.100.4"},
        });
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    REQUIRE(resp->addresses.size() == 1);
    CHECK(has_name(resp->addresses[0], "a.example"));
    CHECK(has_name(resp->addresses[0], "b.example"));
    CHECK(has_name(resp->addresses[0], "c.example"));
}

TEST_CASE("compression pointers resolve") {
    const auto msg = build_dns_response(
        "video.example.net",
        {
            {"video.example.net", kDnsTypeA, 60, "203.0.113.9"},
            {"video.example.net", kDnsTypeA, 60, "203.0.113.10"},
        },
        /*compress=*/true);
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    REQUIRE(resp->addresses.size() == 2);
    CHECK(has_name(resp->addresses[0], "video.example.net"));
    CHECK(has_name(resp->addresses[1], "video.example.net"));
}

TEST_CASE("aaaa records parse") {
    const auto msg = build_dns_response(
        "six.example", {{"six.example", kDnsTypeAaaa, 900, "2620:10c:7000::42"}});
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    REQUIRE(resp->addresses.size() == 1);
    CHECK(resp->addresses[0].addr.v6);
    CHECK(resp->addresses[0].addr.to_string() == "2620:10c:7000::42");
}

TEST_CASE("names are lowercased") {
    const auto msg =
        build_dns_response("FoO.NflxVideo.NET", {{"FoO.NflxVideo.NET", kDnsTypeA, 30, "1.2.3.4"}});
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    CHECK(resp->query_name == "foo.nflxvideo.net");
    CHECK(has_name(resp->addresses[0], "foo.nflxvideo.net"));
}

TEST_CASE("truncated answers yield partial ingest of parseable records") {
    auto msg = build_dns_response(
        "cut.example",
        {
            {"cut.example", kDnsTypeA, 60, "192.0.2.1"},
            {"cut.example", kDnsTypeA, 60, "192.0.2.2"},
        });
    // Drop the tail of the second answer's rdata.
    msg.resize(msg.size() - 3);
    const auto resp = parse_dns_response(msg);
    REQUIRE(resp);
    CHECK(resp->partial);
    REQUIRE(resp->addresses.size() == 1);
    CHECK(resp->addresses[0].addr.to_string() == "192.0.2.1");
}

TEST_CASE("malformed payloads never crash") {
    CHECK_FALSE(parse_dns_response(std::vector<uint8_t>{}));
    CHECK_FALSE(parse_dns_response(std::vector<uint8_t>{1, 2, 3}));

    // Pointer loop: name at offset 12 points to itself.
    std::vector<uint8_t> loop = {0, 1, 0x81, 0x80, 0, 1, 0, 0, 0, 0, 0, 0, 0xC0, 0x0C, 0, 1, 0, 1};
    const auto resp = parse_dns_response(loop);
    if (resp) {
        CHECK(resp->partial);
    }

    // Random fuzz.
    uint32_t x = 0x12345678;
    for (int i = 0; i < 2000; ++i) {
        std::vector<uint8_t> junk(i % 120);
        for (auto& b : junk) {
            x = x * 1664525 + 1013904223;
            b = static_cast<uint8_t>(x >> 24);
        }
        (void)parse_dns_response(junk);
    }
}
