#include <doctest.h>

#include "flowforge/ip.hpp"

using namespace flowforge;

TEST_CASE("ipv4 parse and format round trip") {
    const IpAddr a = IpAddr::parse("10.0.0.5");
    CHECK_FALSE(a.v6);
    CHECK(a.to_string() == "10.0.0.5");

    const IpAddr b = IpAddr::parse("255.255.255.255");
    CHECK(b.to_string() == "255.255.255.255");
}

TEST_CASE("ipv6 parse and format round trip") {
    const IpAddr a = IpAddr::parse("2620:10c:7000::1");
    CHECK(a.v6);
    CHECK(a.to_string() == "2620:10c:7000::1");
}

TEST_CASE("invalid addresses throw") {
    CHECK_THROWS(IpAddr::parse("10.0.0"));
    CHECK_THROWS(IpAddr::parse("not-an-ip"));
    CHECK_THROWS(IpAddr::parse(""));
    CHECK_THROWS(IpAddr::parse("1.2.3.4.5"));
}

TEST_CASE("cidr parsing canonicalizes host bits") {
    const CidrPrefix p = CidrPrefix::parse("10.1.2.3/8");
    CHECK(p.to_string() == "10.0.0.0/8");

    const CidrPrefix q = CidrPrefix::parse("23.246.55.9/18");
    CHECK(q.to_string() == "23.246.0.0/18");

    const CidrPrefix r = CidrPrefix::parse("2620:10c:7000::/44");
    CHECK(r.to_string() == "2620:10c:7000::/44");
}

TEST_CASE("cidr containment") {
    const CidrPrefix p = CidrPrefix::parse("23.246.0.0/18");
    CHECK(p.contains(IpAddr::parse("23.246.0.9")));
    CHECK(p.contains(IpAddr::parse("23.246.63.255")));
    CHECK_FALSE(p.contains(IpAddr::parse("23.246.64.0")));
    CHECK_FALSE(p.contains(IpAddr::parse("23.247.0.1")));

    const CidrPrefix v6 = CidrPrefix::parse("2a00:86c0::/32");
    CHECK(v6.contains(IpAddr::parse("2a00:86c0:dead::beef")));
    CHECK_FALSE(v6.contains(IpAddr::parse("2a00:86c1::1")));

    // Family mismatch never matches.
    CHECK_FALSE(p.contains(IpAddr::parse("::1")));
    CHECK_FALSE(v6.contains(IpAddr::parse("23.246.0.9")));
}

TEST_CASE("cidr edge prefix lengths") {
    const CidrPrefix all = CidrPrefix::parse("0.0.0.0/0");
    CHECK(all.contains(IpAddr::parse("8.8.8.8")));

    const CidrPrefix host = CidrPrefix::parse("192.0.2.7/32");
    CHECK(host.contains(IpAddr::parse("192.0.2.7")));
    CHECK_FALSE(host.contains(IpAddr::parse("192.0.2.8")));

    CHECK_THROWS(CidrPrefix::parse("10.0.0.0/33"));
    CHECK_THROWS(CidrPrefix::parse("::/129"));
    CHECK_THROWS(CidrPrefix::parse("10.0.0.0"));
    CHECK_THROWS(CidrPrefix::parse("10.0.0.0/"));
    CHECK_THROWS(CidrPrefix::parse("10.0.0.0/x"));
}

TEST_CASE("matches_any over a mixed prefix list") {
    std::vector<CidrPrefix> prefixes = {
        CidrPrefix::parse("10.0.0.0/8"),
        CidrPrefix::parse("192.168.0.0/16"),
        CidrPrefix::parse("fd00::/8"),
    };
    CHECK(matches_any(IpAddr::parse("10.9.8.7"), prefixes));
    CHECK(matches_any(IpAddr::parse("fd00::42"), prefixes));
    CHECK_FALSE(matches_any(IpAddr::parse("172.16.0.1"), prefixes));
}
