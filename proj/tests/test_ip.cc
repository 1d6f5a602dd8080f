#include <random>

#include <gtest/gtest.h>

#include "mnsim/ip.hpp"
#include "mnsim/text.hpp"

namespace mnsim {
namespace {

TEST(Ipv4, ParsesDottedQuad) {
  auto a = Ipv4::parse("10.1.200.3");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->value(), (10u << 24) | (1u << 16) | (200u << 8) | 3u);
  EXPECT_EQ(a->str(), "10.1.200.3");
}

TEST(Ipv4, RejectsMalformed) {
  for (const char* s : {"", "1.2.3", "1.2.3.4.5", "256.0.0.1", "1..2.3", "a.b.c.d", "1.2.3.-4", "0001.2.3.4"})
    EXPECT_FALSE(Ipv4::parse(s)) << s;
  EXPECT_THROW(Ipv4::from_string("1.2.3"), std::invalid_argument);
}

TEST(Ipv4, RoundTripsRandomAddresses) {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Ipv4 a(rng());
    EXPECT_EQ(Ipv4::parse(a.str()), a);
  }
}

TEST(Prefix, NormalizesAndRejectsHostBits) {
  EXPECT_EQ(Prefix(Ipv4(10, 1, 2, 3), 8).str(), "10.0.0.0/8");
  EXPECT_FALSE(Prefix::parse("10.1.0.0/8"));
  EXPECT_FALSE(Prefix::parse("10.0.0.0/33"));
  EXPECT_FALSE(Prefix::parse("10.0.0.0"));
  EXPECT_TRUE(Prefix::parse("0.0.0.0/0"));
}

TEST(Prefix, ContainmentMatchesMaskArithmetic) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    auto len = static_cast<uint8_t>(rng() % 33);
    Prefix p(Ipv4(rng()), len);
    Ipv4 a(rng() % 2 ? rng() : p.network().value() | (rng() & ~netmask(len)));
    bool expected = len == 0 || (a.value() >> (32 - len)) == (p.network().value() >> (32 - len));
    EXPECT_EQ(p.contains(a), expected) << p.str() << " " << a.str();
    EXPECT_EQ(Prefix::parse(p.str()), p);
  }
}

TEST(Prefix, SplitGivesTwoDisjointHalves) {
  auto p = Prefix::from_string("3.0.0.0/8");
  auto [lo, hi] = p.split();
  EXPECT_EQ(lo.str(), "3.0.0.0/9");
  EXPECT_EQ(hi.str(), "3.128.0.0/9");
  EXPECT_FALSE(lo.overlaps(hi));
  EXPECT_TRUE(p.contains(lo) && p.contains(hi));
  EXPECT_EQ(lo.size() + hi.size(), p.size());
  EXPECT_THROW(Prefix::from_string("1.2.3.4/32").split(), std::invalid_argument);
}

TEST(InterfaceAddress, KeepsHostBits) {
  auto a = InterfaceAddress::parse("3.0.1.2/30");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->str(), "3.0.1.2/30");
  EXPECT_EQ(a->subnet().str(), "3.0.1.0/30");
}

TEST(Community, ParsesAsnColonTag) {
  auto c = Community::parse("65001:20");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->str(), "65001:20");
  EXPECT_FALSE(Community::parse("70000:1"));
  EXPECT_FALSE(Community::parse("1:2:3"));
}

TEST(Text, SplitsAndTrims) {
  EXPECT_EQ(text::trim("  a b \t"), "a b");
  auto t = text::tokens("  router   bgp 3 ");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1], "bgp");
  auto s = text::split("a,,b", ',');
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1], "");
  EXPECT_EQ(text::to_number<uint32_t>("42"), 42u);
  EXPECT_FALSE(text::to_number<uint32_t>("42x"));
  EXPECT_FALSE(text::to_number<uint8_t>("300"));
}

}  // namespace
}  // namespace mnsim
