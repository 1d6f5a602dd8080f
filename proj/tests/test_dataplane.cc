#include <random>
#include <set>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace mnsim::dp {
namespace {

FibEntry entry(Prefix p, RouteSource src, std::string ifc = "eth0") {
  return FibEntry{p, src, admin_distance(src), 0, {{std::move(ifc), Ipv4()}}, std::nullopt};
}

TEST(Fib, LongestMatchAgreesWithLinearScan) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Fib fib;
    std::vector<Prefix> prefixes;
    for (int i = 0; i < 200; ++i) {
      // Few distinct high bytes so prefixes nest.
      Prefix p(Ipv4((rng() % 4) << 30 | (rng() & 0x3fffffff)), static_cast<uint8_t>(rng() % 33));
      if (fib.install(entry(p, RouteSource::Static))) prefixes.push_back(p);
    }
    for (int i = 0; i < 500; ++i) {
      Ipv4 a((rng() % 4) << 30 | (rng() & 0x3fffffff));
      std::optional<Prefix> want;
      for (const auto& p : prefixes)
        if (p.contains(a) && (!want || p.length() > want->length())) want = p;
      const auto* got = fib.longest_match(a);
      ASSERT_EQ(got != nullptr, want.has_value());
      if (got) EXPECT_EQ(got->prefix, *want);
    }
  }
}

TEST(Fib, LowerAdministrativeDistanceWins) {
  Fib fib;
  auto p = Prefix::from_string("9.0.0.0/8");
  EXPECT_TRUE(fib.install(entry(p, RouteSource::Ibgp, "a")));
  EXPECT_TRUE(fib.install(entry(p, RouteSource::Ospf, "b")));
  EXPECT_TRUE(fib.install(entry(p, RouteSource::Ebgp, "c")));
  EXPECT_FALSE(fib.install(entry(p, RouteSource::Ibgp, "d")));
  EXPECT_FALSE(fib.install(entry(p, RouteSource::Ebgp, "e")));  // equal keeps the first
  EXPECT_TRUE(fib.install(entry(p, RouteSource::Static, "f")));
  EXPECT_TRUE(fib.install(entry(p, RouteSource::Connected, "g")));
  EXPECT_EQ(fib.find(p)->next_hops[0].interface, "g");
  fib.remove(p);
  EXPECT_EQ(fib.size(), 0u);
}

TEST(Fib, FlowSelectsNextHop) {
  Fib fib;
  auto e = entry(Prefix::from_string("9.0.0.0/8"), RouteSource::Ospf);
  e.next_hops = {{"a", Ipv4(1, 0, 0, 1)}, {"b", Ipv4(1, 0, 0, 2)}, {"c", Ipv4(1, 0, 0, 3)}};
  fib.install(e);
  for (uint64_t f = 0; f < 9; ++f) EXPECT_EQ(fib.lookup(Ipv4(9, 1, 1, 1), f)->interface, e.next_hops[f % 3].interface);
  EXPECT_FALSE(fib.lookup(Ipv4(8, 1, 1, 1), 0));
}

Ipv4 address_of(const Network& net, DeviceId id, const std::string& ifc) {
  return net.device(id).config.interfaces.at(ifc).address->address;
}

class Reference : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { net_ = new Network(testing::reference_network(1, 6)); }
  static void TearDownTestSuite() { delete net_; }
  static DeviceId host(uint32_t asn, const char* router = "ROUTER1") { return net_->id(asn, host_name(router)); }
  static Network* net_;
};
Network* Reference::net_ = nullptr;

TEST_F(Reference, HostToHostTracesAreLoopFreeAndDelayMonotone) {
  auto asns = net_->asns();
  for (auto a : asns)
    for (auto b : asns) {
      auto src = host(a);
      auto dst = address_of(*net_, host(b), "eth0");
      auto t = trace(*net_, src, dst);
      ASSERT_EQ(t.outcome, Outcome::Delivered) << a << " -> " << b << "\n" << render_trace(*net_, t);
      EXPECT_EQ(t.hops.front().device, src);
      EXPECT_EQ(t.hops.back().device, host(b));
      std::set<DeviceId> seen;
      for (size_t i = 0; i < t.hops.size(); ++i) {
        EXPECT_TRUE(seen.insert(t.hops[i].device).second);
        if (i) EXPECT_GE(t.hops[i].delay_us, t.hops[i - 1].delay_us);
      }
      EXPECT_EQ(t.delay_us, t.hops.back().delay_us);
    }
}

TEST_F(Reference, PingRttIsBothDirections) {
  auto a = net_->asns().front(), b = net_->asns().back();
  auto r = ping(*net_, host(a), address_of(*net_, host(b), "eth0"));
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.rtt_us, r.forward.delay_us + r.reverse.delay_us);
  EXPECT_GT(r.rtt_us, 0u);
  EXPECT_EQ(r.reverse.hops.back().device, host(a));
}

TEST_F(Reference, PingUnknownAddress) {
  auto r = ping(*net_, host(net_->asns().front()), Ipv4(200, 1, 1, 1));
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.reason, PingFailure::NoSuchDestination);
}

TEST_F(Reference, TraceRendersOneLinePerHop) {
  auto a = net_->asns().front(), b = net_->asns().back();
  auto t = trace(*net_, host(a), address_of(*net_, host(b), "eth0"));
  auto text = render_trace(*net_, t);
  EXPECT_EQ(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')), t.hops.size() + 2);
  EXPECT_NE(text.find("result: Delivered"), std::string::npos);
}

TEST_F(Reference, LocalPrefixIsDiscardedNotLooped) {
  // An address inside the AS block that nothing owns.
  auto a = net_->asns().front(), b = net_->asns().back();
  auto block = net_->plan().ases.at(b).as_prefix;
  Ipv4 unused(block.network().value() | 0x00fefefe);
  auto t = trace(*net_, host(a), unused);
  EXPECT_EQ(t.outcome, Outcome::NoRoute);
  EXPECT_EQ(net_->device(t.hops.back().device).asn, b);
}

TEST(Failure, DownLinkIsReportedOnStaleForwarding) {
  auto net = testing::reference_network(1, 6);
  auto a = net.asns().front(), b = net.asns().back();
  auto src = net.id(a, host_name("ROUTER1"));
  auto dst = address_of(net, net.id(b, host_name("ROUTER1")), "eth0");
  auto before = trace(net, src, dst);
  ASSERT_EQ(before.outcome, Outcome::Delivered);
  // First inter-AS segment on the path.
  std::optional<size_t> cut;
  for (const auto& h : before.hops) {
    if (h.egress.empty()) continue;
    auto seg = net.segment_at(h.device, physical_port(h.egress));
    if (seg && net.segments()[*seg].kind == SegmentKind::InterAs) {
      cut = seg;
      break;
    }
  }
  ASSERT_TRUE(cut);
  net.set_segment_up(*cut, false);
  auto d = net.derived();
  auto stale = walk({net, d->l2, d->fibs}, src, dst);
  EXPECT_EQ(stale.outcome, Outcome::LinkDown);
  EXPECT_EQ(stale.failed_segment, cut);
  EXPECT_THROW(trace(net, src, dst), std::logic_error);
  converge_all(net);
  EXPECT_EQ(trace(net, src, dst).outcome, Outcome::Delivered);
}

TEST(Failure, FailedRouterStopsTrace) {
  auto net = testing::reference_network(1, 6);
  auto a = net.asns().front();
  auto src = net.id(a, host_name("ROUTER1"));
  auto r1 = net.id(a, "ROUTER1");
  net.set_device_failed(r1, true);
  auto d = net.derived();
  auto t = walk({net, d->l2, d->fibs}, src, Ipv4(200, 0, 0, 1));
  // The host's LAN counts as down once its router is gone.
  EXPECT_EQ(t.outcome, Outcome::LinkDown);
  EXPECT_EQ(t.hops.back().device, src);
  EXPECT_TRUE(t.failed_segment);
}

class SquareAs : public ::testing::Test {
 protected:
  void SetUp() override {
    auto text = testing::single_as_topology({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "D"}, {"A", "C"}, {"C", "D"}});
    net_ = std::make_unique<Network>(topo::parse_topology_spec(text));
    apply_reference_config(*net_, 1, ConfigPhase::Intra);
    converge_all(*net_);
  }
  std::unique_ptr<Network> net_;
};

TEST_F(SquareAs, FlowsSpreadOverBothPaths) {
  auto src = net_->id(1, host_name("A"));
  auto dst = net_->plan().ases.at(1).loopbacks.at("D");
  std::set<std::string> second_hops;
  for (uint64_t f = 0; f < 16; ++f) {
    auto t = trace(*net_, src, dst, f);
    ASSERT_EQ(t.outcome, Outcome::Delivered);
    ASSERT_GE(t.hops.size(), 3u);
    second_hops.insert(net_->device(t.hops[2].device).name);
  }
  EXPECT_EQ(second_hops, (std::set<std::string>{"B", "C"}));
}

TEST_F(SquareAs, StaticRoutesInACircleLoop) {
  auto a = net_->id(1, "A"), b = net_->id(1, "B");
  auto ab = address_of(*net_, b, intra_port("A"));
  auto ba = address_of(*net_, a, intra_port("B"));
  ASSERT_TRUE(conf::load_config_script(*net_, 1, "A", fmt::format("ip route 77.0.0.0/8 via {}\n", ab.str()), true)
                  .diagnostics.empty());
  ASSERT_TRUE(conf::load_config_script(*net_, 1, "B", fmt::format("ip route 77.0.0.0/8 via {}\n", ba.str()), true)
                  .diagnostics.empty());
  converge_all(*net_);
  auto t = trace(*net_, a, Ipv4(77, 0, 0, 1));
  EXPECT_EQ(t.outcome, Outcome::Loop);
  EXPECT_EQ(trace(*net_, a, Ipv4(78, 0, 0, 1)).outcome, Outcome::NoRoute);
}

TEST_F(SquareAs, StaticBeatsOspf) {
  auto a = net_->id(1, "A"), c = net_->id(1, "C");
  auto dst = net_->plan().ases.at(1).loopbacks.at("D");
  auto via_c = address_of(*net_, c, intra_port("A"));
  ASSERT_TRUE(
      conf::load_config_script(*net_, 1, "A", fmt::format("ip route {}/32 via {}\n", dst.str(), via_c.str()), true)
          .diagnostics.empty());
  converge_all(*net_);
  const auto* e = derived(*net_).fibs[a].longest_match(dst);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->source, RouteSource::Static);
  for (uint64_t f = 0; f < 4; ++f) EXPECT_EQ(net_->device(trace(*net_, a, dst, f).hops[1].device).name, "C");
}

}  // namespace
}  // namespace mnsim::dp
