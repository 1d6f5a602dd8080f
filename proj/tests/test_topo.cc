#include <map>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace mnsim::topo {
namespace {

struct Degrees {
  int customers = 0, providers = 0, peers = 0, ixps = 0;
};

// Counted straight from the link list.
std::map<uint32_t, Degrees> degrees(const TopologySpec& spec) {
  std::map<uint32_t, Degrees> d;
  for (const auto& l : spec.links) {
    switch (l.rel) {
      case Relationship::AProviderOfB:
        d[l.a.asn].customers++;
        d[l.b.asn].providers++;
        break;
      case Relationship::BProviderOfA:
        d[l.b.asn].customers++;
        d[l.a.asn].providers++;
        break;
      case Relationship::Peer:
        d[l.a.asn].peers++;
        d[l.b.asn].peers++;
        break;
    }
  }
  for (const auto& x : spec.ixps)
    for (const auto& m : x.members) d[m.asn].ixps++;
  return d;
}

class Generated : public ::testing::TestWithParam<std::pair<unsigned, unsigned>> {};

TEST_P(Generated, ValidatesCleanly) {
  auto [r, k] = GetParam();
  auto spec = generate_reference_topology(r, k);
  EXPECT_EQ(spec.ases.size(), r * k);
  auto v = validate(spec);
  EXPECT_TRUE(v.empty()) << (v.empty() ? "" : v.front().str());
}

TEST_P(Generated, TransitDegreesAreExact) {
  auto [r, k] = GetParam();
  auto spec = generate_reference_topology(r, k);
  auto d = degrees(spec);
  for (const auto& as : spec.ases) {
    if (as.role != Role::Transit) continue;
    const auto& x = d[as.asn];
    EXPECT_EQ(x.customers, 2) << "AS " << as.asn;
    EXPECT_EQ(x.providers, 2) << "AS " << as.asn;
    EXPECT_EQ(x.peers, 1) << "AS " << as.asn;
    EXPECT_EQ(x.ixps, 1) << "AS " << as.asn;
  }
}

TEST_P(Generated, RenderParseIsIdentity) {
  auto [r, k] = GetParam();
  auto spec = generate_reference_topology(r, k);
  auto text = render_topology_spec(spec);
  auto back = parse_topology_spec(text);
  EXPECT_EQ(back, spec);
  EXPECT_EQ(render_topology_spec(back), text);
}

TEST_P(Generated, AddressPlanSubnetsAreDisjoint) {
  auto [r, k] = GetParam();
  auto plan = allocate_addresses(generate_reference_topology(r, k));
  auto subnets = plan.all_subnets();
  std::sort(subnets.begin(), subnets.end());
  for (size_t i = 1; i < subnets.size(); ++i)
    EXPECT_FALSE(subnets[i - 1].overlaps(subnets[i])) << subnets[i - 1].str() << " " << subnets[i].str();
}

INSTANTIATE_TEST_SUITE_P(Sizes, Generated,
                         ::testing::Values(std::pair{1u, 4u}, std::pair{1u, 6u}, std::pair{1u, 10u},
                                           std::pair{2u, 10u}, std::pair{3u, 8u}, std::pair{6u, 10u},
                                           std::pair{12u, 10u}));

TEST(Generate, SixRegionsHaveSixtyAsesAndSevenIxps) {
  auto spec = generate_reference_topology(6, 10);
  EXPECT_EQ(spec.ases.size(), 60u);
  EXPECT_EQ(spec.ixps.size(), 7u);
}

TEST(Generate, RejectsBadShapes) {
  EXPECT_THROW(generate_reference_topology(0, 10), std::invalid_argument);
  EXPECT_THROW(generate_reference_topology(1, 3), std::invalid_argument);
  EXPECT_THROW(generate_reference_topology(1, 7), std::invalid_argument);
}

TEST(Generate, IsDeterministic) {
  EXPECT_EQ(render_topology_spec(generate_reference_topology(3, 10)),
            render_topology_spec(generate_reference_topology(3, 10)));
}

TEST(Parse, RoundTripsCustomTemplates) {
  const char* text =
      "region west\n"
      "as 1 role=transit region=west manual\n"
      "as 2 role=stub region=west\n"
      "l3template 1 routers=A,B,C links=A-B:3:500,B-C:1:2000 hosts=no\n"
      "l2template 1 switches=S1:4096,S2 links=S1-S2 hosts=S1:H1:10,S2:H2:20 gateway=S1:A\n"
      "l2template 2 none\n"
      "link 1.A 2.ROUTER1 rel=prov delay_us=10 bw_bps=100 state=down\n";
  auto spec = parse_topology_spec(text);
  ASSERT_EQ(spec.ases.size(), 2u);
  EXPECT_FALSE(spec.ases[0].l3.hosts);
  EXPECT_EQ(spec.ases[0].l3.links[0].cost, 3u);
  ASSERT_TRUE(spec.ases[0].l2);
  EXPECT_EQ(spec.ases[0].l2->switches[0].priority, 4096u);
  EXPECT_FALSE(spec.ases[1].l2);
  EXPECT_FALSE(spec.links[0].up);
  EXPECT_EQ(parse_topology_spec(render_topology_spec(spec)), spec);
}

TEST(Parse, RejectsDuplicateAsn) {
  EXPECT_THROW(parse_topology_spec("region r\nas 1 role=stub region=r\nas 1 role=stub region=r\n"), TopologyError);
}

TEST(Parse, RejectsDanglingLinkEndpoint) {
  try {
    parse_topology_spec("region r\nas 1 role=stub region=r\nas 2 role=stub region=r\nlink 1.ROUTER1 3.ROUTER1 rel=peer\n");
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_topology_spec("region r\nas 1 role=stub region=r\nas 2 role=stub region=r\nlink 1.NOPE 2.ROUTER1 rel=peer\n"),
               TopologyError);
}

TEST(Parse, RejectsDisconnectedAsGraph) {
  EXPECT_THROW(parse_topology_spec("region r\nas 1 role=stub region=r\nas 2 role=stub region=r\n"), TopologyError);
}

TEST(Parse, RejectsSyntaxErrorsWithLine) {
  try {
    parse_topology_spec("region r\nbogus 1\n");
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_topology_spec("region r\nas x role=stub region=r\n"), TopologyError);
  EXPECT_THROW(parse_topology_spec("region r\nas 1 role=boss region=r\n"), TopologyError);
}

TEST(Validate, ReportsEveryViolation) {
  auto spec = generate_reference_topology(1, 6);
  spec.ases.push_back(spec.ases.front());
  spec.links.push_back({{1, "ROUTER1"}, {1, "ROUTER2"}, Relationship::Peer});
  auto v = validate(spec);
  auto has = [&](ViolationCode c) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == c; });
  };
  EXPECT_TRUE(has(ViolationCode::DuplicateAsn));
  EXPECT_TRUE(has(ViolationCode::SelfLink));
}

TEST(Relationship, IsSymmetric) {
  auto spec = generate_reference_topology(2, 10);
  for (const auto& l : spec.links) {
    auto ab = relationship(spec, l.a.asn, l.b.asn);
    auto ba = relationship(spec, l.b.asn, l.a.asn);
    ASSERT_TRUE(ab && ba);
    const std::map<Peering, Peering> mirror{{Peering::Peer, Peering::Peer},
                                            {Peering::Customer, Peering::Provider},
                                            {Peering::Provider, Peering::Customer}};
    EXPECT_EQ(*ba, mirror.at(*ab));
  }
}

TEST(Instantiate, EveryTemplateElementHasOneDevice) {
  auto spec = generate_reference_topology(1, 6);
  Network net(spec);
  size_t expected = spec.ixps.size();
  for (const auto& as : spec.ases) {
    expected += as.l3.routers.size() * (as.l3.hosts ? 2 : 1);
    if (as.l2) expected += as.l2->switches.size() + as.l2->hosts.size();
    for (const auto& r : as.l3.routers) EXPECT_TRUE(net.find(as.asn, r));
  }
  EXPECT_EQ(net.device_count(), expected);
  for (const auto& s : net.segments())
    for (const auto& e : s.ends) {
      const auto& ports = net.device(e.device).ports;
      EXPECT_NE(std::find(ports.begin(), ports.end(), e.port), ports.end());
    }
}

TEST(Instantiate, AutoConfiguresOnlyAutoAses) {
  auto spec = generate_reference_topology(1, 6);
  auto net = instantiate(spec);
  for (const auto& as : spec.ases) {
    auto r1 = net.id(as.asn, as.l3.routers.front());
    EXPECT_EQ(net.device(r1).config.bgp.has_value(), as.auto_configured) << "AS " << as.asn;
  }
}

}  // namespace
}  // namespace mnsim::topo
