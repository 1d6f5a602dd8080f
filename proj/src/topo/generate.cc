#include <fmt/format.h>

#include "mnsim/topo.hpp"

namespace mnsim::topo {

namespace {

// Hands out the router used for each new link of an AS: links to providers
// land on ROUTER1/2, links to customers on ROUTER7/8, peerings on ROUTER3/4 and
// the IXP port on ROUTER5.
class Slots {
 public:
  std::string provider_side(uint32_t asn) { return pick(asn, 0, {1, 2}); }
  std::string customer_side(uint32_t asn) { return pick(asn, 1, {7, 8}); }
  std::string peer_side(uint32_t asn) { return pick(asn, 2, {3, 4}); }
  static std::string ixp_side() { return "ROUTER5"; }

 private:
  std::string pick(uint32_t asn, int kind, std::pair<int, int> routers) {
    auto n = used_[{asn, kind}]++;
    return fmt::format("ROUTER{}", n % 2 == 0 ? routers.first : routers.second);
  }
  std::map<std::pair<uint32_t, int>, unsigned> used_;
};

}  // namespace

TopologySpec generate_reference_topology(unsigned regions, unsigned ases_per_region) {
  if (regions < 1) throw std::invalid_argument("need at least one region");
  if (ases_per_region < 4) throw std::invalid_argument("need at least 4 ASes per region");
  if (ases_per_region % 2 != 0) throw std::invalid_argument("ASes per region must be even");
  if (regions * ases_per_region > 126) throw std::invalid_argument("more than 126 ASes do not fit the address plan");

  const unsigned n = ases_per_region;
  const unsigned layers = (n - 4) / 2;
  TopologySpec spec;
  Slots slots;

  auto tier1 = [&](unsigned r, unsigned k) { return r * n + 1 + k; };
  auto transit = [&](unsigned r, unsigned layer, unsigned k) { return r * n + 3 + 2 * (layer - 1) + k; };
  auto stub = [&](unsigned r, unsigned k) { return r * n + n - 1 + k; };

  for (unsigned r = 0; r < regions; ++r) {
    auto region = fmt::format("region{}", r + 1);
    spec.regions.push_back(region);
    for (unsigned i = 1; i <= n; ++i) {
      AsSpec as;
      as.asn = r * n + i;
      as.role = i <= 2 ? Role::Tier1 : (i > n - 2 ? Role::Stub : Role::Transit);
      as.region = region;
      as.l3 = default_l3_template();
      as.l2 = default_l2_template();
      as.auto_configured = as.role != Role::Transit;
      spec.ases.push_back(std::move(as));
    }
  }

  auto provide = [&](uint32_t provider, uint32_t customer) {
    spec.links.push_back({{provider, slots.customer_side(provider)},
                          {customer, slots.provider_side(customer)},
                          Relationship::AProviderOfB});
  };
  auto peer = [&](uint32_t a, uint32_t b) {
    spec.links.push_back({{a, slots.peer_side(a)}, {b, slots.peer_side(b)}, Relationship::Peer});
  };

  // Tier1s form one global full mesh.
  std::vector<uint32_t> tier1s;
  for (unsigned r = 0; r < regions; ++r) tier1s.insert(tier1s.end(), {tier1(r, 0), tier1(r, 1)});
  for (size_t i = 0; i < tier1s.size(); ++i)
    for (size_t j = i + 1; j < tier1s.size(); ++j) peer(tier1s[i], tier1s[j]);

  for (unsigned r = 0; r < regions; ++r) {
    std::pair<uint32_t, uint32_t> upper{tier1(r, 0), tier1(r, 1)};
    for (unsigned layer = 1; layer <= layers; ++layer) {
      std::pair<uint32_t, uint32_t> pair{transit(r, layer, 0), transit(r, layer, 1)};
      for (auto p : {upper.first, upper.second})
        for (auto c : {pair.first, pair.second}) provide(p, c);
      peer(pair.first, pair.second);
      upper = pair;
    }
    for (auto p : {upper.first, upper.second})
      for (auto c : {stub(r, 0), stub(r, 1)}) provide(p, c);
  }

  uint32_t next_ixp = regions * n + 1;
  auto member = [](uint32_t asn) { return RouterRef{asn, Slots::ixp_side()}; };
  if (layers >= 2) {
    for (unsigned r = 0; r < regions; ++r) {
      IxpSpec x{next_ixp++, {}, 1000};
      for (unsigned layer = 1; layer < layers; ++layer)
        for (unsigned k = 0; k < 2; ++k) x.members.push_back(member(transit(r, layer, k)));
      spec.ixps.push_back(std::move(x));
    }
  }
  if (layers >= 1) {
    IxpSpec x{next_ixp++, {}, 1000};
    for (unsigned r = 0; r < regions; ++r)
      for (unsigned k = 0; k < 2; ++k) x.members.push_back(member(transit(r, layers, k)));
    spec.ixps.push_back(std::move(x));
  }
  return spec;
}

}  // namespace mnsim::topo
