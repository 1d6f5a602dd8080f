#include <algorithm>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "mnsim/topo.hpp"

namespace mnsim::topo {

const char* to_string(Role role) {
  switch (role) {
    case Role::Tier1: return "tier1";
    case Role::Transit: return "transit";
    case Role::Stub: return "stub";
  }
  return "?";
}

const char* to_string(Peering p) {
  switch (p) {
    case Peering::Customer: return "customer";
    case Peering::Provider: return "provider";
    case Peering::Peer: return "peer";
  }
  return "?";
}

std::string RouterRef::str() const { return fmt::format("{}.{}", asn, router); }

size_t L3Template::index_of(const std::string& router) const {
  auto it = std::find(routers.begin(), routers.end(), router);
  return it == routers.end() ? 0 : static_cast<size_t>(it - routers.begin()) + 1;
}

std::set<uint16_t> L2Template::vlans() const {
  std::set<uint16_t> out;
  for (const auto& h : hosts) out.insert(h.vlan);
  return out;
}

size_t L2Template::index_of(const std::string& sw) const {
  for (size_t i = 0; i < switches.size(); ++i)
    if (switches[i].name == sw) return i + 1;
  return 0;
}

const AsSpec* TopologySpec::find_as(uint32_t asn) const {
  for (const auto& as : ases)
    if (as.asn == asn) return &as;
  return nullptr;
}

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

L3Template default_l3_template() {
  L3Template t;
  for (int i = 1; i <= 8; ++i) t.routers.push_back(fmt::format("ROUTER{}", i));
  const std::pair<int, int> edges[] = {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5},
                                       {4, 6}, {5, 7}, {6, 7}, {6, 8}, {7, 8}};
  for (auto [a, b] : edges)
    t.links.push_back({fmt::format("ROUTER{}", a), fmt::format("ROUTER{}", b), 1, 1000});
  return t;
}

L2Template default_l2_template() {
  L2Template t;
  for (int i = 1; i <= 4; ++i) t.switches.push_back({fmt::format("S{}", i), 32768});
  t.links = {{"S1", "S2"}, {"S2", "S3"}, {"S3", "S4"}, {"S4", "S1"}, {"S1", "S3"}};
  t.hosts = {{"S1", "L2H1", 10}, {"S1", "L2H2", 20}, {"S2", "L2H3", 10}, {"S2", "L2H4", 30},
             {"S3", "L2H5", 20}, {"S3", "L2H6", 30}, {"S4", "L2H7", 10}, {"S4", "L2H8", 20}};
  t.gateway_switch = "S1";
  t.gateway_router = "ROUTER1";
  return t;
}

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::DuplicateAsn: return "DuplicateAsn";
    case ViolationCode::AsnOutOfRange: return "AsnOutOfRange";
    case ViolationCode::UnknownRegion: return "UnknownRegion";
    case ViolationCode::DuplicateRegion: return "DuplicateRegion";
    case ViolationCode::EmptyTemplate: return "EmptyTemplate";
    case ViolationCode::InvalidName: return "InvalidName";
    case ViolationCode::DuplicateRouter: return "DuplicateRouter";
    case ViolationCode::UnknownRouter: return "UnknownRouter";
    case ViolationCode::DuplicateLink: return "DuplicateLink";
    case ViolationCode::DisconnectedRouters: return "DisconnectedRouters";
    case ViolationCode::TemplateTooLarge: return "TemplateTooLarge";
    case ViolationCode::DuplicateSwitch: return "DuplicateSwitch";
    case ViolationCode::UnknownSwitch: return "UnknownSwitch";
    case ViolationCode::DisconnectedSwitches: return "DisconnectedSwitches";
    case ViolationCode::DuplicateHost: return "DuplicateHost";
    case ViolationCode::BadGateway: return "BadGateway";
    case ViolationCode::UnknownAs: return "UnknownAs";
    case ViolationCode::SelfLink: return "SelfLink";
    case ViolationCode::DuplicateAsPair: return "DuplicateAsPair";
    case ViolationCode::IxpIdInvalid: return "IxpIdInvalid";
    case ViolationCode::IxpTooFewMembers: return "IxpTooFewMembers";
    case ViolationCode::DuplicateMember: return "DuplicateMember";
    case ViolationCode::DisconnectedAsGraph: return "DisconnectedAsGraph";
  }
  return "?";
}

std::string Violation::str() const { return fmt::format("{}({})", to_string(code), detail); }

namespace {

// Union-find over dense indices.
class Components {
 public:
  explicit Components(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  size_t find(size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(size_t a, size_t b) { parent_[find(a)] = find(b); }
  size_t count() {
    size_t n = 0;
    for (size_t i = 0; i < parent_.size(); ++i) n += find(i) == i;
    return n;
  }

 private:
  std::vector<size_t> parent_;
};

// Names end up in interface names, file tokens and URLs.
bool valid_name(const std::string& name) {
  if (name.empty() || name.size() > 32) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

constexpr size_t kMaxRouters = 49;      // host LANs n.101..n.149
constexpr size_t kMaxIntraLinks = 199;  // n.0.1.0 .. n.0.199.0, below the L2 /23
constexpr size_t kMaxVlans = 4;         // /25 blocks in the /23
constexpr size_t kMaxHostsPerVlan = 125;

class Validator {
 public:
  explicit Validator(const TopologySpec& spec) : spec_(spec) {}

  std::vector<Violation> run() {
    regions();
    for (size_t i = 0; i < spec_.ases.size(); ++i) as(i);
    for (size_t i = 0; i < spec_.links.size(); ++i) link(i);
    for (size_t i = 0; i < spec_.ixps.size(); ++i) ixp(i);
    connectivity();
    return std::move(out_);
  }

 private:
  using E = Violation::Element;

  void add(ViolationCode code, E element, size_t index, std::string detail) {
    out_.push_back({code, element, index, std::move(detail)});
  }

  void regions() {
    std::set<std::string> seen;
    for (const auto& r : spec_.regions) {
      if (!seen.insert(r).second) add(ViolationCode::DuplicateRegion, E::Global, 0, r);
      if (!valid_name(r)) add(ViolationCode::InvalidName, E::Global, 0, r);
    }
  }

  void as(size_t i) {
    const auto& as = spec_.ases[i];
    auto tag = [&](const std::string& s) { return fmt::format("AS {}: {}", as.asn, s); };
    if (as.asn == 0 || as.asn > 126) add(ViolationCode::AsnOutOfRange, E::As, i, std::to_string(as.asn));
    if (!asns_.insert(as.asn).second) add(ViolationCode::DuplicateAsn, E::As, i, std::to_string(as.asn));
    if (std::find(spec_.regions.begin(), spec_.regions.end(), as.region) == spec_.regions.end())
      add(ViolationCode::UnknownRegion, E::As, i, tag(as.region));

    const auto& l3 = as.l3;
    if (l3.routers.empty()) add(ViolationCode::EmptyTemplate, E::As, i, tag("no routers"));
    if (l3.routers.size() > kMaxRouters)
      add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("{} routers", l3.routers.size())));
    if (l3.links.size() > kMaxIntraLinks)
      add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("{} links", l3.links.size())));
    std::set<std::string> names;
    for (const auto& r : l3.routers) {
      if (!valid_name(r)) add(ViolationCode::InvalidName, E::As, i, tag(r));
      if (!names.insert(r).second) add(ViolationCode::DuplicateRouter, E::As, i, tag(r));
    }
    Components routers(l3.routers.size());
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& l : l3.links) {
      auto ia = l3.index_of(l.a), ib = l3.index_of(l.b);
      if (!ia || !ib || ia == ib) {
        add(ViolationCode::UnknownRouter, E::As, i, tag(fmt::format("link {}-{}", l.a, l.b)));
        continue;
      }
      if (!pairs.insert(ordered(l.a, l.b)).second)
        add(ViolationCode::DuplicateLink, E::As, i, tag(fmt::format("{}-{}", l.a, l.b)));
      if (l.cost == 0 || l.cost > 65535)
        add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("cost {}", l.cost)));
      routers.unite(ia - 1, ib - 1);
    }
    if (!l3.routers.empty() && routers.count() != 1)
      add(ViolationCode::DisconnectedRouters, E::As, i, tag("router graph is not connected"));

    if (as.l2) l2(i, as, *as.l2, names);
  }

  void l2(size_t i, const AsSpec& as, const L2Template& t, std::set<std::string> names) {
    auto tag = [&](const std::string& s) { return fmt::format("AS {}: {}", as.asn, s); };
    if (t.switches.empty()) add(ViolationCode::EmptyTemplate, E::As, i, tag("no switches"));
    for (const auto& s : t.switches) {
      if (!valid_name(s.name)) add(ViolationCode::InvalidName, E::As, i, tag(s.name));
      if (!names.insert(s.name).second) add(ViolationCode::DuplicateSwitch, E::As, i, tag(s.name));
      if (s.priority > 61440 || s.priority % 4096 != 0)
        add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("priority {}", s.priority)));
    }
    Components sw(t.switches.size());
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, b] : t.links) {
      auto ia = t.index_of(a), ib = t.index_of(b);
      if (!ia || !ib || ia == ib) {
        add(ViolationCode::UnknownSwitch, E::As, i, tag(fmt::format("link {}-{}", a, b)));
        continue;
      }
      if (!pairs.insert(ordered(a, b)).second)
        add(ViolationCode::DuplicateLink, E::As, i, tag(fmt::format("{}-{}", a, b)));
      sw.unite(ia - 1, ib - 1);
    }
    if (!t.switches.empty() && sw.count() != 1)
      add(ViolationCode::DisconnectedSwitches, E::As, i, tag("switch graph is not connected"));
    std::map<uint16_t, size_t> per_vlan;
    for (const auto& h : t.hosts) {
      if (!t.index_of(h.sw)) add(ViolationCode::UnknownSwitch, E::As, i, tag(h.sw));
      if (!valid_name(h.host)) add(ViolationCode::InvalidName, E::As, i, tag(h.host));
      if (!names.insert(h.host).second) add(ViolationCode::DuplicateHost, E::As, i, tag(h.host));
      if (h.vlan == 0 || h.vlan > 4094) add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("vlan {}", h.vlan)));
      ++per_vlan[h.vlan];
    }
    if (per_vlan.size() > kMaxVlans)
      add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("{} vlans", per_vlan.size())));
    for (auto [vlan, n] : per_vlan)
      if (n > kMaxHostsPerVlan)
        add(ViolationCode::TemplateTooLarge, E::As, i, tag(fmt::format("{} hosts in vlan {}", n, vlan)));
    if (!t.index_of(t.gateway_switch) || !as.l3.index_of(t.gateway_router))
      add(ViolationCode::BadGateway, E::As, i, tag(fmt::format("{}:{}", t.gateway_switch, t.gateway_router)));
  }

  bool endpoint(const RouterRef& r, E element, size_t i) {
    const auto* as = spec_.find_as(r.asn);
    if (!as) {
      add(ViolationCode::UnknownAs, element, i, r.str());
      return false;
    }
    if (!as->l3.index_of(r.router)) {
      add(ViolationCode::UnknownRouter, element, i, r.str());
      return false;
    }
    return true;
  }

  void link(size_t i) {
    const auto& l = spec_.links[i];
    bool ok = endpoint(l.a, E::Link, i) & endpoint(l.b, E::Link, i);
    if (l.a.asn == l.b.asn) {
      add(ViolationCode::SelfLink, E::Link, i, fmt::format("{} {}", l.a.str(), l.b.str()));
      return;
    }
    if (ok && !as_pairs_.insert(std::minmax(l.a.asn, l.b.asn)).second)
      add(ViolationCode::DuplicateAsPair, E::Link, i, fmt::format("{}-{}", l.a.asn, l.b.asn));
  }

  void ixp(size_t i) {
    const auto& x = spec_.ixps[i];
    if (x.id == 0 || x.id > 255 || asns_.contains(x.id) || !ixp_ids_.insert(x.id).second)
      add(ViolationCode::IxpIdInvalid, E::Ixp, i, std::to_string(x.id));
    std::set<uint32_t> members;
    for (const auto& m : x.members) {
      endpoint(m, E::Ixp, i);
      if (!members.insert(m.asn).second)
        add(ViolationCode::DuplicateMember, E::Ixp, i, fmt::format("ixp {}: {}", x.id, m.str()));
    }
    if (members.size() < 2) add(ViolationCode::IxpTooFewMembers, E::Ixp, i, std::to_string(x.id));
  }

  void connectivity() {
    if (spec_.ases.empty()) return;
    std::map<uint32_t, size_t> index;
    for (const auto& as : spec_.ases) index.emplace(as.asn, index.size());
    Components c(index.size());
    for (const auto& l : spec_.links) {
      auto a = index.find(l.a.asn), b = index.find(l.b.asn);
      if (a != index.end() && b != index.end()) c.unite(a->second, b->second);
    }
    if (c.count() != 1)
      add(ViolationCode::DisconnectedAsGraph, E::Global, 0,
          fmt::format("{} components without IXP links", c.count()));
  }

  const TopologySpec& spec_;
  std::vector<Violation> out_;
  std::set<uint32_t> asns_;
  std::set<uint32_t> ixp_ids_;
  std::set<std::pair<uint32_t, uint32_t>> as_pairs_;
};

}  // namespace

std::vector<Violation> validate(const TopologySpec& spec) { return Validator(spec).run(); }

std::optional<Peering> relationship(const TopologySpec& spec, uint32_t self, uint32_t other) {
  for (const auto& l : spec.links) {
    bool forward = l.a.asn == self && l.b.asn == other;
    bool backward = l.b.asn == self && l.a.asn == other;
    if (!forward && !backward) continue;
    switch (l.rel) {
      case Relationship::Peer: return Peering::Peer;
      case Relationship::AProviderOfB: return forward ? Peering::Customer : Peering::Provider;
      case Relationship::BProviderOfA: return forward ? Peering::Provider : Peering::Customer;
    }
  }
  return std::nullopt;
}

AddressPlan allocate_addresses(const TopologySpec& spec) {
  AddressPlan plan;
  for (const auto& as : spec.ases) {
    if (as.asn == 0 || as.asn > 126)
      throw std::invalid_argument(fmt::format("AS number {} does not fit the /8 address plan", as.asn));
    auto n = static_cast<uint8_t>(as.asn);
    AsAddresses a;
    a.as_prefix = Prefix(Ipv4(n, 0, 0, 0), 8);
    a.l2_subnet = Prefix(Ipv4(n, 0, 200, 0), 23);
    if (as.l2) {
      uint32_t block = 0;
      for (auto vlan : as.l2->vlans())
        a.vlan_subnets.emplace(vlan, Prefix(Ipv4(a.l2_subnet.network().value() + 128 * block++), 25));
    }
    for (size_t r = 1; r <= as.l3.routers.size(); ++r) {
      const auto& name = as.l3.routers[r - 1];
      a.loopbacks.emplace(name, Ipv4(n, 150, 0, static_cast<uint8_t>(r)));
      if (as.l3.hosts) a.host_lans.emplace(name, Prefix(Ipv4(n, static_cast<uint8_t>(100 + r), 0, 0), 24));
    }
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& l : as.l3.links) keys.insert(ordered(l.a, l.b));
    uint8_t k = 1;
    for (const auto& key : keys) a.intra_links.emplace(key, Prefix(Ipv4(n, 0, k++, 0), 30));
    plan.ases.emplace(as.asn, std::move(a));
  }
  for (const auto& l : spec.links) {
    auto [lo, hi] = std::minmax(l.a.asn, l.b.asn);
    plan.inter_as_links.push_back(Prefix(Ipv4(179, static_cast<uint8_t>(lo), static_cast<uint8_t>(hi), 0), 30));
  }
  for (const auto& x : spec.ixps)
    plan.ixps.emplace(x.id, Prefix(Ipv4(180, static_cast<uint8_t>(x.id), 0, 0), 24));
  return plan;
}

Ipv4 AddressPlan::link_address(const TopologySpec& spec, size_t index, uint32_t asn) const {
  const auto& l = spec.links.at(index);
  auto lo = std::min(l.a.asn, l.b.asn);
  return Ipv4(inter_as_links.at(index).network().value() + (asn == lo ? 1 : 2));
}

Ipv4 AddressPlan::ixp_member_address(uint32_t ixp, uint32_t asn) {
  return Ipv4(180, static_cast<uint8_t>(ixp), 0, static_cast<uint8_t>(asn));
}

Ipv4 AddressPlan::route_server_address(uint32_t ixp) { return Ipv4(180, static_cast<uint8_t>(ixp), 0, 254); }

std::vector<Prefix> AddressPlan::all_subnets() const {
  std::vector<Prefix> out;
  for (const auto& [asn, a] : ases) {
    // The /8 and the /23 are containers, not allocations of their own.
    for (const auto& [v, p] : a.vlan_subnets) out.push_back(p);
    for (const auto& [r, p] : a.host_lans) out.push_back(p);
    for (const auto& [r, ip] : a.loopbacks) out.push_back(Prefix(ip, 32));
    for (const auto& [k, p] : a.intra_links) out.push_back(p);
  }
  out.insert(out.end(), inter_as_links.begin(), inter_as_links.end());
  for (const auto& [id, p] : ixps) out.push_back(p);
  return out;
}

}  // namespace mnsim::topo
