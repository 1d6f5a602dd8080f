#include <fmt/format.h>

#include "mnsim/network.hpp"

namespace mnsim {

namespace {

constexpr const char* kFromCustomer = "FROM_CUSTOMER";
constexpr const char* kFromPeer = "FROM_PEER";
constexpr const char* kFromProvider = "FROM_PROVIDER";
constexpr const char* kToPeerProvider = "TO_PEER_PROVIDER";
constexpr const char* kPeerProviderList = "PEER_PROVIDER";

struct EbgpNeighbor {
  Ipv4 address;
  uint32_t remote_as;
  const char* map_in;
  const char* map_out;  // nullptr: export everything
};

class ScriptBuilder {
 public:
  void line(std::string s) {
    out_ += s;
    out_ += '\n';
  }
  void interface(const std::string& name, const InterfaceAddress& a) {
    line("interface " + name);
    line(" ip address " + a.str());
    line("!");
  }
  std::string str() && { return std::move(out_); }

 private:
  std::string out_;
};

std::string router_script(const Network& net, const topo::AsSpec& as, const std::string& router, ConfigPhase phase) {
  const auto& plan = net.plan().ases.at(as.asn);
  const auto& spec = net.spec();
  const auto n = as.asn;
  ScriptBuilder s;
  std::vector<Prefix> ospf;

  auto lo = plan.loopbacks.at(router);
  s.interface("lo", {lo, 32});
  ospf.push_back(Prefix(lo, 32));
  if (as.l3.hosts) {
    auto lan = plan.host_lans.at(router);
    s.interface("host", {Ipv4(lan.network().value() + 2), 24});
    ospf.push_back(lan);
  }
  for (const auto& l : as.l3.links) {
    if (l.a != router && l.b != router) continue;
    const auto& peer = l.a == router ? l.b : l.a;
    auto key = topo::ordered(l.a, l.b);
    auto subnet = plan.intra_links.at(key);
    s.interface(intra_port(peer), {Ipv4(subnet.network().value() + (key.first == router ? 1 : 2)), 30});
    if (l.cost != 1) s.line(fmt::format("interface {} ospf cost {}", intra_port(peer), l.cost));
    ospf.push_back(subnet);
  }
  std::vector<EbgpNeighbor> ebgp;
  for (size_t i = 0; i < spec.links.size(); ++i) {
    const auto& l = spec.links[i];
    const topo::RouterRef self{n, router};
    if (l.a != self && l.b != self) continue;
    const auto& other = l.a == self ? l.b : l.a;
    s.interface(ext_port(other.asn, other.router), {net.plan().link_address(spec, i, n), 30});
    ospf.push_back(net.plan().inter_as_links[i]);
    auto rel = topo::relationship(spec, n, other.asn);
    const char* in = kFromPeer;
    const char* out = kToPeerProvider;
    if (rel == topo::Peering::Customer) {
      in = kFromCustomer;
      out = nullptr;
    } else if (rel == topo::Peering::Provider) {
      in = kFromProvider;
    }
    ebgp.push_back({net.plan().link_address(spec, i, other.asn), other.asn, in, out});
  }
  for (const auto& x : spec.ixps) {
    for (const auto& m : x.members) {
      if (m.asn != n || m.router != router) continue;
      s.interface(ixp_port(x.id), {topo::AddressPlan::ixp_member_address(x.id, n), 24});
      ospf.push_back(net.plan().ixps.at(x.id));
      ebgp.push_back({topo::AddressPlan::route_server_address(x.id), x.id, kFromPeer, kToPeerProvider});
    }
  }
  if (as.l2 && as.l2->gateway_router == router) {
    for (const auto& [vlan, subnet] : plan.vlan_subnets) {
      s.interface(fmt::format("l2.{}", vlan), {Ipv4(subnet.network().value() + 1), 25});
      ospf.push_back(subnet);
    }
  }
  s.line("router ospf");
  for (const auto& p : ospf) s.line(fmt::format(" network {} area 0", p.str()));
  s.line("!");
  if (phase == ConfigPhase::Intra) return std::move(s).str();

  bool policies = phase == ConfigPhase::Full;
  s.line(fmt::format("router bgp {}", n));
  s.line(fmt::format(" bgp router-id {}", lo.str()));
  for (const auto& other : as.l3.routers)
    if (other != router) s.line(fmt::format(" neighbor {} remote-as {}", plan.loopbacks.at(other).str(), n));
  for (const auto& e : ebgp) {
    s.line(fmt::format(" neighbor {} remote-as {}", e.address.str(), e.remote_as));
    if (!policies) continue;
    s.line(fmt::format(" neighbor {} route-map {} in", e.address.str(), e.map_in));
    if (e.map_out) s.line(fmt::format(" neighbor {} route-map {} out", e.address.str(), e.map_out));
  }
  s.line(fmt::format(" network {}", plan.as_prefix.str()));
  s.line("!");
  if (!policies || ebgp.empty()) return std::move(s).str();

  const std::tuple<const char*, uint32_t, uint16_t> imports[] = {
      {kFromCustomer, 300, 10}, {kFromPeer, 200, 20}, {kFromProvider, 100, 30}};
  for (auto [name, lp, tag] : imports) {
    s.line(fmt::format("route-map {} permit 10", name));
    s.line(fmt::format(" set local-preference {}", lp));
    s.line(fmt::format(" set community {}:{} additive", n, tag));
    s.line("!");
  }
  s.line(fmt::format("route-map {} deny 10", kToPeerProvider));
  s.line(fmt::format(" match community {}", kPeerProviderList));
  s.line("!");
  s.line(fmt::format("route-map {} permit 20", kToPeerProvider));
  s.line("!");
  s.line(fmt::format("bgp community-list {} permit {}:20", kPeerProviderList, n));
  s.line(fmt::format("bgp community-list {} permit {}:30", kPeerProviderList, n));
  return std::move(s).str();
}

std::string switch_script(const topo::L2Template& t, const std::string& sw) {
  ScriptBuilder s;
  for (auto vlan : t.vlans()) s.line(fmt::format("vlan {}", vlan));
  for (const auto& h : t.hosts)
    if (h.sw == sw) s.line(fmt::format("interface {} access vlan {}", h.host, h.vlan));
  for (const auto& [a, b] : t.links) {
    if (a == sw) s.line(fmt::format("interface {} trunk", b));
    if (b == sw) s.line(fmt::format("interface {} trunk", a));
  }
  if (t.gateway_switch == sw) s.line(fmt::format("interface {} trunk", t.gateway_router));
  return std::move(s).str();
}

std::string host_script(const InterfaceAddress& a, Ipv4 gateway) {
  ScriptBuilder s;
  s.interface("eth0", a);
  s.line(fmt::format("ip route default via {}", gateway.str()));
  return std::move(s).str();
}

}  // namespace

std::map<std::string, std::string> generate_reference_config(const Network& net, uint32_t asn, ConfigPhase phase) {
  std::map<std::string, std::string> out;
  const auto& spec = net.spec();
  for (const auto& x : spec.ixps) {
    if (x.id != asn) continue;
    ScriptBuilder s;
    auto rs = topo::AddressPlan::route_server_address(x.id);
    s.interface("lan", {rs, 24});
    s.line(fmt::format("router bgp {}", x.id));
    s.line(fmt::format(" bgp router-id {}", rs.str()));
    for (const auto& m : x.members)
      s.line(fmt::format(" neighbor {} remote-as {}", topo::AddressPlan::ixp_member_address(x.id, m.asn).str(), m.asn));
    s.line("!");
    out.emplace(kRouteServerName, std::move(s).str());
    return out;
  }
  const auto* as = spec.find_as(asn);
  if (!as) throw std::out_of_range(fmt::format("unknown AS {}", asn));
  const auto& plan = net.plan().ases.at(asn);

  for (const auto& r : as->l3.routers) out.emplace(r, router_script(net, *as, r, phase));
  if (as->l3.hosts) {
    for (const auto& r : as->l3.routers) {
      auto lan = plan.host_lans.at(r);
      out.emplace(host_name(r), host_script({Ipv4(lan.network().value() + 1), 24}, Ipv4(lan.network().value() + 2)));
    }
  }
  if (as->l2) {
    const auto& t = *as->l2;
    for (const auto& sw : t.switches) out.emplace(sw.name, switch_script(t, sw.name));
    std::map<uint16_t, uint32_t> next;  // per VLAN host offset, starting at .2
    for (const auto& h : t.hosts) {
      auto subnet = plan.vlan_subnets.at(h.vlan);
      auto offset = next.emplace(h.vlan, 2).first->second++;
      out.emplace(h.host, host_script({Ipv4(subnet.network().value() + offset), 25}, Ipv4(subnet.network().value() + 1)));
    }
  }
  return out;
}

void apply_reference_config(Network& net, uint32_t asn, ConfigPhase phase) {
  auto scripts = generate_reference_config(net, asn, phase);
  for (const auto& [name, script] : scripts) {
    auto id = net.id(asn, name);
    auto& dev = net.mutable_device(id);
    dev.config = conf::parse_config(dev.kind, script);
  }
}

Network instantiate(const topo::TopologySpec& spec) {
  Network net(spec);
  for (const auto& as : spec.ases)
    if (as.auto_configured) apply_reference_config(net, as.asn, ConfigPhase::Full);
  for (const auto& x : spec.ixps) apply_reference_config(net, x.id, ConfigPhase::Full);
  return net;
}

}  // namespace mnsim
