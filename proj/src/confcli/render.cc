#include <fmt/format.h>

#include "mnsim/confcli.hpp"

namespace mnsim::conf {

namespace {

const char* action_text(Action a) { return a == Action::Permit ? "permit" : "deny"; }

void render_interfaces(std::string& out, const DeviceConfig& config) {
  for (const auto& [name, iface] : config.interfaces) {
    bool one_liner = iface.ospf_cost || iface.access_vlan || iface.trunk;
    if (!iface.address && !iface.shutdown && one_liner) continue;
    out += fmt::format("interface {}\n", name);
    if (iface.address) out += fmt::format(" ip address {}\n", iface.address->str());
    if (iface.shutdown) out += " shutdown\n";
    out += "!\n";
  }
  for (const auto& [name, iface] : config.interfaces) {
    if (iface.ospf_cost) out += fmt::format("interface {} ospf cost {}\n", name, *iface.ospf_cost);
    if (iface.access_vlan) out += fmt::format("interface {} access vlan {}\n", name, *iface.access_vlan);
    if (iface.trunk) out += fmt::format("interface {} trunk\n", name);
  }
}

}  // namespace

std::string render_running_config(DeviceKind kind, const std::string& header, const DeviceConfig& config) {
  std::string out = fmt::format("! running-config {} ({})\n", header, to_string(kind));

  // VLANs precede the ports that reference them.
  for (auto vlan : config.vlans) out += fmt::format("vlan {}\n", vlan);
  render_interfaces(out, config);
  if (config.stp_priority) out += fmt::format("spanning-tree priority {}\n", *config.stp_priority);

  if (config.ospf) {
    out += "router ospf\n";
    for (const auto& p : config.ospf->networks) out += fmt::format(" network {} area 0\n", p.str());
    out += "!\n";
  }
  if (config.bgp) {
    const auto& bgp = *config.bgp;
    out += fmt::format("router bgp {}\n", bgp.asn);
    if (bgp.router_id) out += fmt::format(" bgp router-id {}\n", bgp.router_id->str());
    for (const auto& [addr, n] : bgp.neighbors) {
      out += fmt::format(" neighbor {} remote-as {}\n", addr.str(), n.remote_as);
      if (n.route_map_in) out += fmt::format(" neighbor {} route-map {} in\n", addr.str(), *n.route_map_in);
      if (n.route_map_out) out += fmt::format(" neighbor {} route-map {} out\n", addr.str(), *n.route_map_out);
    }
    for (const auto& p : bgp.networks) out += fmt::format(" network {}\n", p.str());
    out += "!\n";
  }
  for (const auto& [name, map] : config.route_maps) {
    for (const auto& [seq, e] : map.entries) {
      out += fmt::format("route-map {} {} {}\n", name, action_text(e.action), seq);
      if (e.match_prefix_list) out += fmt::format(" match ip address prefix-list {}\n", *e.match_prefix_list);
      if (e.match_community) out += fmt::format(" match community {}\n", *e.match_community);
      if (e.set_local_pref) out += fmt::format(" set local-preference {}\n", *e.set_local_pref);
      if (e.set_med) out += fmt::format(" set metric {}\n", *e.set_med);
      for (const auto& c : e.add_communities) out += fmt::format(" set community {} additive\n", c.str());
      if (e.prepend) out += fmt::format(" set as-path prepend {}\n", e.prepend);
      out += "!\n";
    }
  }
  for (const auto& [name, list] : config.prefix_lists) {
    for (const auto& e : list.entries) {
      out += fmt::format("ip prefix-list {} {} {}", name, action_text(e.action), e.prefix.str());
      if (e.le) out += fmt::format(" le {}", *e.le);
      if (e.ge) out += fmt::format(" ge {}", *e.ge);
      out += "\n";
    }
  }
  for (const auto& [name, list] : config.community_lists)
    for (const auto& c : list.permits) out += fmt::format("bgp community-list {} permit {}\n", name, c.str());
  for (const auto& r : config.static_routes)
    out += fmt::format("ip route {} via {}\n", r.prefix.length() == 0 ? std::string("default") : r.prefix.str(),
                       r.via.str());
  return out;
}

}  // namespace mnsim::conf
