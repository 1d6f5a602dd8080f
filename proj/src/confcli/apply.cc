#include <fmt/format.h>

#include "mnsim/confcli.hpp"

namespace mnsim::conf {

bool PrefixListEntry::matches(const Prefix& p) const {
  if (!prefix.contains(p)) return false;
  if (!ge && !le) return p.length() == prefix.length();
  uint8_t lo = ge ? *ge : prefix.length();
  uint8_t hi = le ? *le : 32;
  return p.length() >= lo && p.length() <= hi;
}

Action PrefixList::evaluate(const Prefix& p) const {
  for (const auto& e : entries)
    if (e.matches(p)) return e.action;
  return Action::Deny;
}

bool CommunityList::matches(const std::set<Community>& communities) const {
  for (const auto& c : communities)
    if (permits.contains(c)) return true;
  return false;
}

namespace {

BgpConfig& require_bgp(DeviceConfig& config) {
  if (!config.bgp) throw SemanticError("router bgp is not configured");
  return *config.bgp;
}

RouteMapEntry& require_entry(DeviceConfig& config, const Context& ctx) {
  auto map = config.route_maps.find(ctx.route_map);
  if (map == config.route_maps.end() || !map->second.entries.contains(ctx.sequence))
    throw SemanticError(fmt::format("route-map {} entry {} does not exist", ctx.route_map, ctx.sequence));
  return map->second.entries.at(ctx.sequence);
}

void check_overlap(const DeviceConfig& config, const std::string& interface, const InterfaceAddress& addr) {
  for (const auto& [name, iface] : config.interfaces) {
    if (name == interface || !iface.address) continue;
    if (iface.address->subnet().overlaps(addr.subnet()))
      throw SemanticError(fmt::format("{} overlaps {} configured on {}", addr.str(), iface.address->str(), name));
  }
}

}  // namespace

void apply_command(DeviceConfig& config, const Command& cmd) {
  const auto& ctx = cmd.context;
  switch (cmd.verb) {
    case Verb::Exit: return;
    case Verb::EnterInterface: config.interfaces[cmd.name]; return;
    case Verb::IpAddress:
      check_overlap(config, ctx.interface, cmd.interface_address);
      config.interfaces[ctx.interface].address = cmd.interface_address;
      return;
    case Verb::NoIpAddress: config.interfaces[ctx.interface].address.reset(); return;
    case Verb::Shutdown: config.interfaces[ctx.interface].shutdown = true; return;
    case Verb::NoShutdown: config.interfaces[ctx.interface].shutdown = false; return;
    case Verb::InterfaceOspfCost: config.interfaces[cmd.name].ospf_cost = cmd.number; return;
    case Verb::EnterRouterOspf:
      if (!config.ospf) config.ospf.emplace();
      return;
    case Verb::NoRouterOspf: config.ospf.reset(); return;
    case Verb::OspfNetwork:
      if (!config.ospf) config.ospf.emplace();
      config.ospf->networks.insert(cmd.prefix);
      return;
    case Verb::NoOspfNetwork:
      if (config.ospf) config.ospf->networks.erase(cmd.prefix);
      return;
    case Verb::EnterRouterBgp:
      if (config.bgp && config.bgp->asn != cmd.number)
        throw SemanticError(fmt::format("BGP is already running with AS {}", config.bgp->asn));
      if (!config.bgp) config.bgp = BgpConfig{cmd.number, {}, {}, {}};
      return;
    case Verb::NoRouterBgp: config.bgp.reset(); return;
    case Verb::BgpRouterId: require_bgp(config).router_id = cmd.address; return;
    case Verb::NeighborRemoteAs: require_bgp(config).neighbors[cmd.address].remote_as = cmd.number; return;
    case Verb::NeighborRouteMap: {
      auto& bgp = require_bgp(config);
      auto n = bgp.neighbors.find(cmd.address);
      if (n == bgp.neighbors.end())
        throw SemanticError(fmt::format("neighbor {} is not configured (missing remote-as)", cmd.address.str()));
      (cmd.inbound ? n->second.route_map_in : n->second.route_map_out) = cmd.name;
      return;
    }
    case Verb::NoNeighbor: require_bgp(config).neighbors.erase(cmd.address); return;
    case Verb::NoNeighborRouteMap: {
      auto& bgp = require_bgp(config);
      auto n = bgp.neighbors.find(cmd.address);
      if (n == bgp.neighbors.end()) return;
      auto& slot = cmd.inbound ? n->second.route_map_in : n->second.route_map_out;
      if (slot == cmd.name) slot.reset();
      return;
    }
    case Verb::BgpNetwork: require_bgp(config).networks.insert(cmd.prefix); return;
    case Verb::NoBgpNetwork: require_bgp(config).networks.erase(cmd.prefix); return;
    case Verb::EnterRouteMap: config.route_maps[cmd.name].entries[cmd.number].action = cmd.action; return;
    case Verb::NoRouteMap: config.route_maps.erase(cmd.name); return;
    case Verb::MatchPrefixList: require_entry(config, ctx).match_prefix_list = cmd.name; return;
    case Verb::MatchCommunity: require_entry(config, ctx).match_community = cmd.name; return;
    case Verb::SetLocalPref: require_entry(config, ctx).set_local_pref = cmd.number; return;
    case Verb::SetMetric: require_entry(config, ctx).set_med = cmd.number; return;
    case Verb::SetCommunity: require_entry(config, ctx).add_communities.insert(cmd.community); return;
    case Verb::SetPrepend: require_entry(config, ctx).prepend = cmd.number; return;
    case Verb::PrefixListEntry: {
      PrefixListEntry e{cmd.action, cmd.prefix, cmd.ge, cmd.le};
      auto& list = config.prefix_lists[cmd.name];
      for (const auto& existing : list.entries)
        if (existing == e) return;
      list.entries.push_back(e);
      return;
    }
    case Verb::CommunityListEntry: config.community_lists[cmd.name].permits.insert(cmd.community); return;
    case Verb::StaticRoute: config.static_routes.insert({cmd.prefix, cmd.address}); return;
    case Verb::NoStaticRoute: config.static_routes.erase({cmd.prefix, cmd.address}); return;
    case Verb::Vlan: config.vlans.insert(static_cast<uint16_t>(cmd.number)); return;
    case Verb::AccessVlan: {
      auto vlan = static_cast<uint16_t>(cmd.number);
      if (!config.vlans.contains(vlan)) throw SemanticError(fmt::format("VLAN {} is not declared", vlan));
      auto& iface = config.interfaces[cmd.name];
      iface.access_vlan = vlan;
      iface.trunk = false;
      return;
    }
    case Verb::Trunk: {
      auto& iface = config.interfaces[cmd.name];
      iface.trunk = true;
      iface.access_vlan.reset();
      return;
    }
    case Verb::StpPriority:
      if (cmd.number % 4096 != 0) throw SemanticError("bridge priority must be a multiple of 4096");
      config.stp_priority = cmd.number;
      return;
  }
}

LoadResult load_config_script(DeviceKind kind, DeviceConfig& config, std::string_view script, bool strict) {
  LoadResult result;
  Context ctx;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= script.size()) {
    auto end = script.find('\n', pos);
    if (end == std::string_view::npos) end = script.size();
    auto line = script.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (is_comment_or_blank(line)) {
      // A bang line closes the current block, as in saved configuration files.
      auto first = line.find_first_not_of(" \t");
      if (first != std::string_view::npos && line[first] == '!') ctx = Context{};
      if (end == script.size()) break;
      continue;
    }
    try {
      auto cmd = parse_command_line(kind, line, ctx);
      apply_command(config, cmd);
      ctx = cmd.next_context();
      ++result.applied;
    } catch (const ParseError& e) {
      result.diagnostics.push_back({line_no, e.column(),
                                    e.kind() == ParseError::Kind::UnknownVerb ? Diagnostic::Severity::Warning
                                                                              : Diagnostic::Severity::Error,
                                    e.what()});
    } catch (const SemanticError& e) {
      result.diagnostics.push_back({line_no, 1, Diagnostic::Severity::Error, e.what()});
    }
    if (strict && !result.diagnostics.empty()) {
      result.stopped = true;
      break;
    }
    if (end == script.size()) break;
  }
  return result;
}

DeviceConfig parse_config(DeviceKind kind, std::string_view script) {
  DeviceConfig config;
  auto r = load_config_script(kind, config, script, true);
  if (!r.diagnostics.empty()) {
    const auto& d = r.diagnostics.front();
    throw SemanticError(fmt::format("line {}: {}", d.line, d.message));
  }
  return config;
}

}  // namespace mnsim::conf
