#pragma once

// Device configuration language: a small dialect of the routing-suite CLI.
//
// A device's running configuration is a DeviceConfig value. Lines of text are
// parsed into Commands relative to a Context (the CLI mode stack) and applied
// one at a time; render_running_config() emits the canonical text form, which
// parses back to an equal DeviceConfig.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mnsim/ip.hpp"

namespace mnsim {

class Network;

enum class DeviceKind { Router, Switch, Host, RouteServer };

const char* to_string(DeviceKind kind);

}  // namespace mnsim

namespace mnsim::conf {

enum class Action { Permit, Deny };

struct InterfaceConfig {
  std::optional<InterfaceAddress> address;
  bool shutdown = false;
  std::optional<uint32_t> ospf_cost;
  // switch ports
  std::optional<uint16_t> access_vlan;
  bool trunk = false;

  bool operator==(const InterfaceConfig&) const = default;
};

struct OspfConfig {
  std::set<Prefix> networks;

  bool operator==(const OspfConfig&) const = default;
};

struct BgpNeighborConfig {
  uint32_t remote_as = 0;
  std::optional<std::string> route_map_in;
  std::optional<std::string> route_map_out;

  bool operator==(const BgpNeighborConfig&) const = default;
};

struct BgpConfig {
  uint32_t asn = 0;
  std::optional<Ipv4> router_id;
  std::map<Ipv4, BgpNeighborConfig> neighbors;
  std::set<Prefix> networks;

  bool operator==(const BgpConfig&) const = default;
};

struct RouteMapEntry {
  Action action = Action::Permit;
  std::optional<std::string> match_prefix_list;
  std::optional<std::string> match_community;
  std::optional<uint32_t> set_local_pref;
  std::optional<uint32_t> set_med;
  std::set<Community> add_communities;
  uint32_t prepend = 0;

  bool operator==(const RouteMapEntry&) const = default;
};

// Entries keyed by sequence number, so iteration order is the evaluation order.
struct RouteMap {
  std::map<uint32_t, RouteMapEntry> entries;

  bool operator==(const RouteMap&) const = default;
};

struct PrefixListEntry {
  Action action = Action::Permit;
  Prefix prefix;
  std::optional<uint8_t> ge;
  std::optional<uint8_t> le;

  bool matches(const Prefix& p) const;
  bool operator==(const PrefixListEntry&) const = default;
};

struct PrefixList {
  std::vector<PrefixListEntry> entries;

  // First matching entry decides; no match is an implicit deny.
  Action evaluate(const Prefix& p) const;
  bool operator==(const PrefixList&) const = default;
};

struct CommunityList {
  std::set<Community> permits;

  bool matches(const std::set<Community>& communities) const;
  bool operator==(const CommunityList&) const = default;
};

struct StaticRoute {
  Prefix prefix;
  Ipv4 via;

  auto operator<=>(const StaticRoute&) const = default;
};

struct DeviceConfig {
  std::map<std::string, InterfaceConfig> interfaces;
  std::optional<OspfConfig> ospf;
  std::optional<BgpConfig> bgp;
  std::map<std::string, RouteMap> route_maps;
  std::map<std::string, PrefixList> prefix_lists;
  std::map<std::string, CommunityList> community_lists;
  std::set<StaticRoute> static_routes;
  // switches
  std::set<uint16_t> vlans;
  std::optional<uint32_t> stp_priority;

  bool operator==(const DeviceConfig&) const = default;
};

// CLI mode. Commands that are not valid in the current mode fall back to the
// global mode, as an interactive vtysh session does.
enum class Mode { Global, Interface, RouterOspf, RouterBgp, RouteMapEntry };

struct Context {
  Mode mode = Mode::Global;
  std::string interface;
  std::string route_map;
  uint32_t sequence = 0;

  bool operator==(const Context&) const = default;
};

enum class Verb {
  Exit,
  EnterInterface,
  IpAddress,
  NoIpAddress,
  Shutdown,
  NoShutdown,
  InterfaceOspfCost,
  EnterRouterOspf,
  NoRouterOspf,
  OspfNetwork,
  NoOspfNetwork,
  EnterRouterBgp,
  NoRouterBgp,
  BgpRouterId,
  NeighborRemoteAs,
  NeighborRouteMap,
  NoNeighbor,
  NoNeighborRouteMap,
  BgpNetwork,
  NoBgpNetwork,
  EnterRouteMap,
  NoRouteMap,
  MatchPrefixList,
  MatchCommunity,
  SetLocalPref,
  SetMetric,
  SetCommunity,
  SetPrepend,
  PrefixListEntry,
  CommunityListEntry,
  StaticRoute,
  NoStaticRoute,
  Vlan,
  AccessVlan,
  Trunk,
  StpPriority,
};

// One parsed CLI line. Only the fields relevant to `verb` are meaningful.
struct Command {
  Context context;  // mode the command executes in
  Verb verb = Verb::Exit;
  std::string name;  // interface / route-map / list name
  Ipv4 address;
  InterfaceAddress interface_address;
  Prefix prefix;
  uint32_t number = 0;  // asn, seq, cost, local-pref, med, vlan, priority, count
  Action action = Action::Permit;
  Community community;
  bool inbound = false;
  std::optional<uint8_t> ge;
  std::optional<uint8_t> le;

  // Canonical text, without indentation.
  std::string render() const;
  // Mode after this command executes.
  Context next_context() const;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { UnknownVerb, WrongArity, MalformedValue, NotSupported };
  ParseError(Kind kind, size_t column, const std::string& message)
      : std::runtime_error(message), kind_(kind), column_(column) {}
  Kind kind() const { return kind_; }
  size_t column() const { return column_; }  // 1-based

 private:
  Kind kind_;
  size_t column_;
};

class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ParseError. Blank lines and comments are not commands; callers skip them.
Command parse_command_line(DeviceKind kind, std::string_view line, const Context& context);

// Throws SemanticError; on error the config is unchanged.
void apply_command(DeviceConfig& config, const Command& cmd);

bool is_comment_or_blank(std::string_view line);

// Canonical running configuration. `header` names the device on the first line.
std::string render_running_config(DeviceKind kind, const std::string& header, const DeviceConfig& config);

// Applies every line of `script` to a fresh config; throws on the first error.
DeviceConfig parse_config(DeviceKind kind, std::string_view script);

struct Diagnostic {
  enum class Severity { Warning, Error };
  size_t line = 0;
  size_t column = 0;
  Severity severity = Severity::Error;
  std::string message;
};

struct LoadResult {
  size_t applied = 0;
  std::vector<Diagnostic> diagnostics;
  bool stopped = false;  // strict mode hit an error
};

// Applies `script` in order to one device's config. Lenient mode skips bad lines
// and collects diagnostics; strict mode stops at the first bad line.
LoadResult load_config_script(DeviceKind kind, DeviceConfig& config, std::string_view script,
                              bool strict = false);

// Same, addressed by (asn, device). Throws std::out_of_range for an unknown device.
LoadResult load_config_script(Network& network, uint32_t asn, const std::string& device,
                              std::string_view script, bool strict = false);

}  // namespace mnsim::conf
