#include <fmt/format.h>

#include "mnsim/confcli.hpp"
#include "mnsim/text.hpp"

namespace mnsim {

const char* to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Router: return "router";
    case DeviceKind::Switch: return "switch";
    case DeviceKind::Host: return "host";
    case DeviceKind::RouteServer: return "route-server";
  }
  return "?";
}

}  // namespace mnsim

namespace mnsim::conf {

namespace {

struct Token {
  std::string_view text;
  size_t column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

using Kind = ParseError::Kind;

class LineParser {
 public:
  LineParser(DeviceKind kind, std::vector<Token> toks) : kind_(kind), toks_(std::move(toks)) {}

  std::optional<Command> parse_in(const Context& ctx) {
    switch (ctx.mode) {
      case Mode::Global: return global(ctx);
      case Mode::Interface: return interface_mode(ctx);
      case Mode::RouterOspf: return ospf_mode(ctx);
      case Mode::RouterBgp: return bgp_mode(ctx);
      case Mode::RouteMapEntry: return route_map_mode(ctx);
    }
    return std::nullopt;
  }

 private:
  bool is(size_t i, std::string_view word) const { return i < toks_.size() && toks_[i].text == word; }

  size_t column_at(size_t i) const {
    if (i < toks_.size()) return toks_[i].column;
    if (toks_.empty()) return 1;
    return toks_.back().column + toks_.back().text.size();
  }

  [[noreturn]] void fail(Kind kind, size_t i, const std::string& msg) const {
    throw ParseError(kind, column_at(i), msg);
  }

  void arity(size_t expected, const char* usage) const {
    if (toks_.size() != expected)
      fail(Kind::WrongArity, std::min(toks_.size(), expected),
           fmt::format("wrong number of arguments, usage: {}", usage));
  }

  void arity_between(size_t lo, size_t hi, const char* usage) const {
    if (toks_.size() < lo || toks_.size() > hi)
      fail(Kind::WrongArity, std::min(toks_.size(), hi),
           fmt::format("wrong number of arguments, usage: {}", usage));
  }

  void require_kind(std::initializer_list<DeviceKind> kinds, const char* what) const {
    for (auto k : kinds)
      if (k == kind_) return;
    fail(Kind::NotSupported, 0, fmt::format("'{}' is not supported on a {}", what, to_string(kind_)));
  }

  std::string name_at(size_t i) const {
    auto t = toks_[i].text;
    for (char c : t)
      if (c == '/' || c == ',') fail(Kind::MalformedValue, i, fmt::format("malformed name '{}'", t));
    return std::string(t);
  }

  Ipv4 address_at(size_t i) const {
    auto a = Ipv4::parse(toks_[i].text);
    if (!a) fail(Kind::MalformedValue, i, fmt::format("malformed address '{}'", toks_[i].text));
    return *a;
  }

  Prefix prefix_at(size_t i) const {
    auto p = Prefix::parse(toks_[i].text);
    if (!p) fail(Kind::MalformedValue, i, fmt::format("malformed prefix '{}'", toks_[i].text));
    return *p;
  }

  uint32_t number_at(size_t i, uint32_t lo = 0, uint32_t hi = UINT32_MAX) const {
    auto n = text::to_number<uint32_t>(toks_[i].text);
    if (!n || *n < lo || *n > hi)
      fail(Kind::MalformedValue, i,
           fmt::format("expected an integer in [{}, {}], got '{}'", lo, hi, toks_[i].text));
    return *n;
  }

  Action action_at(size_t i) const {
    if (toks_[i].text == "permit") return Action::Permit;
    if (toks_[i].text == "deny") return Action::Deny;
    fail(Kind::MalformedValue, i, fmt::format("expected permit|deny, got '{}'", toks_[i].text));
  }

  Command make(const Context& ctx, Verb verb) const {
    Command c;
    c.context = ctx;
    c.verb = verb;
    return c;
  }


  std::optional<Command> global(const Context& ctx_in) {
    Context ctx;  // global commands always execute at top level
    (void)ctx_in;
    if (toks_.empty()) return std::nullopt;
    auto first = toks_[0].text;
    if (first == "exit" || first == "end") {
      arity(1, first == "exit" ? "exit" : "end");
      return make(ctx, Verb::Exit);
    }
    if (first == "interface") {
      if (toks_.size() < 2) fail(Kind::WrongArity, 1, "usage: interface <name>");
      if (toks_.size() == 2) {
        auto c = make(ctx, Verb::EnterInterface);
        c.name = name_at(1);
        return c;
      }
      if (is(2, "ospf")) {
        require_kind({DeviceKind::Router}, "interface ospf cost");
        if (!is(3, "cost")) fail(Kind::MalformedValue, 3, "usage: interface <name> ospf cost <int>");
        arity(5, "interface <name> ospf cost <int>");
        auto c = make(ctx, Verb::InterfaceOspfCost);
        c.name = name_at(1);
        c.number = number_at(4, 1, 65535);
        return c;
      }
      if (is(2, "access")) {
        require_kind({DeviceKind::Switch}, "interface access vlan");
        if (!is(3, "vlan")) fail(Kind::MalformedValue, 3, "usage: interface <port> access vlan <id>");
        arity(5, "interface <port> access vlan <id>");
        auto c = make(ctx, Verb::AccessVlan);
        c.name = name_at(1);
        c.number = number_at(4, 1, 4094);
        return c;
      }
      if (is(2, "trunk")) {
        require_kind({DeviceKind::Switch}, "interface trunk");
        arity(3, "interface <port> trunk");
        auto c = make(ctx, Verb::Trunk);
        c.name = name_at(1);
        return c;
      }
      fail(Kind::MalformedValue, 2, fmt::format("unexpected '{}' after interface name", toks_[2].text));
    }
    if (first == "router") {
      if (is(1, "ospf")) {
        require_kind({DeviceKind::Router}, "router ospf");
        arity(2, "router ospf");
        return make(ctx, Verb::EnterRouterOspf);
      }
      if (is(1, "bgp")) {
        require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "router bgp");
        arity(3, "router bgp <asn>");
        auto c = make(ctx, Verb::EnterRouterBgp);
        c.number = number_at(2, 1, 65535);
        return c;
      }
      return std::nullopt;
    }
    if (first == "route-map") {
      require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "route-map");
      arity(4, "route-map <name> <permit|deny> <seq>");
      auto c = make(ctx, Verb::EnterRouteMap);
      c.name = name_at(1);
      c.action = action_at(2);
      c.number = number_at(3, 1, 65535);
      return c;
    }
    if (first == "ip" && is(1, "prefix-list")) {
      require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "ip prefix-list");
      arity_between(5, 9, "ip prefix-list <name> <permit|deny> <prefix> [le <len>] [ge <len>]");
      auto c = make(ctx, Verb::PrefixListEntry);
      c.name = name_at(2);
      c.action = action_at(3);
      c.prefix = prefix_at(4);
      size_t i = 5;
      while (i < toks_.size()) {
        if (i + 1 >= toks_.size()) fail(Kind::WrongArity, i + 1, "missing length after le/ge");
        auto len = static_cast<uint8_t>(number_at(i + 1, c.prefix.length(), 32));
        if (toks_[i].text == "le" && !c.le) {
          c.le = len;
        } else if (toks_[i].text == "ge" && !c.ge) {
          c.ge = len;
        } else {
          fail(Kind::MalformedValue, i, fmt::format("unexpected '{}'", toks_[i].text));
        }
        i += 2;
      }
      if (c.ge && c.le && *c.ge > *c.le) fail(Kind::MalformedValue, 5, "ge must not exceed le");
      return c;
    }
    if (first == "ip" && is(1, "route")) {
      require_kind({DeviceKind::Router, DeviceKind::Host}, "ip route");
      arity(5, "ip route <prefix|default> via <addr>");
      if (!is(3, "via")) fail(Kind::MalformedValue, 3, "expected 'via'");
      auto c = make(ctx, Verb::StaticRoute);
      c.prefix = is(2, "default") ? Prefix() : prefix_at(2);
      c.address = address_at(4);
      return c;
    }
    if (first == "bgp" && is(1, "community-list")) {
      require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "bgp community-list");
      arity(5, "bgp community-list <name> permit <asn:tag>");
      if (!is(3, "permit")) fail(Kind::MalformedValue, 3, "community lists only support permit");
      auto c = make(ctx, Verb::CommunityListEntry);
      c.name = name_at(2);
      auto comm = Community::parse(toks_[4].text);
      if (!comm) fail(Kind::MalformedValue, 4, fmt::format("malformed community '{}'", toks_[4].text));
      c.community = *comm;
      return c;
    }
    if (first == "vlan") {
      require_kind({DeviceKind::Switch}, "vlan");
      arity(2, "vlan <id>");
      auto c = make(ctx, Verb::Vlan);
      c.number = number_at(1, 1, 4094);
      return c;
    }
    if (first == "spanning-tree" && is(1, "priority")) {
      require_kind({DeviceKind::Switch}, "spanning-tree priority");
      arity(3, "spanning-tree priority <int>");
      auto c = make(ctx, Verb::StpPriority);
      c.number = number_at(2, 0, 61440);
      return c;
    }
    if (first == "no") {
      if (is(1, "router") && is(2, "ospf")) {
        require_kind({DeviceKind::Router}, "no router ospf");
        arity(3, "no router ospf");
        return make(ctx, Verb::NoRouterOspf);
      }
      if (is(1, "router") && is(2, "bgp")) {
        require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "no router bgp");
        arity_between(3, 4, "no router bgp [<asn>]");
        return make(ctx, Verb::NoRouterBgp);
      }
      if (is(1, "route-map")) {
        require_kind({DeviceKind::Router, DeviceKind::RouteServer}, "no route-map");
        arity(3, "no route-map <name>");
        auto c = make(ctx, Verb::NoRouteMap);
        c.name = name_at(2);
        return c;
      }
      if (is(1, "ip") && is(2, "route")) {
        require_kind({DeviceKind::Router, DeviceKind::Host}, "no ip route");
        arity(6, "no ip route <prefix|default> via <addr>");
        if (!is(4, "via")) fail(Kind::MalformedValue, 4, "expected 'via'");
        auto c = make(ctx, Verb::NoStaticRoute);
        c.prefix = is(3, "default") ? Prefix() : prefix_at(3);
        c.address = address_at(5);
        return c;
      }
    }
    return std::nullopt;
  }

  std::optional<Command> interface_mode(const Context& ctx) {
    if (toks_.empty()) return std::nullopt;
    if (is(0, "ip") && is(1, "address")) {
      require_kind({DeviceKind::Router, DeviceKind::RouteServer, DeviceKind::Host}, "ip address");
      arity(3, "ip address <a.b.c.d>/<len>");
      auto a = InterfaceAddress::parse(toks_[2].text);
      if (!a) fail(Kind::MalformedValue, 2, fmt::format("malformed address '{}'", toks_[2].text));
      auto c = make(ctx, Verb::IpAddress);
      c.interface_address = *a;
      return c;
    }
    if (is(0, "shutdown")) {
      arity(1, "shutdown");
      return make(ctx, Verb::Shutdown);
    }
    if (is(0, "no") && is(1, "shutdown")) {
      arity(2, "no shutdown");
      return make(ctx, Verb::NoShutdown);
    }
    if (is(0, "no") && is(1, "ip") && is(2, "address")) {
      require_kind({DeviceKind::Router, DeviceKind::RouteServer, DeviceKind::Host}, "no ip address");
      arity_between(3, 4, "no ip address [<a.b.c.d>/<len>]");
      return make(ctx, Verb::NoIpAddress);
    }
    return std::nullopt;
  }

  std::optional<Command> ospf_mode(const Context& ctx) {
    size_t base = is(0, "no") ? 1 : 0;
    if (!is(base, "network")) return std::nullopt;
    arity(base + 4, "network <prefix> area 0");
    if (!is(base + 2, "area")) fail(Kind::MalformedValue, base + 2, "expected 'area'");
    if (!is(base + 3, "0") && !is(base + 3, "0.0.0.0"))
      fail(Kind::MalformedValue, base + 3, "only area 0 is supported");
    auto c = make(ctx, base ? Verb::NoOspfNetwork : Verb::OspfNetwork);
    c.prefix = prefix_at(base + 1);
    return c;
  }

  std::optional<Command> bgp_mode(const Context& ctx) {
    if (is(0, "bgp") && is(1, "router-id")) {
      arity(3, "bgp router-id <addr>");
      auto c = make(ctx, Verb::BgpRouterId);
      c.address = address_at(2);
      return c;
    }
    if (is(0, "network")) {
      arity(2, "network <prefix>");
      auto c = make(ctx, Verb::BgpNetwork);
      c.prefix = prefix_at(1);
      return c;
    }
    if (is(0, "no") && is(1, "network")) {
      arity(3, "no network <prefix>");
      auto c = make(ctx, Verb::NoBgpNetwork);
      c.prefix = prefix_at(2);
      return c;
    }
    size_t base = is(0, "no") ? 1 : 0;
    if (!is(base, "neighbor")) return std::nullopt;
    if (toks_.size() < base + 2) fail(Kind::WrongArity, base + 1, "usage: neighbor <addr> ...");
    Command c = make(ctx, Verb::NoNeighbor);
    c.address = address_at(base + 1);
    if (base == 1 && toks_.size() == 3) return c;
    if (base == 0 && is(2, "remote-as")) {
      arity(4, "neighbor <addr> remote-as <asn>");
      c.verb = Verb::NeighborRemoteAs;
      c.number = number_at(3, 1, 65535);
      return c;
    }
    if (is(base + 2, "route-map")) {
      arity(base + 5, "neighbor <addr> route-map <name> <in|out>");
      c.verb = base ? Verb::NoNeighborRouteMap : Verb::NeighborRouteMap;
      c.name = name_at(base + 3);
      if (is(base + 4, "in")) {
        c.inbound = true;
      } else if (!is(base + 4, "out")) {
        fail(Kind::MalformedValue, base + 4, "expected in|out");
      }
      return c;
    }
    if (toks_.size() > base + 2)
      fail(Kind::MalformedValue, base + 2, fmt::format("unexpected '{}'", toks_[base + 2].text));
    fail(Kind::WrongArity, base + 2, "usage: neighbor <addr> remote-as <asn>");
  }

  std::optional<Command> route_map_mode(const Context& ctx) {
    if (is(0, "match") && is(1, "ip")) {
      if (!is(2, "address") || !is(3, "prefix-list"))
        fail(Kind::MalformedValue, 2, "usage: match ip address prefix-list <name>");
      arity(5, "match ip address prefix-list <name>");
      auto c = make(ctx, Verb::MatchPrefixList);
      c.name = name_at(4);
      return c;
    }
    if (is(0, "match") && is(1, "community")) {
      arity(3, "match community <name>");
      auto c = make(ctx, Verb::MatchCommunity);
      c.name = name_at(2);
      return c;
    }
    if (!is(0, "set")) return std::nullopt;
    if (is(1, "local-preference")) {
      arity(3, "set local-preference <int>");
      auto c = make(ctx, Verb::SetLocalPref);
      c.number = number_at(2);
      return c;
    }
    if (is(1, "metric")) {
      arity(3, "set metric <int>");
      auto c = make(ctx, Verb::SetMetric);
      c.number = number_at(2);
      return c;
    }
    if (is(1, "community")) {
      arity(4, "set community <asn:tag> additive");
      if (!is(3, "additive")) fail(Kind::MalformedValue, 3, "expected 'additive'");
      auto comm = Community::parse(toks_[2].text);
      if (!comm) fail(Kind::MalformedValue, 2, fmt::format("malformed community '{}'", toks_[2].text));
      auto c = make(ctx, Verb::SetCommunity);
      c.community = *comm;
      return c;
    }
    if (is(1, "as-path") && is(2, "prepend")) {
      arity(4, "set as-path prepend <count>");
      auto c = make(ctx, Verb::SetPrepend);
      c.number = number_at(3, 1, 16);
      return c;
    }
    fail(Kind::MalformedValue, 1, "unknown set clause");
  }

  DeviceKind kind_;
  std::vector<Token> toks_;
};

}  // namespace

bool is_comment_or_blank(std::string_view line) {
  auto t = text::trim(line);
  return t.empty() || t.front() == '!' || t.front() == '#';
}

Command parse_command_line(DeviceKind kind, std::string_view line, const Context& context) {
  LineParser parser(kind, tokenize(line));
  if (context.mode != Mode::Global) {
    if (auto c = parser.parse_in(context)) return *c;
  }
  if (auto c = parser.parse_in(Context{})) return *c;
  auto toks = tokenize(line);
  throw ParseError(ParseError::Kind::UnknownVerb, toks.empty() ? 1 : toks[0].column,
                   fmt::format("unknown command '{}'", text::trim(line)));
}

Context Command::next_context() const {
  Context next = context;
  switch (verb) {
    case Verb::Exit: return Context{};
    case Verb::EnterInterface:
      next = Context{Mode::Interface, name, {}, 0};
      break;
    case Verb::EnterRouterOspf: next = Context{Mode::RouterOspf, {}, {}, 0}; break;
    case Verb::EnterRouterBgp: next = Context{Mode::RouterBgp, {}, {}, 0}; break;
    case Verb::EnterRouteMap: next = Context{Mode::RouteMapEntry, {}, name, number}; break;
    case Verb::NoRouterBgp:
    case Verb::NoRouterOspf:
    case Verb::NoRouteMap: return Context{};
    default: break;
  }
  return next;
}

namespace {
const char* action_text(Action a) { return a == Action::Permit ? "permit" : "deny"; }
}  // namespace

std::string Command::render() const {
  switch (verb) {
    case Verb::Exit: return "exit";
    case Verb::EnterInterface: return fmt::format("interface {}", name);
    case Verb::IpAddress: return fmt::format("ip address {}", interface_address.str());
    case Verb::NoIpAddress: return "no ip address";
    case Verb::Shutdown: return "shutdown";
    case Verb::NoShutdown: return "no shutdown";
    case Verb::InterfaceOspfCost: return fmt::format("interface {} ospf cost {}", name, number);
    case Verb::EnterRouterOspf: return "router ospf";
    case Verb::NoRouterOspf: return "no router ospf";
    case Verb::OspfNetwork: return fmt::format("network {} area 0", prefix.str());
    case Verb::NoOspfNetwork: return fmt::format("no network {} area 0", prefix.str());
    case Verb::EnterRouterBgp: return fmt::format("router bgp {}", number);
    case Verb::NoRouterBgp: return "no router bgp";
    case Verb::BgpRouterId: return fmt::format("bgp router-id {}", address.str());
    case Verb::NeighborRemoteAs: return fmt::format("neighbor {} remote-as {}", address.str(), number);
    case Verb::NeighborRouteMap:
      return fmt::format("neighbor {} route-map {} {}", address.str(), name, inbound ? "in" : "out");
    case Verb::NoNeighbor: return fmt::format("no neighbor {}", address.str());
    case Verb::NoNeighborRouteMap:
      return fmt::format("no neighbor {} route-map {} {}", address.str(), name, inbound ? "in" : "out");
    case Verb::BgpNetwork: return fmt::format("network {}", prefix.str());
    case Verb::NoBgpNetwork: return fmt::format("no network {}", prefix.str());
    case Verb::EnterRouteMap: return fmt::format("route-map {} {} {}", name, action_text(action), number);
    case Verb::NoRouteMap: return fmt::format("no route-map {}", name);
    case Verb::MatchPrefixList: return fmt::format("match ip address prefix-list {}", name);
    case Verb::MatchCommunity: return fmt::format("match community {}", name);
    case Verb::SetLocalPref: return fmt::format("set local-preference {}", number);
    case Verb::SetMetric: return fmt::format("set metric {}", number);
    case Verb::SetCommunity: return fmt::format("set community {} additive", community.str());
    case Verb::SetPrepend: return fmt::format("set as-path prepend {}", number);
    case Verb::PrefixListEntry: {
      auto s = fmt::format("ip prefix-list {} {} {}", name, action_text(action), prefix.str());
      if (le) s += fmt::format(" le {}", *le);
      if (ge) s += fmt::format(" ge {}", *ge);
      return s;
    }
    case Verb::CommunityListEntry:
      return fmt::format("bgp community-list {} permit {}", name, community.str());
    case Verb::StaticRoute:
    case Verb::NoStaticRoute:
      return fmt::format("{}ip route {} via {}", verb == Verb::NoStaticRoute ? "no " : "",
                         prefix.length() == 0 ? std::string("default") : prefix.str(), address.str());
    case Verb::Vlan: return fmt::format("vlan {}", number);
    case Verb::AccessVlan: return fmt::format("interface {} access vlan {}", name, number);
    case Verb::Trunk: return fmt::format("interface {} trunk", name);
    case Verb::StpPriority: return fmt::format("spanning-tree priority {}", number);
  }
  return {};
}

}  // namespace mnsim::conf
