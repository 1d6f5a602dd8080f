#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "mnsim/text.hpp"
#include "mnsim/topo.hpp"

namespace mnsim::topo {

TopologyError::TopologyError(size_t line, const std::string& message)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

bool role_auto_by_default(Role r) { return r != Role::Transit; }

struct Lines {
  size_t regions = 0;
  std::map<size_t, size_t> ases, links, ixps;  // element index -> line
};

class Parser {
 public:
  TopologySpec parse(std::string_view text) {
    size_t line_no = 0;
    for (const auto& raw : text::lines(text)) {
      ++line_no;
      auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      line_ = line_no;
      statement(text::tokens(line));
    }
    finish();
    return std::move(spec_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw TopologyError(line_, msg); }

  // key=value arguments, rejecting unknown and repeated keys.
  std::map<std::string, std::string> keys(const std::vector<std::string_view>& toks, size_t from,
                                          std::initializer_list<std::string_view> allowed,
                                          std::vector<std::string>* flags = nullptr) const {
    std::map<std::string, std::string> out;
    for (size_t i = from; i < toks.size(); ++i) {
      auto eq = toks[i].find('=');
      if (eq == std::string_view::npos) {
        if (flags) {
          flags->emplace_back(toks[i]);
          continue;
        }
        fail(fmt::format("expected key=value, got '{}'", toks[i]));
      }
      auto key = toks[i].substr(0, eq);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(fmt::format("unknown key '{}'", key));
      if (!out.emplace(std::string(key), std::string(toks[i].substr(eq + 1))).second)
        fail(fmt::format("key '{}' given twice", key));
    }
    return out;
  }

  template <typename T>
  T number(std::string_view s, const char* what) const {
    auto n = text::to_number<T>(s);
    if (!n) fail(fmt::format("malformed {} '{}'", what, s));
    return *n;
  }

  RouterRef router_ref(std::string_view s) const {
    auto dot = s.find('.');
    if (dot == std::string_view::npos) fail(fmt::format("expected <asn>.<router>, got '{}'", s));
    return {number<uint32_t>(s.substr(0, dot), "AS number"), std::string(s.substr(dot + 1))};
  }

  std::vector<std::string_view> list(std::string_view s) const {
    if (s.empty()) return {};
    return text::split(s, ',');
  }

  std::pair<std::string_view, std::string_view> dash_pair(std::string_view s) const {
    auto parts = text::split(s, '-');
    if (parts.size() != 2) fail(fmt::format("expected <a>-<b>, got '{}'", s));
    return {parts[0], parts[1]};
  }

  void statement(const std::vector<std::string_view>& toks) {
    auto kw = toks[0];
    if (kw == "region") {
      if (toks.size() != 2) fail("usage: region <name>");
      spec_.regions.emplace_back(toks[1]);
    } else if (kw == "as") {
      as_line(toks);
    } else if (kw == "link") {
      link_line(toks);
    } else if (kw == "ixp") {
      ixp_line(toks);
    } else if (kw == "l3template") {
      l3_line(toks);
    } else if (kw == "l2template") {
      l2_line(toks);
    } else {
      fail(fmt::format("unknown statement '{}'", kw));
    }
  }

  void as_line(const std::vector<std::string_view>& toks) {
    if (toks.size() < 2) fail("usage: as <asn> role=<role> region=<name> [auto|manual]");
    AsSpec as;
    as.asn = number<uint32_t>(toks[1], "AS number");
    std::vector<std::string> flags;
    auto kv = keys(toks, 2, {"role", "region"}, &flags);
    if (!kv.contains("role") || !kv.contains("region")) fail("as needs role= and region=");
    const auto& role = kv["role"];
    if (role == "tier1") as.role = Role::Tier1;
    else if (role == "transit") as.role = Role::Transit;
    else if (role == "stub") as.role = Role::Stub;
    else fail(fmt::format("unknown role '{}'", role));
    as.region = kv["region"];
    as.auto_configured = role_auto_by_default(as.role);
    for (const auto& f : flags) {
      if (f == "auto") as.auto_configured = true;
      else if (f == "manual") as.auto_configured = false;
      else fail(fmt::format("unknown flag '{}'", f));
    }
    if (flags.size() > 1) fail("at most one of auto|manual");
    lines_.ases[spec_.ases.size()] = line_;
    spec_.ases.push_back(std::move(as));
  }

  void link_line(const std::vector<std::string_view>& toks) {
    if (toks.size() < 4) fail("usage: link <asn>.<router> <asn>.<router> rel=<prov|cust|peer> ...");
    InterAsLink l;
    l.a = router_ref(toks[1]);
    l.b = router_ref(toks[2]);
    auto kv = keys(toks, 3, {"rel", "delay_us", "bw_bps", "state"});
    if (!kv.contains("rel")) fail("link needs rel=");
    const auto& rel = kv["rel"];
    if (rel == "prov") l.rel = Relationship::AProviderOfB;
    else if (rel == "cust") l.rel = Relationship::BProviderOfA;
    else if (rel == "peer") l.rel = Relationship::Peer;
    else fail(fmt::format("unknown relationship '{}'", rel));
    if (kv.contains("delay_us")) l.delay_us = number<uint32_t>(kv["delay_us"], "delay");
    if (kv.contains("bw_bps")) l.bandwidth_bps = number<uint64_t>(kv["bw_bps"], "bandwidth");
    if (kv.contains("state")) {
      if (kv["state"] == "down") l.up = false;
      else if (kv["state"] != "up") fail(fmt::format("unknown state '{}'", kv["state"]));
    }
    lines_.links[spec_.links.size()] = line_;
    spec_.links.push_back(std::move(l));
  }

  void ixp_line(const std::vector<std::string_view>& toks) {
    if (toks.size() < 3) fail("usage: ixp <id> members=<asn>.<router>,...");
    IxpSpec x;
    x.id = number<uint32_t>(toks[1], "IXP id");
    auto kv = keys(toks, 2, {"members", "delay_us"});
    if (!kv.contains("members")) fail("ixp needs members=");
    for (auto m : list(kv["members"])) x.members.push_back(router_ref(m));
    if (kv.contains("delay_us")) x.delay_us = number<uint32_t>(kv["delay_us"], "delay");
    lines_.ixps[spec_.ixps.size()] = line_;
    spec_.ixps.push_back(std::move(x));
  }

  void l3_line(const std::vector<std::string_view>& toks) {
    if (toks.size() < 3) fail("usage: l3template <asn> routers=... links=...");
    auto asn = number<uint32_t>(toks[1], "AS number");
    auto kv = keys(toks, 2, {"routers", "links", "hosts"});
    if (!kv.contains("routers")) fail("l3template needs routers=");
    L3Template t;
    for (auto r : list(kv["routers"])) t.routers.emplace_back(r);
    for (auto l : list(kv["links"])) {
      auto parts = text::split(l, ':');
      if (parts.size() != 3) fail(fmt::format("expected <rA>-<rB>:<cost>:<delay_us>, got '{}'", l));
      auto [a, b] = dash_pair(parts[0]);
      t.links.push_back({std::string(a), std::string(b), number<uint32_t>(parts[1], "cost"),
                         number<uint32_t>(parts[2], "delay")});
    }
    if (kv.contains("hosts")) {
      if (kv["hosts"] == "no") t.hosts = false;
      else if (kv["hosts"] != "yes") fail("hosts= takes yes|no");
    }
    if (!l3_.emplace(asn, std::pair{std::move(t), line_}).second)
      fail(fmt::format("second l3template for AS {}", asn));
  }

  void l2_line(const std::vector<std::string_view>& toks) {
    if (toks.size() < 3) fail("usage: l2template <asn> switches=... | none");
    auto asn = number<uint32_t>(toks[1], "AS number");
    std::optional<L2Template> t;
    if (toks.size() == 3 && toks[2] == "none") {
      if (!l2_.emplace(asn, std::pair{t, line_}).second) fail(fmt::format("second l2template for AS {}", asn));
      return;
    }
    auto kv = keys(toks, 2, {"switches", "links", "hosts", "gateway"});
    if (!kv.contains("switches") || !kv.contains("gateway")) fail("l2template needs switches= and gateway=");
    t.emplace();
    for (auto s : list(kv["switches"])) {
      auto parts = text::split(s, ':');
      if (parts.size() > 2) fail(fmt::format("expected <switch>[:<priority>], got '{}'", s));
      SwitchSpec sw{std::string(parts[0]), 32768};
      if (parts.size() == 2) sw.priority = number<uint32_t>(parts[1], "priority");
      t->switches.push_back(sw);
    }
    for (auto l : list(kv["links"])) {
      auto [a, b] = dash_pair(l);
      t->links.emplace_back(a, b);
    }
    for (auto h : list(kv["hosts"])) {
      auto parts = text::split(h, ':');
      if (parts.size() != 3) fail(fmt::format("expected <switch>:<host>:<vlan>, got '{}'", h));
      t->hosts.push_back({std::string(parts[0]), std::string(parts[1]), number<uint16_t>(parts[2], "vlan")});
    }
    auto gw = text::split(kv["gateway"], ':');
    if (gw.size() != 2) fail("expected gateway=<switch>:<router>");
    t->gateway_switch = gw[0];
    t->gateway_router = gw[1];
    if (!l2_.emplace(asn, std::pair{std::move(t), line_}).second)
      fail(fmt::format("second l2template for AS {}", asn));
  }

  void finish() {
    for (auto& as : spec_.ases) {
      if (auto it = l3_.find(as.asn); it != l3_.end()) {
        as.l3 = it->second.first;
      } else {
        as.l3 = default_l3_template();
      }
      if (auto it = l2_.find(as.asn); it != l2_.end()) {
        as.l2 = it->second.first;
      } else {
        as.l2 = default_l2_template();
      }
    }
    for (const auto& [asn, t] : l3_)
      if (!spec_.find_as(asn)) throw TopologyError(t.second, fmt::format("l3template for unknown AS {}", asn));
    for (const auto& [asn, t] : l2_)
      if (!spec_.find_as(asn)) throw TopologyError(t.second, fmt::format("l2template for unknown AS {}", asn));

    auto violations = validate(spec_);
    if (violations.empty()) return;
    const auto& v = violations.front();
    size_t line = 0;
    using E = Violation::Element;
    if (v.element == E::As) {
      // Template problems point at the template line when there is one.
      auto asn = spec_.ases[v.index].asn;
      line = lines_.ases[v.index];
      bool l3_code = v.code == ViolationCode::EmptyTemplate || v.code == ViolationCode::DuplicateRouter ||
                     v.code == ViolationCode::UnknownRouter || v.code == ViolationCode::DuplicateLink ||
                     v.code == ViolationCode::DisconnectedRouters;
      if (auto it = l3_.find(asn); it != l3_.end() && l3_code) line = it->second.second;
      if (auto it = l2_.find(asn); it != l2_.end() &&
          (v.code == ViolationCode::DuplicateSwitch || v.code == ViolationCode::UnknownSwitch ||
           v.code == ViolationCode::DisconnectedSwitches || v.code == ViolationCode::DuplicateHost ||
           v.code == ViolationCode::BadGateway))
        line = it->second.second;
    } else if (v.element == E::Link) {
      line = lines_.links[v.index];
    } else if (v.element == E::Ixp) {
      line = lines_.ixps[v.index];
    }
    throw TopologyError(line, v.str());
  }

  TopologySpec spec_;
  size_t line_ = 0;
  Lines lines_;
  std::map<uint32_t, std::pair<L3Template, size_t>> l3_;
  std::map<uint32_t, std::pair<std::optional<L2Template>, size_t>> l2_;
};

const char* rel_text(Relationship r) {
  switch (r) {
    case Relationship::AProviderOfB: return "prov";
    case Relationship::BProviderOfA: return "cust";
    case Relationship::Peer: return "peer";
  }
  return "?";
}

}  // namespace

TopologySpec parse_topology_spec(std::string_view text) { return Parser().parse(text); }

std::string render_topology_spec(const TopologySpec& spec) {
  std::string out;
  for (const auto& r : spec.regions) out += fmt::format("region {}\n", r);
  for (const auto& as : spec.ases) {
    out += fmt::format("as {} role={} region={}", as.asn, to_string(as.role), as.region);
    if (as.auto_configured != role_auto_by_default(as.role)) out += as.auto_configured ? " auto" : " manual";
    else if (as.auto_configured) out += " auto";
    out += "\n";
  }
  const auto l3_default = default_l3_template();
  const auto l2_default = default_l2_template();
  for (const auto& as : spec.ases) {
    if (as.l3 != l3_default) {
      std::vector<std::string> links;
      for (const auto& l : as.l3.links) links.push_back(fmt::format("{}-{}:{}:{}", l.a, l.b, l.cost, l.delay_us));
      out += fmt::format("l3template {} routers={} links={}{}\n", as.asn, text::join(as.l3.routers, ","),
                         text::join(links, ","), as.l3.hosts ? "" : " hosts=no");
    }
    if (!as.l2) {
      out += fmt::format("l2template {} none\n", as.asn);
    } else if (*as.l2 != l2_default) {
      const auto& t = *as.l2;
      std::vector<std::string> sw, links, hosts;
      for (const auto& s : t.switches) sw.push_back(fmt::format("{}:{}", s.name, s.priority));
      for (const auto& [a, b] : t.links) links.push_back(fmt::format("{}-{}", a, b));
      for (const auto& h : t.hosts) hosts.push_back(fmt::format("{}:{}:{}", h.sw, h.host, h.vlan));
      out += fmt::format("l2template {} switches={} links={} hosts={} gateway={}:{}\n", as.asn,
                         text::join(sw, ","), text::join(links, ","), text::join(hosts, ","), t.gateway_switch,
                         t.gateway_router);
    }
  }
  for (const auto& l : spec.links) {
    out += fmt::format("link {} {} rel={} delay_us={} bw_bps={}", l.a.str(), l.b.str(), rel_text(l.rel), l.delay_us,
                       l.bandwidth_bps);
    if (!l.up) out += " state=down";
    out += "\n";
  }
  for (const auto& x : spec.ixps) {
    std::vector<std::string> members;
    for (const auto& m : x.members) members.push_back(m.str());
    out += fmt::format("ixp {} members={} delay_us={}\n", x.id, text::join(members, ","), x.delay_us);
  }
  return out;
}

}  // namespace mnsim::topo
