#include "mnsim/grader.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "mnsim/text.hpp"

namespace mnsim::grade {

namespace {

constexpr std::pair<CheckKind, const char*> kKinds[] = {
    {CheckKind::Addressing, "Addressing"},     {CheckKind::L2Isolation, "L2Isolation"},
    {CheckKind::StpPattern, "StpPattern"},     {CheckKind::IntraReach, "IntraReach"},
    {CheckKind::Ecmp, "Ecmp"},                 {CheckKind::SessionsUp, "SessionsUp"},
    {CheckKind::PolicyLocalPref, "PolicyLocalPref"}, {CheckKind::PolicyExport, "PolicyExport"},
    {CheckKind::HijackReport, "HijackReport"},
};

}  // namespace

std::optional<CheckKind> parse_kind(std::string_view name) {
  for (auto [k, n] : kKinds)
    if (name == n) return k;
  return std::nullopt;
}

const char* to_string(CheckKind kind) {
  for (auto [k, n] : kKinds)
    if (k == kind) return n;
  return "?";
}

RubricError::RubricError(size_t line, const std::string& message)
    : std::runtime_error(fmt::format("rubric line {}: {}", line, message)), line_(line) {}

Rubric parse_rubric(std::string_view text) {
  Rubric r;
  std::set<std::string> ids;
  auto all = text::lines(text);
  for (size_t n = 0; n < all.size(); ++n) {
    auto line = text::trim(all[n]);
    if (line.empty() || line.front() == '#') continue;
    auto tok = text::tokens(line);
    if (tok[0] != "check") throw RubricError(n + 1, fmt::format("expected 'check', found '{}'", tok[0]));
    if (tok.size() < 3) throw RubricError(n + 1, "expected 'check <id> <kind>'");
    Check c;
    c.id = std::string(tok[1]);
    auto kind = parse_kind(tok[2]);
    if (!kind) throw RubricError(n + 1, fmt::format("unknown check kind '{}'", tok[2]));
    c.kind = *kind;
    for (size_t i = 3; i < tok.size(); ++i) {
      auto eq = tok[i].find('=');
      if (eq == std::string_view::npos || eq == 0) throw RubricError(n + 1, fmt::format("expected key=value, found '{}'", tok[i]));
      auto key = std::string(tok[i].substr(0, eq));
      auto value = std::string(tok[i].substr(eq + 1));
      if (key == "weight") {
        auto w = text::to_number<double>(value);
        if (!w || *w < 0) throw RubricError(n + 1, fmt::format("bad weight '{}'", value));
        c.weight = *w;
      } else {
        c.params[key] = value;
      }
    }
    if (!ids.insert(c.id).second) throw RubricError(n + 1, fmt::format("duplicate check id '{}'", c.id));
    r.checks.push_back(std::move(c));
  }
  return r;
}

std::string render_rubric(const Rubric& rubric) {
  std::string out;
  for (const auto& c : rubric.checks) {
    out += fmt::format("check {} {} weight={}", c.id, to_string(c.kind), c.weight);
    for (const auto& [k, v] : c.params) out += fmt::format(" {}={}", k, v);
    out += '\n';
  }
  return out;
}

const char* default_rubric_text() {
  return R"(# Default rubric for ASes built from the standard templates.
check addressing Addressing weight=10
check l2-isolation L2Isolation weight=10
check intra-reach IntraReach weight=20
check ecmp Ecmp weight=10 src=ROUTER1 dst=ROUTER8
check sessions SessionsUp weight=15
check local-pref PolicyLocalPref weight=15 customer=300 peer=200 provider=100
check export PolicyExport weight=20
)";
}

Rubric default_rubric() { return parse_rubric(default_rubric_text()); }

bool GradeReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string GradeReport::to_json() const {
  using nlohmann::json;
  json list = json::array();
  for (const auto& c : checks) {
    json e;
    e["id"] = c.id;
    e["kind"] = to_string(c.kind);
    e["weight"] = c.weight;
    e["pass"] = c.pass;
    e["evidence"] = c.evidence;
    e["skipped"] = c.skipped;
    list.push_back(std::move(e));
  }
  json j;
  j["asn"] = asn;
  j["checks"] = std::move(list);
  j["score"] = score;
  j["max_score"] = max_score;
  return j.dump(2);
}

std::string GradeReport::to_text() const {
  std::string out = fmt::format("grade report for AS {}\n", asn);
  for (const auto& c : checks) {
    out += fmt::format("  [{}] {} ({}, weight {})\n", c.pass ? "PASS" : "FAIL", c.id, to_string(c.kind), c.weight);
    for (const auto& e : c.evidence) out += fmt::format("        {}\n", e);
    for (const auto& s : c.skipped) out += fmt::format("        skipped: {}\n", s);
  }
  out += fmt::format("score {}/{}\n", score, max_score);
  return out;
}

namespace {

class Grader {
 public:
  Grader(const Network& net, uint32_t asn) : net_(net), asn_(asn), d_(derived(net)) {
    as_ = net.spec().find_as(asn);
    if (!as_) throw std::out_of_range(fmt::format("unknown AS {}", asn));
  }

  CheckResult run(const Check& c) {
    CheckResult r{c.id, c.kind, c.weight, false, {}, {}};
    switch (c.kind) {
      case CheckKind::Addressing: addressing(r); break;
      case CheckKind::L2Isolation: l2_isolation(r); break;
      case CheckKind::StpPattern: stp_pattern(c, r); break;
      case CheckKind::IntraReach: intra_reach(r); break;
      case CheckKind::Ecmp: ecmp(c, r); break;
      case CheckKind::SessionsUp: sessions_up(r); break;
      case CheckKind::PolicyLocalPref: local_pref(c, r); break;
      case CheckKind::PolicyExport: policy_export(r); break;
      case CheckKind::HijackReport: hijack_report(c, r); break;
    }
    if (r.evidence.empty() && !failed_) r.pass = true;
    failed_ = false;
    return r;
  }

 private:
  std::string label(DeviceId id) const { return net_.device(id).name; }

  void fail(CheckResult& r, std::string why) {
    failed_ = true;
    r.evidence.push_back(std::move(why));
  }

  static std::string param(const Check& c, const std::string& key) {
    auto it = c.params.find(key);
    if (it == c.params.end()) throw std::invalid_argument(fmt::format("check {} needs {}=", c.id, key));
    return it->second;
  }

  void addressing(CheckResult& r) {
    for (const auto& [name, script] : generate_reference_config(net_, asn_, ConfigPhase::Intra)) {
      auto id = net_.id(asn_, name);
      auto expected = conf::parse_config(net_.device(id).kind, script);
      const auto& actual = net_.device(id).config.interfaces;
      for (const auto& [ifname, ifc] : expected.interfaces) {
        if (!ifc.address) continue;
        auto it = actual.find(ifname);
        std::string found = it == actual.end() || !it->second.address ? "none" : it->second.address->str();
        if (found != ifc.address->str())
          fail(r, fmt::format("{} {}: expected {}, found {}", name, ifname, ifc.address->str(), found));
      }
    }
  }

  struct L2Member {
    l2::Endpoint endpoint;
    uint16_t vlan;
  };

  std::vector<L2Member> l2_members() const {
    std::vector<L2Member> out;
    if (!as_->l2) return out;
    for (const auto& h : as_->l2->hosts) out.push_back({{net_.id(asn_, h.host), "eth0"}, h.vlan});
    auto gw = net_.id(asn_, as_->l2->gateway_router);
    for (auto v : as_->l2->vlans()) out.push_back({{gw, fmt::format("l2.{}", v)}, v});
    return out;
  }

  void l2_isolation(CheckResult& r) {
    if (!as_->l2) {
      r.skipped.push_back("AS has no switched network");
      return;
    }
    const auto& dom = d_.l2.at(asn_);
    auto members = l2_members();
    for (size_t i = 0; i < members.size(); ++i) {
      for (size_t j = i + 1; j < members.size(); ++j) {
        const auto& a = members[i];
        const auto& b = members[j];
        bool want = a.vlan == b.vlan;
        auto got = l2::l2_reach(net_, dom, a.endpoint, b.endpoint);
        if (bool(got) == want) continue;
        fail(r, fmt::format("{} {} (vlan {}) -> {} {} (vlan {}): {}", label(a.endpoint.device), a.endpoint.interface,
                            a.vlan, label(b.endpoint.device), b.endpoint.interface, b.vlan,
                            want ? fmt::format("not reachable ({})", l2::to_string(got.reason)) : "reachable"));
      }
    }
  }

  void stp_pattern(const Check& c, CheckResult& r) {
    std::set<std::pair<std::string, std::string>> expected;
    const auto edges = param(c, "edges");
    for (auto e : text::split(edges, ',')) {
      auto ends = text::split(e, '-');
      if (ends.size() != 2) throw std::invalid_argument(fmt::format("bad edge '{}'", e));
      expected.insert(std::minmax(std::string(ends[0]), std::string(ends[1])));
    }
    auto it = d_.l2.find(asn_);
    if (it == d_.l2.end() || it->second.switches.empty()) {
      fail(r, "no switches");
      return;
    }
    const auto& dom = it->second;
    std::set<std::pair<std::string, std::string>> actual;
    for (auto e : dom.tree.active_edges())
      actual.insert(std::minmax(label(dom.switches[dom.graph.edges[e].a]), label(dom.switches[dom.graph.edges[e].b])));
    for (const auto& e : expected)
      if (!actual.contains(e)) fail(r, fmt::format("edge {}-{} is not forwarding", e.first, e.second));
    for (const auto& e : actual)
      if (!expected.contains(e)) fail(r, fmt::format("edge {}-{} should be blocked", e.first, e.second));
    if (auto root = c.params.find("root"); root != c.params.end()) {
      for (size_t v = 0; v < dom.switches.size(); ++v)
        if (dom.tree.root_cost[v] == 0 && label(dom.switches[v]) != root->second)
          fail(r, fmt::format("root is {}, expected {}", label(dom.switches[v]), root->second));
    }
  }

  void intra_reach(CheckResult& r) {
    std::vector<std::pair<DeviceId, Ipv4>> hosts;
    for (auto id : net_.devices_in(asn_)) {
      if (net_.device(id).kind != DeviceKind::Host) continue;
      auto addr = planned_host_address(id);
      if (addr) hosts.push_back({id, *addr});
    }
    for (const auto& [src, _] : hosts) {
      for (const auto& [dst, addr] : hosts) {
        if (src == dst) continue;
        auto p = dp::ping(net_, src, addr);
        if (!p.success)
          fail(r, fmt::format("{} -> {} ({}): {}", label(src), label(dst), addr.str(), dp::to_string(p.reason)));
      }
    }
  }

  std::optional<Ipv4> planned_host_address(DeviceId id) const {
    auto scripts = generate_reference_config(net_, asn_, ConfigPhase::Intra);
    auto it = scripts.find(net_.device(id).name);
    if (it == scripts.end()) return std::nullopt;
    auto cfg = conf::parse_config(DeviceKind::Host, it->second);
    return cfg.interfaces.at("eth0").address->address;
  }

  void ecmp(const Check& c, CheckResult& r) {
    auto src = net_.find(asn_, param(c, "src"));
    auto dst_name = param(c, "dst");
    auto minimum = text::to_number<size_t>(c.params.contains("min") ? c.params.at("min") : "2").value_or(2);
    const auto& loopbacks = net_.plan().ases.at(asn_).loopbacks;
    if (!src || !loopbacks.contains(dst_name)) {
      fail(r, fmt::format("unknown router {} or {}", param(c, "src"), dst_name));
      return;
    }
    Prefix target(loopbacks.at(dst_name), 32);
    const auto& table = d_.igp_tables[*src];
    auto it = table.find(target);
    size_t got = it == table.end() ? 0 : it->second.next_hops.size();
    if (got < minimum)
      fail(r, fmt::format("{} has {} next hop(s) toward {} ({}), expected at least {}", param(c, "src"), got, dst_name,
                          target.str(), minimum));
  }

  bool established(DeviceId a, DeviceId b) const {
    return std::any_of(d_.bgp.sessions.begin(), d_.bgp.sessions.end(), [&](const bgp::BgpSession& s) {
      return s.state == bgp::SessionState::Established && s.remote &&
             ((s.local == a && *s.remote == b) || (s.local == b && *s.remote == a));
    });
  }

  void expect_session(CheckResult& r, DeviceId a, DeviceId b, bool remote_is_other_as) {
    if (established(a, b)) return;
    const auto& remote = net_.device(b);
    if (remote_is_other_as && (!remote.config.bgp || remote.failed)) {
      r.skipped.push_back(fmt::format("{} <-> {}: remote side not configured", label(a), remote.label()));
      return;
    }
    fail(r, fmt::format("session {} <-> {} is not established", label(a), remote.label()));
  }

  void sessions_up(CheckResult& r) {
    const auto& routers = as_->l3.routers;
    for (size_t i = 0; i < routers.size(); ++i)
      for (size_t j = i + 1; j < routers.size(); ++j)
        expect_session(r, net_.id(asn_, routers[i]), net_.id(asn_, routers[j]), false);
    for (const auto& l : net_.spec().links) {
      if (l.a.asn != asn_ && l.b.asn != asn_) continue;
      const auto& self = l.a.asn == asn_ ? l.a : l.b;
      const auto& other = l.a.asn == asn_ ? l.b : l.a;
      expect_session(r, net_.id(self.asn, self.router), net_.id(other.asn, other.router), true);
    }
    for (const auto& x : net_.spec().ixps)
      for (const auto& m : x.members)
        if (m.asn == asn_) expect_session(r, net_.id(m.asn, m.router), net_.id(x.id, kRouteServerName), true);
  }

  // Relationship of the AS behind an eBGP peer; IXP route servers count as peers.
  std::optional<topo::Peering> peering(uint32_t remote_as) const {
    if (net_.is_ixp(remote_as)) return topo::Peering::Peer;
    return topo::relationship(net_.spec(), asn_, remote_as);
  }

  void local_pref(const Check& c, CheckResult& r) {
    auto value = [&](const char* key, uint32_t dflt) {
      auto it = c.params.find(key);
      return it == c.params.end() ? dflt : text::to_number<uint32_t>(it->second).value_or(dflt);
    };
    const std::map<topo::Peering, uint32_t> expected{{topo::Peering::Customer, value("customer", 300)},
                                                     {topo::Peering::Peer, value("peer", 200)},
                                                     {topo::Peering::Provider, value("provider", 100)}};
    size_t checked = 0;
    for (const auto& s : d_.bgp.speakers) {
      if (s.asn != asn_ || net_.device(s.device).asn != asn_) continue;
      for (size_t p = 0; p < s.peers.size(); ++p) {
        const auto& peer = s.peers[p];
        if (peer.kind != bgp::SessionKind::Ebgp) continue;
        auto rel = peering(peer.remote_as);
        if (!rel) continue;
        for (const auto& [prefix, route] : s.adj_in_post[p]) {
          ++checked;
          if (route.local_pref == expected.at(*rel)) continue;
          fail(r, fmt::format("{} from {} ({} AS {}): {} local-preference {}, expected {}", label(s.device),
                              peer.remote_address.str(), topo::to_string(*rel), peer.remote_as, prefix.str(),
                              route.local_pref, expected.at(*rel)));
        }
      }
    }
    if (checked == 0) r.skipped.push_back("no eBGP routes received");
  }

  void policy_export(CheckResult& r) {
    for (const auto& s : d_.bgp.speakers) {
      if (s.asn != asn_ || net_.device(s.device).asn != asn_) continue;
      for (const auto& peer : s.peers) {
        if (peer.kind != bgp::SessionKind::Ebgp) continue;
        auto rel = peering(peer.remote_as);
        if (!rel || *rel == topo::Peering::Customer) continue;
        // What the neighbor received from us on this session.
        const auto& remote = d_.bgp.speakers[peer.remote_speaker];
        for (size_t q = 0; q < remote.peers.size(); ++q) {
          if (remote.peers[q].remote_address != peer.local_address) continue;
          for (const auto& [prefix, route] : remote.adj_in_pre[q]) {
            auto it = std::find_if(route.as_path.begin(), route.as_path.end(), [&](uint32_t a) { return a != asn_; });
            if (it == route.as_path.end()) continue;  // our own prefix
            auto learned_from = peering(*it);
            if (learned_from == topo::Peering::Customer) continue;
            fail(r, fmt::format("{} exports {} (path {}) learned from {} AS {} to {} AS {}", label(s.device), prefix.str(),
                                bgp::render_as_path(route.as_path),
                                learned_from ? topo::to_string(*learned_from) : "non-neighbor", *it,
                                topo::to_string(*rel), peer.remote_as));
          }
        }
      }
    }
  }

  void hijack_report(const Check& c, CheckResult& r) {
    auto attacker = text::to_number<uint32_t>(param(c, "attacker"));
    auto prefix = Prefix::parse(param(c, "prefix"));
    if (!attacker || !prefix) {
      fail(r, "malformed report");
      return;
    }
    for (const auto& h : net_.hijacks()) {
      if (h.attacker != *attacker) continue;
      if (h.victim_prefix == *prefix || std::find(h.announced.begin(), h.announced.end(), *prefix) != h.announced.end())
        return;
    }
    fail(r, fmt::format("no hijack of {} by AS {}", prefix->str(), *attacker));
  }

  const Network& net_;
  uint32_t asn_;
  const Derived& d_;
  const topo::AsSpec* as_ = nullptr;
  bool failed_ = false;
};

}  // namespace

CheckResult run_check(const Network& net, uint32_t asn, const Check& check) { return Grader(net, asn).run(check); }

GradeReport run_rubric(const Network& net, uint32_t asn, const Rubric& rubric) {
  GradeReport report;
  report.asn = asn;
  Grader g(net, asn);
  for (const auto& c : rubric.checks) {
    auto result = g.run(c);
    report.max_score += c.weight;
    if (result.pass) report.score += c.weight;
    report.checks.push_back(std::move(result));
  }
  return report;
}

std::vector<mon::AsPath> check_valley_free(const Network& net) {
  std::vector<mon::AsPath> out;
  for (auto a : net.asns())
    for (auto b : net.asns()) {
      if (a == b) continue;
      auto p = mon::as_path_between(net, a, b);
      if (!p.valley_free) out.push_back(std::move(p));
    }
  return out;
}

}  // namespace mnsim::grade
