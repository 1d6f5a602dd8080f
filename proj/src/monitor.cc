#include "mnsim/monitor.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace mnsim::mon {

using nlohmann::json;

std::optional<size_t> ConnectivityMatrix::index_of(uint32_t asn) const {
  auto it = std::find(asns.begin(), asns.end(), asn);
  if (it == asns.end()) return std::nullopt;
  return static_cast<size_t>(it - asns.begin());
}

std::string ConnectivityMatrix::to_json() const {
  json cells_json = json::array();
  for (const auto& row : cells) {
    json r = json::array();
    for (const auto& c : row) r.push_back(c.green ? "g" : "r");
    cells_json.push_back(std::move(r));
  }
  json j;
  j["asns"] = asns;
  j["cells"] = std::move(cells_json);
  j["round"] = round;
  return j.dump();
}

std::optional<Ipv4> probe_address(const Network& net, uint32_t asn, bool diagonal) {
  const auto* as = net.spec().find_as(asn);
  if (!as || !as->l3.hosts || as->l3.routers.empty()) return std::nullopt;
  const auto& router = diagonal ? as->l3.routers.back() : as->l3.routers.front();
  return Ipv4(net.plan().ases.at(asn).host_lans.at(router).network().value() + 1);
}

ConnectivityMatrix connectivity_matrix(const Network& net) {
  ConnectivityMatrix m;
  m.asns = net.asns();
  m.round = net.epoch();
  const auto n = m.asns.size();
  m.cells.assign(n, std::vector<MatrixCell>(n));
  for (size_t i = 0; i < n; ++i) {
    auto src = net.probe_host(m.asns[i]);
    for (size_t j = 0; j < n; ++j) {
      auto dst = probe_address(net, m.asns[j], i == j);
      if (!src || !dst) continue;
      auto t = dp::trace(net, *src, *dst);
      m.cells[i][j] = {t.outcome == dp::Outcome::Delivered, t.outcome};
    }
  }
  return m;
}

std::string render_matrix(const ConnectivityMatrix& m) {
  std::string out = fmt::format("connectivity matrix, round {}\n     ", m.round);
  for (auto a : m.asns) out += fmt::format("{:>4}", a);
  out += '\n';
  for (size_t i = 0; i < m.asns.size(); ++i) {
    out += fmt::format("{:>4} ", m.asns[i]);
    for (size_t j = 0; j < m.asns.size(); ++j) out += fmt::format("{:>4}", m.green(i, j) ? "#" : ".");
    out += '\n';
  }
  return out;
}

const char* to_string(FindingCode code) {
  switch (code) {
    case FindingCode::IntraDomainFault: return "IntraDomainFault";
    case FindingCode::MissingEbgp: return "MissingEbgp";
    case FindingCode::PolicyAsymmetry: return "PolicyAsymmetry";
  }
  return "?";
}

Diagnosis diagnose(const ConnectivityMatrix& m) {
  Diagnosis d;
  const auto n = m.asns.size();
  std::vector<bool> intra(n, false), missing(n, false);
  for (size_t i = 0; i < n; ++i) {
    if (m.green(i, i)) continue;
    intra[i] = true;
    d.findings.push_back({m.asns[i], FindingCode::IntraDomainFault, std::nullopt, {{m.asns[i], m.asns[i]}}});
  }
  for (size_t j = 0; j < n && n > 1; ++j) {
    Finding f{m.asns[j], FindingCode::MissingEbgp, std::nullopt, {}};
    bool all_red = true;
    for (size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (m.green(i, j)) all_red = false;
      else f.evidence.push_back({m.asns[i], m.asns[j]});
    }
    if (!all_red) continue;
    missing[j] = true;
    d.findings.push_back(std::move(f));
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j || !m.green(i, j) || m.green(j, i)) continue;
      if (missing[i] || intra[i] || intra[j]) continue;
      d.findings.push_back({m.asns[i], FindingCode::PolicyAsymmetry, m.asns[j], {{m.asns[j], m.asns[i]}}});
    }
  }
  return d;
}

std::string Diagnosis::to_json() const {
  json list = json::array();
  for (const auto& f : findings) {
    json e;
    e["asn"] = f.asn;
    e["code"] = to_string(f.code);
    json cells = json::array();
    for (auto [a, b] : f.evidence) cells.push_back({a, b});
    e["evidence"] = std::move(cells);
    if (f.other) e["other"] = *f.other;
    list.push_back(std::move(e));
  }
  json j;
  j["findings"] = std::move(list);
  return j.dump();
}

std::optional<View> parse_view(std::string_view name) {
  if (name == "route") return View::Route;
  if (name == "bgp") return View::Bgp;
  if (name == "ospf") return View::Ospf;
  if (name == "spanning-tree") return View::SpanningTree;
  if (name == "running-config") return View::RunningConfig;
  return std::nullopt;
}

const char* to_string(View view) {
  switch (view) {
    case View::Route: return "route";
    case View::Bgp: return "bgp";
    case View::Ospf: return "ospf";
    case View::SpanningTree: return "spanning-tree";
    case View::RunningConfig: return "running-config";
  }
  return "?";
}

namespace {

std::string origin_code(bgp::Origin o) { return o == bgp::Origin::Igp ? "i" : "?"; }

std::string bgp_view(const Network& net, DeviceId id) {
  const auto& dev = net.device(id);
  std::string out = fmt::format("BGP table of {}\n", dev.label());
  const auto* speaker = derived(net).bgp.speaker(id);
  if (!speaker) return out;
  out += fmt::format("local AS {}, router-id {}\n", speaker->asn, speaker->router_id.str());
  out += fmt::format("   {:<18} {:<16} {:>6} {:>6}  {:<24} {}\n", "Network", "Next Hop", "LP", "MED", "Path", "Origin");
  std::set<Prefix> prefixes;
  for (const auto& [p, r] : speaker->originated) prefixes.insert(p);
  for (const auto& rib : speaker->adj_in_post)
    for (const auto& [p, r] : rib) prefixes.insert(p);
  for (const auto& p : prefixes) {
    auto best = speaker->loc_rib.find(p);
    for (const auto& r : speaker->candidates(p)) {
      bool is_best = best != speaker->loc_rib.end() && best->second == r;
      out += fmt::format("{:<2} {:<18} {:<16} {:>6} {:>6}  {:<24} {}\n", is_best ? ">" : "", p.str(),
                         r.next_hop.str(), r.local_pref, r.med, bgp::render_as_path(r.as_path), origin_code(r.origin));
    }
  }
  return out;
}

std::string route_view(const Network& net, DeviceId id) {
  std::string out = fmt::format("Routing table of {}\n", net.device(id).label());
  for (const auto* e : derived(net).fibs[id].entries()) {
    for (const auto& nh : e->next_hops)
      out += fmt::format("{} {} [{}/{}] via {}, {}\n", dp::source_code(e->source), e->prefix.str(), e->distance,
                         e->metric, nh.gateway.str(), nh.interface);
  }
  return out;
}

std::string ospf_view(const Network& net, DeviceId id) {
  std::string out = fmt::format("OSPF routes of {}\n", net.device(id).label());
  for (const auto& [prefix, route] : derived(net).igp_tables[id])
    for (const auto& nh : route.next_hops)
      out += fmt::format("O {} [{}/{}] via {}, {}\n", prefix.str(), dp::admin_distance(dp::RouteSource::Ospf),
                         route.cost, nh.gateway.str(), nh.interface);
  return out;
}

}  // namespace

std::string looking_glass(const Network& net, uint32_t asn, const std::string& device, View view) {
  auto id = net.id(asn, device);
  const auto& dev = net.device(id);
  switch (view) {
    case View::Bgp: return bgp_view(net, id);
    case View::Route: return route_view(net, id);
    case View::Ospf: return ospf_view(net, id);
    case View::SpanningTree: {
      const auto& l2 = derived(net).l2;
      auto it = l2.find(dev.asn);
      if (it == l2.end()) return fmt::format("spanning-tree AS {}\n", dev.asn);
      return l2::render_spanning_tree(net, it->second);
    }
    case View::RunningConfig: return conf::render_running_config(dev.kind, dev.label(), dev.config);
  }
  return {};
}

bool is_valley_free(const std::vector<std::string>& labels) {
  bool climbing = true;
  for (const auto& l : labels) {
    if (l == "customer->provider") {
      if (!climbing) return false;
    } else if (l == "peer" || l == "ixp") {
      if (!climbing) return false;
      climbing = false;
    } else {
      climbing = false;
    }
  }
  return true;
}

AsPath as_path_of_trace(const Network& net, const dp::ForwardingTrace& t, uint32_t dst) {
  AsPath p;
  p.dst = dst;
  p.outcome = t.outcome;
  if (t.hops.empty()) return p;
  p.src = net.device(t.hops.front().device).asn;
  p.asns.push_back(p.src);
  for (size_t k = 1; k < t.hops.size(); ++k) {
    auto from = net.device(t.hops[k - 1].device).asn;
    auto to = net.device(t.hops[k].device).asn;
    if (from == to) continue;
    auto seg = net.segment_at(t.hops[k - 1].device, physical_port(t.hops[k - 1].egress));
    std::string label = "peer";
    if (seg && net.segments()[*seg].kind == SegmentKind::Ixp) {
      label = "ixp";
    } else if (auto rel = topo::relationship(net.spec(), from, to)) {
      if (*rel == topo::Peering::Customer) label = "provider->customer";
      else if (*rel == topo::Peering::Provider) label = "customer->provider";
    }
    p.asns.push_back(to);
    p.labels.push_back(std::move(label));
  }
  p.diverted = p.asns.back() != dst;
  if (t.outcome != dp::Outcome::Delivered && !p.diverted) {
    p.asns.clear();
    p.labels.clear();
  }
  p.valley_free = is_valley_free(p.labels);
  return p;
}

AsPath as_path_between(const Network& net, uint32_t src, uint32_t dst) {
  AsPath empty;
  empty.src = src;
  empty.dst = dst;
  auto host = net.probe_host(src);
  auto addr = probe_address(net, dst, src == dst);
  if (!host || !addr) return empty;
  auto p = as_path_of_trace(net, dp::trace(net, *host, *addr), dst);
  p.src = src;
  return p;
}

std::string AsPath::to_json() const {
  json j;
  j["src"] = src;
  j["dst"] = dst;
  j["asns"] = asns;
  j["labels"] = labels;
  j["valley_free"] = valley_free;
  j["diverted"] = diverted;
  j["outcome"] = dp::to_string(outcome);
  return j.dump();
}

}  // namespace mnsim::mon
