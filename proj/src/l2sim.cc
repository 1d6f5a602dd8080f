#include "mnsim/l2sim.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include <fmt/format.h>

namespace mnsim::l2 {

const char* to_string(PortRole role) {
  switch (role) {
    case PortRole::Root: return "root";
    case PortRole::Designated: return "designated";
    case PortRole::Blocked: return "blocked";
  }
  return "?";
}

const char* to_string(NotReachable reason) {
  switch (reason) {
    case NotReachable::VlanIsolation: return "VlanIsolation";
    case NotReachable::NoVlan: return "NoVlan";
    case NotReachable::NotAttached: return "NotAttached";
    case NotReachable::PortDown: return "PortDown";
    case NotReachable::Disconnected: return "Disconnected";
  }
  return "?";
}

std::vector<size_t> SpanningTree::active_edges() const {
  std::vector<size_t> out;
  for (size_t e = 0; e < active.size(); ++e)
    if (active[e]) out.push_back(e);
  return out;
}

namespace {

constexpr uint32_t kUnreached = UINT32_MAX;

SpanningTree elect(const SwitchGraph& g, bool forest) {
  const size_t n = g.bridges.size();
  if (n == 0) throw std::invalid_argument("spanning tree of an empty switch graph");
  std::vector<std::vector<size_t>> incident(n);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    incident[g.edges[e].a].push_back(e);
    incident[g.edges[e].b].push_back(e);
  }
  auto other = [&](size_t e, size_t s) { return g.edges[e].a == s ? g.edges[e].b : g.edges[e].a; };
  auto port_at = [&](size_t e, size_t s) { return g.edges[e].a == s ? g.edges[e].port_a : g.edges[e].port_b; };

  SpanningTree t;
  t.active.assign(g.edges.size(), false);
  t.role_a.assign(g.edges.size(), PortRole::Blocked);
  t.role_b.assign(g.edges.size(), PortRole::Blocked);
  t.root_cost.assign(n, kUnreached);
  t.root_edge.assign(n, std::nullopt);
  std::vector<size_t> component_root(n, n);

  bool first = true;
  while (true) {
    // Lowest bridge id among the switches not yet placed.
    size_t root = n;
    for (size_t s = 0; s < n; ++s)
      if (t.root_cost[s] == kUnreached && (root == n || g.bridges[s] < g.bridges[root])) root = s;
    if (root == n) break;
    if (!first && !forest) throw std::invalid_argument("switch graph is not connected");
    if (first) t.root = root;
    first = false;

    std::deque<size_t> queue{root};
    std::vector<size_t> members;
    t.root_cost[root] = 0;
    while (!queue.empty()) {
      auto s = queue.front();
      queue.pop_front();
      members.push_back(s);
      component_root[s] = root;
      for (auto e : incident[s]) {
        auto u = other(e, s);
        if (t.root_cost[u] == kUnreached) {
          t.root_cost[u] = t.root_cost[s] + 1;
          queue.push_back(u);
        }
      }
    }
    for (auto s : members) {
      if (s == root) continue;
      std::optional<size_t> best;
      auto key = [&](size_t e) {
        auto u = other(e, s);
        return std::tuple{t.root_cost[u] + 1, g.bridges[u], port_at(e, u), port_at(e, s)};
      };
      for (auto e : incident[s])
        if (!best || key(e) < key(*best)) best = e;
      t.root_edge[s] = best;
      t.active[*best] = true;
    }
  }

  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (t.active[e]) {
      bool a_is_child = t.root_edge[edge.a] == e;
      t.role_a[e] = a_is_child ? PortRole::Root : PortRole::Designated;
      t.role_b[e] = a_is_child ? PortRole::Designated : PortRole::Root;
      continue;
    }
    auto vec = [&](size_t s, uint32_t port) { return std::tuple{t.root_cost[s], g.bridges[s], port}; };
    bool a_designated = vec(edge.a, edge.port_a) < vec(edge.b, edge.port_b);
    t.role_a[e] = a_designated ? PortRole::Designated : PortRole::Blocked;
    t.role_b[e] = a_designated ? PortRole::Blocked : PortRole::Designated;
  }
  return t;
}

struct Attach {
  size_t vertex;           // switch vertex in the domain
  std::string switch_port;
  size_t segment;
};

std::optional<Attach> attachment(const Network& net, const L2Domain& d, DeviceId device, std::string_view port) {
  auto seg = net.segment_at(device, port);
  if (!seg || net.segments()[*seg].kind != SegmentKind::L2) return std::nullopt;
  for (const auto& end : net.segments()[*seg].ends) {
    if (end.device == device) continue;
    auto it = std::find(d.switches.begin(), d.switches.end(), end.device);
    if (it == d.switches.end()) return std::nullopt;
    return Attach{static_cast<size_t>(it - d.switches.begin()), end.port, *seg};
  }
  return std::nullopt;
}

bool port_carries(const conf::DeviceConfig& sw, const std::string& port, uint16_t vlan) {
  if (!sw.vlans.contains(vlan)) return false;
  auto it = sw.interfaces.find(port);
  if (it == sw.interfaces.end() || it->second.shutdown) return false;
  return it->second.trunk || it->second.access_vlan == vlan;
}

bool endpoint_port_usable(const Network& net, const Endpoint& e) {
  const auto& dev = net.device(e.device);
  if (dev.failed) return false;
  for (const auto& name : {e.interface, std::string(physical_port(e.interface))}) {
    auto it = dev.config.interfaces.find(name);
    if (it != dev.config.interfaces.end() && it->second.shutdown) return false;
  }
  auto seg = net.segment_at(e.device, physical_port(e.interface));
  return seg && net.segments()[*seg].up;
}

const std::string& port_of(const Network& net, const L2Domain& d, size_t edge, size_t vertex) {
  const auto& seg = net.segments()[d.edge_segment[edge]];
  for (const auto& end : seg.ends)
    if (end.device == d.switches[vertex]) return end.port;
  throw std::logic_error("edge does not touch switch");
}

// Switch-level path over active edges that carry `vlan`, as (vertex, edge into it).
std::optional<std::vector<std::pair<size_t, std::optional<size_t>>>> tree_path(const Network& net, const L2Domain& d,
                                                                               size_t from, size_t to, uint16_t vlan) {
  const size_t n = d.switches.size();
  std::vector<std::optional<size_t>> via(n);
  std::vector<bool> seen(n, false);
  std::deque<size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    if (s == to) break;
    for (size_t e = 0; e < d.graph.edges.size(); ++e) {
      if (!d.tree.active[e]) continue;
      const auto& edge = d.graph.edges[e];
      if (edge.a != s && edge.b != s) continue;
      auto u = edge.a == s ? edge.b : edge.a;
      if (seen[u]) continue;
      const auto& cs = net.device(d.switches[s]).config;
      const auto& cu = net.device(d.switches[u]).config;
      if (!port_carries(cs, port_of(net, d, e, s), vlan) || !port_carries(cu, port_of(net, d, e, u), vlan)) continue;
      seen[u] = true;
      via[u] = e;
      queue.push_back(u);
    }
  }
  if (!seen[to]) return std::nullopt;
  std::vector<std::pair<size_t, std::optional<size_t>>> path;
  for (size_t s = to;;) {
    path.push_back({s, via[s]});
    if (!via[s]) break;
    const auto& edge = d.graph.edges[*via[s]];
    s = edge.a == s ? edge.b : edge.a;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

SpanningTree compute_spanning_tree(const SwitchGraph& graph) { return elect(graph, false); }
SpanningTree compute_spanning_forest(const SwitchGraph& graph) { return elect(graph, true); }

L2Domain build_domain(const Network& net, uint32_t asn) {
  L2Domain d;
  d.asn = asn;
  std::vector<DeviceId> switches;
  for (auto id : net.devices_in(asn)) {
    const auto& dev = net.device(id);
    if (dev.kind == DeviceKind::Switch && !dev.failed) switches.push_back(id);
  }
  std::sort(switches.begin(), switches.end(), [&](DeviceId a, DeviceId b) {
    return net.device(a).switch_index < net.device(b).switch_index;
  });
  d.switches = switches;
  for (auto id : switches) {
    const auto& dev = net.device(id);
    d.graph.bridges.push_back({dev.config.stp_priority.value_or(dev.default_stp_priority),
                               static_cast<uint32_t>(dev.switch_index)});
  }
  auto vertex = [&](DeviceId id) -> std::optional<size_t> {
    auto it = std::find(switches.begin(), switches.end(), id);
    if (it == switches.end()) return std::nullopt;
    return static_cast<size_t>(it - switches.begin());
  };
  auto port_id = [&](DeviceId id, const std::string& port) {
    const auto& ports = net.device(id).ports;
    return static_cast<uint32_t>(std::find(ports.begin(), ports.end(), port) - ports.begin()) + 1;
  };
  for (size_t i = 0; i < net.segments().size(); ++i) {
    const auto& s = net.segments()[i];
    if (s.kind != SegmentKind::L2 || s.asn != asn || !s.up || s.ends.size() != 2) continue;
    auto a = vertex(s.ends[0].device), b = vertex(s.ends[1].device);
    if (!a || !b) continue;
    // A port that is shut down does not take part in the tree.
    const auto& ca = net.device(s.ends[0].device).config.interfaces;
    const auto& cb = net.device(s.ends[1].device).config.interfaces;
    auto down = [](const auto& ifs, const std::string& p) {
      auto it = ifs.find(p);
      return it != ifs.end() && it->second.shutdown;
    };
    if (down(ca, s.ends[0].port) || down(cb, s.ends[1].port)) continue;
    d.graph.edges.push_back({*a, *b, port_id(s.ends[0].device, s.ends[0].port), port_id(s.ends[1].device, s.ends[1].port)});
    d.edge_segment.push_back(i);
  }
  if (!switches.empty()) d.tree = compute_spanning_forest(d.graph);
  return d;
}

std::optional<uint16_t> endpoint_vlan(const Network& net, const Endpoint& e) {
  auto phys = physical_port(e.interface);
  auto seg = net.segment_at(e.device, phys);
  if (!seg || net.segments()[*seg].kind != SegmentKind::L2) return std::nullopt;
  for (const auto& end : net.segments()[*seg].ends) {
    if (end.device == e.device) continue;
    const auto& sw = net.device(end.device);
    if (sw.kind != DeviceKind::Switch) return std::nullopt;
    auto it = sw.config.interfaces.find(end.port);
    if (it == sw.config.interfaces.end()) return std::nullopt;
    auto tagged = subinterface_vlan(e.interface);
    if (tagged) {
      if (it->second.trunk || it->second.access_vlan == *tagged) return tagged;
      return std::nullopt;
    }
    return it->second.access_vlan;
  }
  return std::nullopt;
}

L2Result l2_reach(const Network& net, const L2Domain& d, const Endpoint& src, const Endpoint& dst) {
  for (const auto* e : {&src, &dst}) {
    const auto& ports = net.device(e->device).ports;
    if (std::find(ports.begin(), ports.end(), physical_port(e->interface)) == ports.end())
      throw std::out_of_range(fmt::format("{} has no port {}", net.device(e->device).label(), e->interface));
  }
  L2Result r;
  auto sa = attachment(net, d, src.device, physical_port(src.interface));
  auto da = attachment(net, d, dst.device, physical_port(dst.interface));
  if (!sa || !da) {
    r.reason = NotReachable::NotAttached;
    return r;
  }
  auto sv = endpoint_vlan(net, src), dv = endpoint_vlan(net, dst);
  if (!sv || !dv) {
    r.reason = NotReachable::NoVlan;
    return r;
  }
  if (*sv != *dv) {
    r.reason = NotReachable::VlanIsolation;
    return r;
  }
  auto switch_port_shut = [&](const Attach& a) {
    const auto& ifs = net.device(d.switches[a.vertex]).config.interfaces;
    auto it = ifs.find(a.switch_port);
    return it != ifs.end() && it->second.shutdown;
  };
  if (!endpoint_port_usable(net, src) || !endpoint_port_usable(net, dst) || switch_port_shut(*sa) ||
      switch_port_shut(*da)) {
    r.reason = NotReachable::PortDown;
    return r;
  }
  const auto vlan = *sv;
  if (!port_carries(net.device(d.switches[sa->vertex]).config, sa->switch_port, vlan) ||
      !port_carries(net.device(d.switches[da->vertex]).config, da->switch_port, vlan)) {
    r.reason = NotReachable::Disconnected;
    return r;
  }
  auto path = tree_path(net, d, sa->vertex, da->vertex, vlan);
  if (!path) {
    r.reason = NotReachable::Disconnected;
    return r;
  }
  L2Path p;
  p.vlan = vlan;
  p.hops.push_back({src.device, "", src.interface});
  p.delay_us = net.segments()[sa->segment].delay_us;
  std::string ingress = sa->switch_port;
  for (size_t i = 0; i < path->size(); ++i) {
    auto [vertex, edge] = (*path)[i];
    if (edge) p.delay_us += net.segments()[d.edge_segment[*edge]].delay_us;
    std::string egress;
    if (i + 1 < path->size()) {
      egress = port_of(net, d, *(*path)[i + 1].second, vertex);
    } else {
      egress = da->switch_port;
    }
    if (i > 0) ingress = port_of(net, d, *edge, vertex);
    p.hops.push_back({d.switches[vertex], ingress, egress});
  }
  p.delay_us += net.segments()[da->segment].delay_us;
  p.hops.push_back({dst.device, dst.interface, ""});
  r.path = std::move(p);
  return r;
}

std::vector<Endpoint> broadcast_domain(const Network& net, const L2Domain& d, const Endpoint& src) {
  std::vector<Endpoint> out;
  auto sa = attachment(net, d, src.device, physical_port(src.interface));
  auto vlan = endpoint_vlan(net, src);
  if (!sa || !vlan || !endpoint_port_usable(net, src)) return out;
  for (size_t v = 0; v < d.switches.size(); ++v) {
    const auto& sw = net.device(d.switches[v]);
    for (const auto& port : sw.ports) {
      auto seg = net.segment_at(d.switches[v], port);
      if (!seg) continue;
      for (const auto& end : net.segments()[*seg].ends) {
        const auto& dev = net.device(end.device);
        if (dev.kind == DeviceKind::Switch) continue;
        std::vector<Endpoint> candidates;
        if (dev.kind == DeviceKind::Router) {
          for (const auto& [name, cfg] : dev.config.interfaces)
            if (physical_port(name) == end.port) candidates.push_back({end.device, name});
        } else {
          candidates.push_back({end.device, end.port});
        }
        for (auto& c : candidates) {
          if (c == src) continue;
          if (l2_reach(net, d, src, c)) out.push_back(std::move(c));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string render_spanning_tree(const Network& net, const L2Domain& d) {
  std::string out = fmt::format("spanning-tree AS {}\n", d.asn);
  if (d.switches.empty()) return out;
  auto bridge = [&](size_t v) {
    return fmt::format("{} (priority {}, id {})", net.device(d.switches[v]).name, d.graph.bridges[v].priority,
                       d.graph.bridges[v].id);
  };
  for (size_t v = 0; v < d.switches.size(); ++v) {
    if (d.tree.root_cost[v] == 0) out += fmt::format("root {}\n", bridge(v));
  }
  for (size_t v = 0; v < d.switches.size(); ++v) {
    std::string root_port = "-";
    if (d.tree.root_edge[v]) root_port = port_of(net, d, *d.tree.root_edge[v], v);
    out += fmt::format("bridge {} cost {} root-port {}\n", bridge(v), d.tree.root_cost[v], root_port);
    for (size_t e = 0; e < d.graph.edges.size(); ++e) {
      const auto& edge = d.graph.edges[e];
      if (edge.a != v && edge.b != v) continue;
      auto role = edge.a == v ? d.tree.role_a[e] : d.tree.role_b[e];
      out += fmt::format("  {} {} {}\n", port_of(net, d, e, v), to_string(role),
                         role == PortRole::Blocked ? "discarding" : "forwarding");
    }
  }
  return out;
}

}  // namespace mnsim::l2
