#include "mnsim/igp.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

namespace mnsim::igp {

namespace {

constexpr uint64_t kInfinite = std::numeric_limits<uint64_t>::max();

void merge_into(std::vector<NextHop>& into, const std::vector<NextHop>& from) {
  std::set<NextHop> all(into.begin(), into.end());
  all.insert(from.begin(), from.end());
  into.assign(all.begin(), all.end());
  if (into.size() > kMaxEcmp) into.resize(kMaxEcmp);
}

IgpTable spf(const AsGraph& g, size_t source) {
  const size_t n = g.routers.size();
  std::vector<uint64_t> dist(n, kInfinite);
  std::vector<std::vector<NextHop>> first(n);
  std::vector<bool> done(n, false);
  using Item = std::pair<uint64_t, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0;
  pq.push({0, source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u] || d != dist[u]) continue;
    done[u] = true;
    for (const auto& adj : g.routers[u].adjacencies) {
      auto nd = d + std::max<uint32_t>(adj.cost, 1);
      std::vector<NextHop> via = u == source ? std::vector<NextHop>{{adj.interface, adj.neighbor_address}} : first[u];
      if (nd < dist[adj.to]) {
        dist[adj.to] = nd;
        first[adj.to] = std::move(via);
        if (first[adj.to].size() > kMaxEcmp) first[adj.to].resize(kMaxEcmp);
        pq.push({nd, adj.to});
      } else if (nd == dist[adj.to] && !done[adj.to]) {
        merge_into(first[adj.to], via);
      }
    }
  }

  IgpTable table;
  for (const auto& stub : g.routers[source].stubs)
    table[stub.prefix] = IgpRoute{0, {{stub.interface, Ipv4()}}};
  for (size_t r = 0; r < n; ++r) {
    if (r == source || dist[r] == kInfinite) continue;
    for (const auto& stub : g.routers[r].stubs) {
      auto cost = static_cast<uint32_t>(dist[r]);
      auto [it, inserted] = table.try_emplace(stub.prefix, IgpRoute{cost, first[r]});
      if (inserted) continue;
      auto& route = it->second;
      if (cost < route.cost) {
        route = IgpRoute{cost, first[r]};
      } else if (cost == route.cost && route.cost != 0) {
        merge_into(route.next_hops, first[r]);
      }
    }
  }
  return table;
}

bool covered(const conf::OspfConfig& ospf, const Prefix& subnet) {
  return std::any_of(ospf.networks.begin(), ospf.networks.end(), [&](const Prefix& p) { return p.contains(subnet); });
}

}  // namespace

std::vector<IgpTable> compute_igp(const AsGraph& graph) {
  std::vector<IgpTable> out;
  out.reserve(graph.routers.size());
  for (size_t r = 0; r < graph.routers.size(); ++r) out.push_back(spf(graph, r));
  return out;
}

AsGraph build_as_graph(const Network& net, uint32_t asn, std::vector<DeviceId>& routers) {
  routers.clear();
  for (auto id : net.devices_in(asn)) {
    const auto& dev = net.device(id);
    if (dev.kind == DeviceKind::Router && !dev.failed && dev.config.ospf) routers.push_back(id);
  }
  AsGraph g;
  g.routers.resize(routers.size());
  auto vertex = [&](DeviceId id) -> std::optional<size_t> {
    auto it = std::find(routers.begin(), routers.end(), id);
    if (it == routers.end()) return std::nullopt;
    return static_cast<size_t>(it - routers.begin());
  };
  auto enabled = [&](DeviceId id, const std::string& name) {
    const auto& cfg = net.device(id).config;
    auto it = cfg.interfaces.find(name);
    return it != cfg.interfaces.end() && it->second.address && cfg.ospf &&
           covered(*cfg.ospf, it->second.address->subnet()) && interface_up(net, id, name);
  };

  for (size_t v = 0; v < routers.size(); ++v) {
    auto id = routers[v];
    const auto& cfg = net.device(id).config;
    for (const auto& [name, ifc] : cfg.interfaces) {
      if (!enabled(id, name)) continue;
      g.routers[v].stubs.push_back({ifc.address->subnet(), name});
      if (name == "lo") continue;
      auto seg = net.segment_at(id, physical_port(name));
      if (!seg) continue;
      for (const auto& end : net.segments()[*seg].ends) {
        if (end.device == id) continue;
        auto u = vertex(end.device);
        if (!u) continue;
        // The neighbor's interface on the same segment and subnet.
        for (const auto& [peer_name, peer_ifc] : net.device(end.device).config.interfaces) {
          if (physical_port(peer_name) != end.port || !peer_ifc.address) continue;
          if (peer_ifc.address->subnet() != ifc.address->subnet()) continue;
          if (!enabled(end.device, peer_name)) continue;
          g.routers[v].adjacencies.push_back({*u, ifc.ospf_cost.value_or(1), name, peer_ifc.address->address});
        }
      }
    }
  }
  return g;
}

AsIgp compute_as_igp(const Network& net, uint32_t asn) {
  AsIgp out;
  out.asn = asn;
  out.graph = build_as_graph(net, asn, out.routers);
  out.tables = compute_igp(out.graph);
  return out;
}

std::optional<uint32_t> igp_distance(const IgpTable& table, Ipv4 address) {
  std::optional<uint32_t> best;
  int best_len = -1;
  for (const auto& [prefix, route] : table) {
    if (prefix.contains(address) && prefix.length() > best_len) {
      best_len = prefix.length();
      best = route.cost;
    }
  }
  return best;
}

std::optional<uint32_t> igp_distance(const IgpTable& table, const Prefix& prefix) {
  auto it = table.find(prefix);
  if (it == table.end()) return std::nullopt;
  return it->second.cost;
}

}  // namespace mnsim::igp
