#include <algorithm>

#include <fmt/format.h>

#include "mnsim/bgpsim.hpp"

namespace mnsim::bgp {

const char* to_string(SessionKind kind) { return kind == SessionKind::Ibgp ? "ibgp" : "ebgp"; }

const char* to_string(DecisionStep step) {
  switch (step) {
    case DecisionStep::SingleCandidate: return "single-candidate";
    case DecisionStep::LocalOrigin: return "local-origin";
    case DecisionStep::LocalPref: return "local-pref";
    case DecisionStep::AsPathLength: return "as-path-length";
    case DecisionStep::OriginKind: return "origin";
    case DecisionStep::Med: return "med";
    case DecisionStep::EbgpOverIbgp: return "ebgp-over-ibgp";
    case DecisionStep::IgpCost: return "igp-cost";
    case DecisionStep::RouterId: return "router-id";
    case DecisionStep::PeerAddress: return "peer-address";
  }
  return "?";
}

std::string render_as_path(const std::vector<uint32_t>& path) {
  if (path.empty()) return "-";
  return fmt::format("{}", fmt::join(path, " "));
}

std::optional<BgpRoute> evaluate_route_map(const conf::DeviceConfig& config, const std::string& map,
                                           const BgpRoute& route, uint32_t prepend_asn,
                                           std::vector<std::string>* diagnostics) {
  auto report = [&](std::string msg) {
    if (diagnostics) diagnostics->push_back(std::move(msg));
  };
  auto it = config.route_maps.find(map);
  if (it == config.route_maps.end()) {
    report(fmt::format("route-map {} is not defined; denying", map));
    return std::nullopt;
  }
  for (const auto& [seq, entry] : it->second.entries) {
    bool match = true;
    if (entry.match_prefix_list) {
      auto pl = config.prefix_lists.find(*entry.match_prefix_list);
      if (pl == config.prefix_lists.end()) {
        report(fmt::format("route-map {} {}: prefix-list {} is not defined", map, seq, *entry.match_prefix_list));
        match = false;
      } else if (pl->second.evaluate(route.prefix) != conf::Action::Permit) {
        match = false;
      }
    }
    if (match && entry.match_community) {
      auto cl = config.community_lists.find(*entry.match_community);
      if (cl == config.community_lists.end()) {
        report(fmt::format("route-map {} {}: community-list {} is not defined", map, seq, *entry.match_community));
        match = false;
      } else if (!cl->second.matches(route.communities)) {
        match = false;
      }
    }
    if (!match) continue;
    if (entry.action == conf::Action::Deny) return std::nullopt;
    BgpRoute out = route;
    if (entry.set_local_pref) out.local_pref = *entry.set_local_pref;
    if (entry.set_med) out.med = *entry.set_med;
    out.communities.insert(entry.add_communities.begin(), entry.add_communities.end());
    out.as_path.insert(out.as_path.begin(), entry.prepend, prepend_asn);
    return out;
  }
  return std::nullopt;
}

namespace {

uint32_t neighbor_as(const BgpRoute& r) { return r.as_path.empty() ? 0 : r.as_path.front(); }

// Keeps the candidates minimizing `key`.
template <typename Key>
void keep_min(std::vector<size_t>& alive, Key key) {
  auto best = key(alive.front());
  for (auto i : alive) best = std::min(best, key(i));
  std::erase_if(alive, [&](size_t i) { return key(i) != best; });
}

}  // namespace

std::optional<Decision> best_route(const std::vector<BgpRoute>& candidates, const IgpCostFn& igp_cost) {
  std::vector<size_t> alive;
  std::vector<uint32_t> cost(candidates.size(), 0);
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].local) {
      alive.push_back(i);
      continue;
    }
    auto c = igp_cost ? igp_cost(candidates[i].next_hop) : std::optional<uint32_t>(0);
    if (!c) continue;
    cost[i] = *c;
    alive.push_back(i);
  }
  if (alive.empty()) return std::nullopt;
  if (alive.size() == 1) return Decision{alive.front(), DecisionStep::SingleCandidate};

  const auto& c = candidates;
  auto decided = [&](DecisionStep step) -> std::optional<Decision> {
    if (alive.size() == 1) return Decision{alive.front(), step};
    return std::nullopt;
  };

  keep_min(alive, [&](size_t i) { return c[i].local ? 0 : 1; });
  if (auto d = decided(DecisionStep::LocalOrigin)) return d;
  keep_min(alive, [&](size_t i) { return -static_cast<int64_t>(c[i].local_pref); });
  if (auto d = decided(DecisionStep::LocalPref)) return d;
  keep_min(alive, [&](size_t i) { return c[i].as_path.size(); });
  if (auto d = decided(DecisionStep::AsPathLength)) return d;
  keep_min(alive, [&](size_t i) { return static_cast<int>(c[i].origin); });
  if (auto d = decided(DecisionStep::OriginKind)) return d;

  // MED only eliminates routes beaten by a route from the same neighbor AS.
  std::vector<size_t> survivors;
  for (auto i : alive) {
    bool beaten = std::any_of(alive.begin(), alive.end(), [&](size_t j) {
      return neighbor_as(c[j]) == neighbor_as(c[i]) && c[j].med < c[i].med;
    });
    if (!beaten) survivors.push_back(i);
  }
  alive = std::move(survivors);
  if (auto d = decided(DecisionStep::Med)) return d;

  keep_min(alive, [&](size_t i) { return c[i].kind == SessionKind::Ebgp ? 0 : 1; });
  if (auto d = decided(DecisionStep::EbgpOverIbgp)) return d;
  keep_min(alive, [&](size_t i) { return cost[i]; });
  if (auto d = decided(DecisionStep::IgpCost)) return d;
  keep_min(alive, [&](size_t i) { return c[i].peer_router_id; });
  if (auto d = decided(DecisionStep::RouterId)) return d;
  keep_min(alive, [&](size_t i) { return c[i].peer_address; });
  return Decision{alive.front(), DecisionStep::PeerAddress};
}

}  // namespace mnsim::bgp
