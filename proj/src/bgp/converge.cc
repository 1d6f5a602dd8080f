#include <algorithm>
#include <tuple>

#include <fmt/format.h>

#include "mnsim/bgpsim.hpp"

namespace mnsim::bgp {

std::vector<BgpRoute> Speaker::candidates(const Prefix& prefix) const {
  std::vector<BgpRoute> out;
  auto local = originated.find(prefix);
  if (local != originated.end()) out.push_back(local->second);
  for (const auto& rib : adj_in_post) {
    auto it = rib.find(prefix);
    if (it != rib.end()) out.push_back(it->second);
  }
  return out;
}

size_t Speaker::adj_rib_in_size() const {
  size_t n = 0;
  for (const auto& rib : adj_in_post) n += rib.size();
  return n;
}

const Speaker* BgpState::speaker(DeviceId device) const {
  for (const auto& s : speakers)
    if (s.device == device) return &s;
  return nullptr;
}

namespace {

struct Message {
  size_t speaker;
  size_t peer;
  Prefix prefix;
  std::optional<BgpRoute> route;
};

class Engine {
 public:
  Engine(const Network& net, std::vector<BgpSession> sessions, const DeviceIgpCostFn& igp_cost)
      : net_(net), igp_cost_(igp_cost) {
    state_.sessions = std::move(sessions);
    for (DeviceId id = 0; id < net.device_count(); ++id) {
      const auto& dev = net.device(id);
      if (dev.failed || !dev.config.bgp) continue;
      Speaker s;
      s.device = id;
      s.asn = dev.config.bgp->asn;
      s.router_id = router_id(dev);
      s.route_server = dev.kind == DeviceKind::RouteServer;
      state_.speakers.push_back(std::move(s));
    }
    std::sort(state_.speakers.begin(), state_.speakers.end(), [&](const Speaker& a, const Speaker& b) {
      return std::tuple{a.asn, a.router_id, a.device} < std::tuple{b.asn, b.router_id, b.device};
    });
    std::map<DeviceId, size_t> index;
    for (size_t i = 0; i < state_.speakers.size(); ++i) index[state_.speakers[i].device] = i;

    for (size_t k = 0; k < state_.sessions.size(); ++k) {
      const auto& sess = state_.sessions[k];
      if (sess.state != SessionState::Established || !sess.remote) continue;
      auto a = index.at(sess.local), b = index.at(*sess.remote);
      auto& sa = state_.speakers[a];
      auto& sb = state_.speakers[b];
      sa.peers.push_back({k, sess.local_address, sess.remote_address, sess.remote_as, sess.kind, b, sb.router_id});
      sb.peers.push_back({k, sess.remote_address, sess.local_address, sess.local_as, sess.kind, a, sa.router_id});
    }
    for (auto& s : state_.speakers) {
      std::sort(s.peers.begin(), s.peers.end(),
                [](const Peer& x, const Peer& y) { return x.remote_address < y.remote_address; });
      s.adj_in_pre.resize(s.peers.size());
      s.adj_in_post.resize(s.peers.size());
      s.adj_out.resize(s.peers.size());
      for (size_t p = 0; p < s.peers.size(); ++p) peer_index_[{s.device, s.peers[p].remote_address}] = p;
    }
    dirty_.resize(state_.speakers.size());

    for (size_t i = 0; i < state_.speakers.size(); ++i) {
      auto& s = state_.speakers[i];
      const auto& cfg = config(s);
      for (const auto& p : cfg.bgp->networks) {
        BgpRoute r;
        r.prefix = p;
        r.local = true;
        r.peer_router_id = s.router_id;
        s.originated[p] = r;
        dirty_[i].insert(p);
      }
      for (const auto& peer : s.peers) {
        const auto& n = cfg.bgp->neighbors.at(peer.remote_address);
        for (const auto* map : {&n.route_map_in, &n.route_map_out})
          if (*map && !cfg.route_maps.contains(**map))
            diagnostics_.insert(fmt::format("{}: neighbor {} references undefined route-map {}; denying all",
                                            net_.device(s.device).label(), peer.remote_address.str(), **map));
      }
    }
  }

  BgpState run(size_t max_rounds) {
    auto& report = state_.report;
    std::set<Prefix> last_changed;
    while (true) {
      deliver();
      bool work = std::any_of(dirty_.begin(), dirty_.end(), [](const auto& d) { return !d.empty(); });
      if (!work) {
        report.converged = true;
        break;
      }
      if (report.rounds == max_rounds) {
        for (const auto& d : dirty_) last_changed.insert(d.begin(), d.end());
        report.churning.assign(last_changed.begin(), last_changed.end());
        break;
      }
      ++report.rounds;
      last_changed.clear();
      for (size_t i = 0; i < state_.speakers.size(); ++i) {
        auto prefixes = std::move(dirty_[i]);
        dirty_[i].clear();
        for (const auto& p : prefixes)
          if (decide(i, p)) last_changed.insert(p);
      }
    }
    for (const auto& s : state_.speakers) report.adj_rib_in_sizes[s.device] = s.adj_rib_in_size();
    report.diagnostics.assign(diagnostics_.begin(), diagnostics_.end());
    return std::move(state_);
  }

 private:
  const conf::DeviceConfig& config(const Speaker& s) const { return net_.device(s.device).config; }

  const conf::BgpNeighborConfig& neighbor(const Speaker& s, const Peer& p) const {
    return config(s).bgp->neighbors.at(p.remote_address);
  }

  std::optional<BgpRoute> apply_map(const Speaker& s, const std::optional<std::string>& map, BgpRoute route,
                                    uint32_t prepend_asn) {
    if (!map) return route;
    std::vector<std::string> diags;
    auto out = evaluate_route_map(config(s), *map, route, prepend_asn, &diags);
    for (auto& d : diags) diagnostics_.insert(fmt::format("{}: {}", net_.device(s.device).label(), d));
    return out;
  }

  std::optional<BgpRoute> import(const Speaker& s, const Peer& p, BgpRoute route) {
    route.local = false;
    route.peer_address = p.remote_address;
    route.peer_router_id = p.remote_router_id;
    route.kind = p.kind;
    if (p.kind == SessionKind::Ebgp) {
      if (std::find(route.as_path.begin(), route.as_path.end(), s.asn) != route.as_path.end()) return std::nullopt;
      route.local_pref = 100;
    }
    return apply_map(s, neighbor(s, p).route_map_in, std::move(route), p.remote_as);
  }

  std::optional<BgpRoute> export_to(const Speaker& s, const Peer& p, const std::optional<BgpRoute>& best) {
    if (!best) return std::nullopt;
    const auto& b = *best;
    if (!b.local && b.peer_address == p.remote_address) return std::nullopt;
    if (!b.local && b.kind == SessionKind::Ibgp && p.kind == SessionKind::Ibgp) return std::nullopt;
    BgpRoute out = b;
    if (p.kind == SessionKind::Ebgp) {
      if (std::find(b.as_path.begin(), b.as_path.end(), p.remote_as) != b.as_path.end()) return std::nullopt;
      if (!s.route_server) {
        out.local_pref = 100;
        out.med = 0;
      }
      auto mapped = apply_map(s, neighbor(s, p).route_map_out, std::move(out), s.asn);
      if (!mapped) return std::nullopt;
      out = std::move(*mapped);
      if (!s.route_server) {
        out.as_path.insert(out.as_path.begin(), s.asn);
        out.next_hop = p.local_address;
      } else if (b.local) {
        out.next_hop = p.local_address;
      }
    } else {
      if (b.local) out.next_hop = p.local_address;
      auto mapped = apply_map(s, neighbor(s, p).route_map_out, std::move(out), s.asn);
      if (!mapped) return std::nullopt;
      out = std::move(*mapped);
    }
    out.local = false;
    out.peer_address = Ipv4();
    out.peer_router_id = Ipv4();
    return out;
  }

  // Recomputes the best route for one prefix; emits updates when it changed.
  bool decide(size_t i, const Prefix& prefix) {
    auto& s = state_.speakers[i];
    auto cands = s.candidates(prefix);
    auto cost = [&](Ipv4 nh) { return igp_cost_(s.device, nh); };
    auto decision = best_route(cands, cost);
    std::optional<BgpRoute> best;
    if (decision) best = cands[decision->index];

    auto current = s.loc_rib.find(prefix);
    bool changed = best ? (current == s.loc_rib.end() || !(current->second == *best)) : current != s.loc_rib.end();
    if (decision) s.decided_by[prefix] = decision->step;
    else s.decided_by.erase(prefix);
    if (!changed) return false;
    if (best) s.loc_rib[prefix] = *best;
    else s.loc_rib.erase(prefix);

    for (size_t p = 0; p < s.peers.size(); ++p) {
      auto out = export_to(s, s.peers[p], best);
      auto& sent = s.adj_out[p];
      auto prev = sent.find(prefix);
      if (out) {
        if (prev != sent.end() && prev->second == *out) continue;
        sent[prefix] = *out;
      } else {
        if (prev == sent.end()) continue;
        sent.erase(prev);
      }
      const auto& peer = s.peers[p];
      auto& remote = state_.speakers[peer.remote_speaker];
      pending_.push_back({peer.remote_speaker, peer_index_.at({remote.device, peer.local_address}), prefix, out});
    }
    return true;
  }

  void deliver() {
    for (auto& m : pending_) {
      auto& s = state_.speakers[m.speaker];
      const auto& peer = s.peers[m.peer];
      if (m.route) {
        s.adj_in_pre[m.peer][m.prefix] = *m.route;
        auto accepted = import(s, peer, *m.route);
        if (accepted) s.adj_in_post[m.peer][m.prefix] = std::move(*accepted);
        else s.adj_in_post[m.peer].erase(m.prefix);
      } else {
        s.adj_in_pre[m.peer].erase(m.prefix);
        s.adj_in_post[m.peer].erase(m.prefix);
      }
      dirty_[m.speaker].insert(m.prefix);
    }
    pending_.clear();
  }

  const Network& net_;
  const DeviceIgpCostFn& igp_cost_;
  BgpState state_;
  std::map<std::pair<DeviceId, Ipv4>, size_t> peer_index_;
  std::vector<std::set<Prefix>> dirty_;
  std::vector<Message> pending_;
  std::set<std::string> diagnostics_;
};

}  // namespace

BgpState converge(const Network& net, std::vector<BgpSession> sessions, const DeviceIgpCostFn& igp_cost,
                  size_t max_rounds) {
  Engine engine(net, std::move(sessions), igp_cost);
  return engine.run(max_rounds);
}

}  // namespace mnsim::bgp
