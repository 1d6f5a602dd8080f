#include <fmt/format.h>

#include "mnsim/dataplane.hpp"

namespace mnsim {

bgp::ConvergenceReport converge_all(Network& net, size_t max_rounds) {
  auto d = std::make_shared<Derived>();
  const auto n = net.device_count();

  for (auto asn : net.asns()) d->l2.emplace(asn, l2::build_domain(net, asn));

  d->igp_tables.resize(n);
  for (auto asn : net.asns()) {
    auto as_igp = igp::compute_as_igp(net, asn);
    for (size_t v = 0; v < as_igp.routers.size(); ++v) d->igp_tables[as_igp.routers[v]] = as_igp.tables[v];
    d->igp.emplace(asn, std::move(as_igp));
  }

  d->base_fibs.reserve(n);
  for (DeviceId id = 0; id < n; ++id) d->base_fibs.push_back(dp::build_base_fib(net, id, d->igp_tables[id], &d->diagnostics));

  dp::ForwardingView base{net, d->l2, d->base_fibs};
  auto reachable = [&](DeviceId from, Ipv4 to) {
    return dp::walk(base, from, to).outcome == dp::Outcome::Delivered;
  };
  auto sessions = bgp::derive_sessions(net, reachable);
  for (const auto& s : sessions) {
    if (s.state == bgp::SessionState::Established) continue;
    d->diagnostics.push_back(fmt::format("{}: session to {} (AS {}) idle: {}", net.device(s.local).label(),
                                         s.remote_address.str(), s.remote_as, bgp::to_string(s.reason)));
  }

  auto igp_cost = [&](DeviceId device, Ipv4 next_hop) -> std::optional<uint32_t> {
    const auto* e = d->base_fibs[device].longest_match(next_hop);
    if (!e || e->discard()) return std::nullopt;
    return e->source == dp::RouteSource::Ospf ? e->metric : 0;
  };
  d->bgp = bgp::converge(net, std::move(sessions), igp_cost, max_rounds);
  for (const auto& msg : d->bgp.report.diagnostics) d->diagnostics.push_back(msg);

  d->fibs = d->base_fibs;
  for (const auto& speaker : d->bgp.speakers) {
    if (net.device(speaker.device).kind != DeviceKind::Router) continue;
    dp::install_bgp(d->fibs[speaker.device], d->base_fibs[speaker.device], speaker, net, &d->diagnostics);
  }

  for (DeviceId id = 0; id < n; ++id)
    for (const auto& [name, ifc] : net.device(id).config.interfaces)
      if (ifc.address) d->owners.try_emplace(ifc.address->address, l2::Endpoint{id, name});

  auto report = d->bgp.report;
  net.set_derived(std::move(d));
  return report;
}

const Derived& ensure_converged(Network& net) {
  if (net.stale()) converge_all(net);
  return *net.derived();
}

const Derived& derived(const Network& net) {
  if (net.stale()) throw std::logic_error("network changed since the last converge");
  return *net.derived();
}

}  // namespace mnsim
