#include "mnsim/dataplane.hpp"

#include <set>

#include <fmt/format.h>

namespace mnsim::dp {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Delivered: return "Delivered";
    case Outcome::Loop: return "Loop";
    case Outcome::NoRoute: return "NoRoute";
    case Outcome::LinkDown: return "LinkDown";
    case Outcome::TtlExceeded: return "TtlExceeded";
  }
  return "?";
}

const char* to_string(PingFailure reason) {
  switch (reason) {
    case PingFailure::None: return "None";
    case PingFailure::NoSuchDestination: return "NoSuchDestination";
    case PingFailure::ForwardUnreachable: return "ForwardUnreachable";
    case PingFailure::ReverseUnreachable: return "ReverseUnreachable";
  }
  return "?";
}

Fib build_base_fib(const Network& net, DeviceId device, const igp::IgpTable& igp,
                   std::vector<std::string>* diagnostics) {
  Fib fib;
  const auto& dev = net.device(device);
  if (dev.failed) return fib;
  for (const auto& [name, ifc] : dev.config.interfaces) {
    if (!ifc.address || !interface_up(net, device, name)) continue;
    fib.install({ifc.address->subnet(), RouteSource::Connected, 0, 0, {{name, Ipv4()}}, std::nullopt});
  }
  for (const auto& sr : dev.config.static_routes) {
    const auto* via = fib.longest_match(sr.via);
    if (!via || via->source != RouteSource::Connected) {
      if (diagnostics)
        diagnostics->push_back(fmt::format("{}: static route {} via {} is not on a connected subnet", dev.label(),
                                           sr.prefix.str(), sr.via.str()));
      continue;
    }
    fib.install({sr.prefix, RouteSource::Static, admin_distance(RouteSource::Static), 0,
                 {{via->next_hops.front().interface, sr.via}}, std::nullopt});
  }
  for (const auto& [prefix, route] : igp) {
    if (route.cost == 0) continue;
    fib.install({prefix, RouteSource::Ospf, admin_distance(RouteSource::Ospf), route.cost, route.next_hops, std::nullopt});
  }
  return fib;
}

void install_bgp(Fib& fib, const Fib& base, const bgp::Speaker& speaker, const Network& net,
                 std::vector<std::string>* diagnostics) {
  for (const auto& [prefix, route] : speaker.loc_rib) {
    if (route.local) {
      fib.install({prefix, RouteSource::Ibgp, admin_distance(RouteSource::Ibgp), 0, {{kNullInterface, Ipv4()}},
                   std::nullopt});
      continue;
    }
    const auto* via = base.longest_match(route.next_hop);
    if (!via || via->discard() || via->next_hops.empty()) {
      if (diagnostics)
        diagnostics->push_back(fmt::format("{}: BGP next hop {} for {} does not resolve",
                                           net.device(speaker.device).label(), route.next_hop.str(), prefix.str()));
      continue;
    }
    std::vector<NextHop> hops;
    if (via->source == RouteSource::Connected) {
      hops.push_back({via->next_hops.front().interface, route.next_hop});
    } else {
      hops = via->next_hops;
    }
    auto source = route.kind == bgp::SessionKind::Ebgp ? RouteSource::Ebgp : RouteSource::Ibgp;
    fib.install({prefix, source, admin_distance(source), route.med, std::move(hops), route.next_hop});
  }
}

namespace {

std::optional<std::string> owning_interface(const Network& net, DeviceId device, Ipv4 address) {
  for (const auto& [name, ifc] : net.device(device).config.interfaces)
    if (ifc.address && ifc.address->address == address && interface_up(net, device, name)) return name;
  return std::nullopt;
}

Ipv4 interface_address(const Network& net, DeviceId device, const std::string& name) {
  const auto& ifs = net.device(device).config.interfaces;
  auto it = ifs.find(name);
  if (it == ifs.end() || !it->second.address) return Ipv4();
  return it->second.address->address;
}

struct Arrival {
  DeviceId device;
  std::string interface;
  uint32_t delay_us;
};

enum class Resolve { Found, NotFound, Down };

Resolve resolve(const ForwardingView& v, DeviceId cur, const std::string& egress, size_t segment, Ipv4 target,
                Arrival& out) {
  const auto& net = v.net;
  const auto& seg = net.segments()[segment];
  if (seg.kind == SegmentKind::L2) {
    auto dom = v.l2.find(seg.asn);
    if (dom == v.l2.end()) return Resolve::NotFound;
    l2::Endpoint src{cur, egress};
    for (const auto& e : l2::broadcast_domain(net, dom->second, src)) {
      if (interface_address(net, e.device, e.interface) != target) continue;
      if (!interface_up(net, e.device, e.interface)) return Resolve::Down;
      auto r = l2::l2_reach(net, dom->second, src, e);
      out = {e.device, e.interface, r.path->delay_us};
      return Resolve::Found;
    }
    return Resolve::NotFound;
  }
  for (const auto& end : seg.ends) {
    if (end.device == cur) continue;
    for (const auto& [name, ifc] : net.device(end.device).config.interfaces) {
      if (physical_port(name) != end.port || !ifc.address || ifc.address->address != target) continue;
      if (!interface_up(net, end.device, name)) return Resolve::Down;
      out = {end.device, name, seg.delay_us};
      return Resolve::Found;
    }
  }
  return Resolve::NotFound;
}

}  // namespace

ForwardingTrace walk(const ForwardingView& v, DeviceId src, Ipv4 dst, uint64_t flow) {
  const auto& net = v.net;
  ForwardingTrace t;
  t.destination = dst;
  std::set<std::pair<DeviceId, std::string>> seen;
  DeviceId cur = src;
  std::string ingress;
  uint64_t delay = 0;
  auto finish = [&](Outcome o) {
    t.outcome = o;
    t.delay_us = delay;
    return t;
  };

  while (true) {
    Hop hop{cur, ingress, "", ingress.empty() ? Ipv4() : interface_address(net, cur, ingress), delay};
    if (net.device(cur).failed) {
      t.hops.push_back(hop);
      return finish(Outcome::LinkDown);
    }
    if (owning_interface(net, cur, dst)) {
      if (ingress.empty()) hop.address = dst;
      t.hops.push_back(hop);
      return finish(Outcome::Delivered);
    }
    if (t.hops.size() == kInitialTtl) return finish(Outcome::TtlExceeded);
    const auto* entry = v.fibs[cur].longest_match(dst);
    if (!entry || entry->next_hops.empty() || entry->discard()) {
      t.hops.push_back(hop);
      return finish(Outcome::NoRoute);
    }
    const auto& nh = entry->next_hops[flow % entry->next_hops.size()];
    hop.egress = nh.interface;
    if (ingress.empty()) hop.address = interface_address(net, cur, nh.interface);
    t.hops.push_back(hop);
    if (!seen.insert({cur, nh.interface}).second) return finish(Outcome::Loop);

    auto segment = net.segment_at(cur, physical_port(nh.interface));
    if (!segment) return finish(Outcome::NoRoute);
    if (!interface_up(net, cur, nh.interface) || !net.segments()[*segment].up) {
      t.failed_segment = segment;
      return finish(Outcome::LinkDown);
    }
    Ipv4 target = nh.gateway.is_unspecified() ? dst : nh.gateway;
    Arrival next{};
    switch (resolve(v, cur, nh.interface, *segment, target, next)) {
      case Resolve::NotFound: return finish(Outcome::NoRoute);
      case Resolve::Down:
        t.failed_segment = segment;
        return finish(Outcome::LinkDown);
      case Resolve::Found: break;
    }
    delay += next.delay_us;
    cur = next.device;
    ingress = next.interface;
  }
}

ForwardingTrace trace(const Network& net, DeviceId src, Ipv4 dst, uint64_t flow) {
  const auto& d = derived(net);
  return walk({net, d.l2, d.fibs}, src, dst, flow);
}

PingResult ping(const Network& net, DeviceId src, Ipv4 dst, uint64_t flow) {
  const auto& d = derived(net);
  PingResult r;
  auto owner = d.owners.find(dst);
  if (owner == d.owners.end()) {
    r.reason = PingFailure::NoSuchDestination;
    return r;
  }
  r.forward = walk({net, d.l2, d.fibs}, src, dst, flow);
  if (r.forward.outcome != Outcome::Delivered) {
    r.reason = PingFailure::ForwardUnreachable;
    return r;
  }
  auto back_to = r.forward.hops.front().address;
  r.reverse = walk({net, d.l2, d.fibs}, r.forward.hops.back().device, back_to, flow);
  if (r.reverse.outcome != Outcome::Delivered || r.reverse.hops.back().device != src) {
    r.reason = PingFailure::ReverseUnreachable;
    return r;
  }
  r.success = true;
  r.rtt_us = r.forward.delay_us + r.reverse.delay_us;
  return r;
}

std::string render_trace(const Network& net, const ForwardingTrace& t) {
  std::string out = fmt::format("traceroute to {}, {} hops max\n", t.destination.str(), kInitialTtl);
  for (size_t i = 0; i < t.hops.size(); ++i) {
    const auto& h = t.hops[i];
    out += fmt::format("{:>3}  {:<24} {:<16} {:.3f} ms\n", i + 1, net.device(h.device).label(), h.address.str(),
                       static_cast<double>(h.delay_us) / 1000.0);
  }
  out += fmt::format("result: {}", to_string(t.outcome));
  if (t.failed_segment) out += fmt::format(" (segment {})", *t.failed_segment);
  out += fmt::format(", {:.3f} ms\n", static_cast<double>(t.delay_us) / 1000.0);
  return out;
}

}  // namespace mnsim::dp
