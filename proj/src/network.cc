#include "mnsim/network.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mnsim/text.hpp"

namespace mnsim {

std::string DeviceState::label() const { return fmt::format("{}.{}", asn, name); }

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Intra: return "intra";
    case SegmentKind::InterAs: return "inter-as";
    case SegmentKind::HostLan: return "host-lan";
    case SegmentKind::Ixp: return "ixp";
    case SegmentKind::L2: return "l2";
  }
  return "?";
}

std::string host_name(const std::string& router) { return router + "-host"; }
std::string intra_port(const std::string& peer_router) { return "port_" + peer_router; }
std::string ext_port(uint32_t peer_asn, const std::string& router) {
  return fmt::format("ext_{}_{}", peer_asn, router);
}
std::string ixp_port(uint32_t ixp) { return fmt::format("ixp_{}", ixp); }

std::string_view physical_port(std::string_view interface) {
  auto dot = interface.find('.');
  return dot == std::string_view::npos ? interface : interface.substr(0, dot);
}

std::optional<uint16_t> subinterface_vlan(std::string_view interface) {
  auto dot = interface.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return text::to_number<uint16_t>(interface.substr(dot + 1));
}

Network::Network(topo::TopologySpec spec) : spec_(std::move(spec)) {
  auto violations = topo::validate(spec_);
  if (!violations.empty()) throw topo::TopologyError(0, violations.front().str());
  plan_ = topo::allocate_addresses(spec_);

  for (const auto& as : spec_.ases) {
    std::vector<DeviceId> routers;
    for (size_t r = 0; r < as.l3.routers.size(); ++r) {
      DeviceState d;
      d.kind = DeviceKind::Router;
      d.asn = as.asn;
      d.name = as.l3.routers[r];
      d.router_index = r + 1;
      d.ports.push_back("lo");
      routers.push_back(add_device(std::move(d)));
    }
    for (const auto& l : as.l3.links) {
      auto a = routers[as.l3.index_of(l.a) - 1], b = routers[as.l3.index_of(l.b) - 1];
      connect({SegmentKind::Intra, {{a, intra_port(l.b)}, {b, intra_port(l.a)}}, l.delay_us, true, as.asn, {}, 0});
    }
    if (as.l3.hosts) {
      for (size_t r = 0; r < as.l3.routers.size(); ++r) {
        DeviceState h;
        h.kind = DeviceKind::Host;
        h.asn = as.asn;
        h.name = host_name(as.l3.routers[r]);
        auto host = add_device(std::move(h));
        connect({SegmentKind::HostLan, {{routers[r], "host"}, {host, "eth0"}}, 0, true, as.asn, {}, 0});
      }
    }
    if (as.l2) {
      const auto& t = *as.l2;
      std::vector<DeviceId> switches;
      for (size_t s = 0; s < t.switches.size(); ++s) {
        DeviceState d;
        d.kind = DeviceKind::Switch;
        d.asn = as.asn;
        d.name = t.switches[s].name;
        d.switch_index = s + 1;
        d.default_stp_priority = t.switches[s].priority;
        switches.push_back(add_device(std::move(d)));
      }
      for (const auto& [a, b] : t.links)
        connect({SegmentKind::L2,
                 {{switches[t.index_of(a) - 1], b}, {switches[t.index_of(b) - 1], a}}, 0, true, as.asn, {}, 0});
      for (const auto& hp : t.hosts) {
        DeviceState h;
        h.kind = DeviceKind::Host;
        h.asn = as.asn;
        h.name = hp.host;
        auto host = add_device(std::move(h));
        connect({SegmentKind::L2, {{switches[t.index_of(hp.sw) - 1], hp.host}, {host, "eth0"}}, 0, true, as.asn, {}, 0});
      }
      connect({SegmentKind::L2,
               {{switches[t.index_of(t.gateway_switch) - 1], t.gateway_router},
                {routers[as.l3.index_of(t.gateway_router) - 1], "l2"}},
               0, true, as.asn, {}, 0});
    }
  }
  for (size_t i = 0; i < spec_.links.size(); ++i) {
    const auto& l = spec_.links[i];
    auto a = id(l.a.asn, l.a.router), b = id(l.b.asn, l.b.router);
    connect({SegmentKind::InterAs,
             {{a, ext_port(l.b.asn, l.b.router)}, {b, ext_port(l.a.asn, l.a.router)}},
             l.delay_us, l.up, 0, i, 0});
  }
  for (const auto& x : spec_.ixps) {
    DeviceState rs;
    rs.kind = DeviceKind::RouteServer;
    rs.asn = x.id;
    rs.name = kRouteServerName;
    auto rs_id = add_device(std::move(rs));
    Segment s{SegmentKind::Ixp, {{rs_id, "lan"}}, x.delay_us, true, 0, {}, x.id};
    for (const auto& m : x.members) s.ends.push_back({id(m.asn, m.router), ixp_port(x.id)});
    connect(std::move(s));
  }
}

DeviceId Network::add_device(DeviceState d) {
  auto id = static_cast<DeviceId>(devices_.size());
  by_name_.emplace(std::pair{d.asn, d.name}, id);
  devices_.push_back(std::move(d));
  port_segment_.emplace_back();
  return id;
}

size_t Network::connect(Segment s) {
  auto index = segments_.size();
  for (const auto& end : s.ends) {
    auto& dev = devices_[end.device];
    if (std::find(dev.ports.begin(), dev.ports.end(), end.port) == dev.ports.end()) dev.ports.push_back(end.port);
    port_segment_[end.device][end.port] = index;
  }
  segments_.push_back(std::move(s));
  return index;
}

DeviceState& Network::mutable_device(DeviceId id) {
  stale_ = true;
  return devices_.at(id);
}

std::optional<DeviceId> Network::find(uint32_t asn, std::string_view name) const {
  auto it = by_name_.find(std::pair{asn, std::string(name)});
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

DeviceId Network::id(uint32_t asn, std::string_view name) const {
  auto d = find(asn, name);
  if (!d) throw std::out_of_range(fmt::format("no device {} in AS {}", name, asn));
  return *d;
}

std::vector<DeviceId> Network::devices_in(uint32_t asn) const {
  std::vector<DeviceId> out;
  for (DeviceId i = 0; i < devices_.size(); ++i)
    if (devices_[i].asn == asn) out.push_back(i);
  return out;
}

std::vector<uint32_t> Network::asns() const {
  std::vector<uint32_t> out;
  for (const auto& as : spec_.ases) out.push_back(as.asn);
  std::sort(out.begin(), out.end());
  return out;
}

bool Network::is_ixp(uint32_t asn) const {
  return std::any_of(spec_.ixps.begin(), spec_.ixps.end(), [&](const auto& x) { return x.id == asn; });
}

void Network::set_segment_up(size_t segment, bool up) {
  stale_ = true;
  segments_.at(segment).up = up;
}

std::optional<size_t> Network::segment_at(DeviceId device, std::string_view port) const {
  const auto& ports = port_segment_.at(device);
  auto it = ports.find(port);
  if (it == ports.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> Network::find_link(const topo::RouterRef& a, const topo::RouterRef& b) const {
  auto da = find(a.asn, a.router), db = find(b.asn, b.router);
  if (!da || !db) return std::nullopt;
  for (size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.kind != SegmentKind::Intra && s.kind != SegmentKind::InterAs) continue;
    if ((s.ends[0].device == *da && s.ends[1].device == *db) || (s.ends[0].device == *db && s.ends[1].device == *da))
      return i;
  }
  return std::nullopt;
}

void Network::set_device_failed(DeviceId id, bool failed) {
  stale_ = true;
  devices_.at(id).failed = failed;
}

std::optional<DeviceId> Network::probe_host(uint32_t asn) const {
  const auto* as = spec_.find_as(asn);
  if (!as || !as->l3.hosts || as->l3.routers.empty()) return std::nullopt;
  return find(asn, host_name(as->l3.routers.front()));
}

std::optional<DeviceId> Network::diagonal_host(uint32_t asn) const {
  const auto* as = spec_.find_as(asn);
  if (!as || !as->l3.hosts || as->l3.routers.empty()) return std::nullopt;
  return find(asn, host_name(as->l3.routers.back()));
}

void Network::set_derived(std::shared_ptr<const Derived> d) {
  derived_ = std::move(d);
  stale_ = false;
  ++epoch_;
}

bool interface_up(const Network& net, DeviceId id, const std::string& interface) {
  const auto& dev = net.device(id);
  if (dev.failed) return false;
  auto it = dev.config.interfaces.find(interface);
  if (it == dev.config.interfaces.end() || !it->second.address || it->second.shutdown) return false;
  auto phys = physical_port(interface);
  if (phys != interface) {
    // A sub-interface also needs its parent port enabled.
    auto parent = dev.config.interfaces.find(std::string(phys));
    if (parent != dev.config.interfaces.end() && parent->second.shutdown) return false;
  }
  if (phys == "lo") return true;
  auto seg = net.segment_at(id, phys);
  if (!seg) return false;
  return net.segments()[*seg].up;
}

namespace conf {

LoadResult load_config_script(Network& network, uint32_t asn, const std::string& device, std::string_view script,
                              bool strict) {
  auto id = network.id(asn, device);
  auto& dev = network.mutable_device(id);
  return load_config_script(dev.kind, dev.config, script, strict);
}

}  // namespace conf

}  // namespace mnsim
