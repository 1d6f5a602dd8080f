#include <algorithm>
#include <set>

#include "mnsim/bgpsim.hpp"

namespace mnsim::bgp {

const char* to_string(IdleReason reason) {
  switch (reason) {
    case IdleReason::None: return "none";
    case IdleReason::OneSided: return "OneSided";
    case IdleReason::AsnMismatch: return "AsnMismatch";
    case IdleReason::NoPeerDevice: return "NoPeerDevice";
    case IdleReason::Unreachable: return "Unreachable";
    case IdleReason::PeerDown: return "PeerDown";
  }
  return "?";
}

Ipv4 router_id(const DeviceState& device) {
  if (device.config.bgp && device.config.bgp->router_id) return *device.config.bgp->router_id;
  auto lo = device.config.interfaces.find("lo");
  if (lo != device.config.interfaces.end() && lo->second.address) return lo->second.address->address;
  return Ipv4();
}

namespace {

struct Owner {
  DeviceId device;
  std::string interface;
};

std::map<Ipv4, Owner> address_owners(const Network& net) {
  std::map<Ipv4, Owner> out;
  for (DeviceId id = 0; id < net.device_count(); ++id)
    for (const auto& [name, ifc] : net.device(id).config.interfaces)
      if (ifc.address) out.try_emplace(ifc.address->address, Owner{id, name});
  return out;
}

bool share_segment(const Network& net, const Owner& a, const Owner& b) {
  if (!interface_up(net, a.device, a.interface) || !interface_up(net, b.device, b.interface)) return false;
  const auto& ia = *net.device(a.device).config.interfaces.at(a.interface).address;
  const auto& ib = *net.device(b.device).config.interfaces.at(b.interface).address;
  if (ia.subnet() != ib.subnet()) return false;
  auto sa = net.segment_at(a.device, physical_port(a.interface));
  auto sb = net.segment_at(b.device, physical_port(b.interface));
  return sa && sb && *sa == *sb;
}

}  // namespace

std::vector<BgpSession> derive_sessions(const Network& net, const ReachFn& reachable) {
  const auto owners = address_owners(net);
  std::vector<BgpSession> out;
  std::set<std::pair<DeviceId, DeviceId>> listed;

  for (DeviceId a = 0; a < net.device_count(); ++a) {
    const auto& da = net.device(a);
    if (da.failed || !da.config.bgp) continue;
    const auto& bgp_a = *da.config.bgp;
    for (const auto& [x, ncfg] : bgp_a.neighbors) {
      BgpSession s;
      s.local = a;
      s.local_as = bgp_a.asn;
      s.remote_address = x;
      s.remote_as = ncfg.remote_as;
      s.kind = ncfg.remote_as == bgp_a.asn ? SessionKind::Ibgp : SessionKind::Ebgp;
      auto idle = [&](IdleReason reason) {
        s.state = SessionState::Idle;
        s.reason = reason;
        out.push_back(s);
      };

      auto owner = owners.find(x);
      if (owner == owners.end() || owner->second.device == a) {
        idle(IdleReason::NoPeerDevice);
        continue;
      }
      const auto b = owner->second.device;
      const auto& db = net.device(b);
      s.remote = b;
      if (db.failed) {
        idle(IdleReason::PeerDown);
        continue;
      }
      if (!db.config.bgp) {
        idle(IdleReason::OneSided);
        continue;
      }
      // B's statement pointing back at one of A's addresses.
      const conf::BgpNeighborConfig* back = nullptr;
      Ipv4 y;
      for (const auto& [addr, cfg] : db.config.bgp->neighbors) {
        auto o = owners.find(addr);
        if (o != owners.end() && o->second.device == a) {
          back = &cfg;
          y = addr;
          break;
        }
      }
      if (!back) {
        idle(IdleReason::OneSided);
        continue;
      }
      s.local_address = y;
      if (db.config.bgp->asn != ncfg.remote_as || back->remote_as != bgp_a.asn) {
        idle(IdleReason::AsnMismatch);
        continue;
      }
      bool up = s.kind == SessionKind::Ebgp ? share_segment(net, owners.at(y), owner->second)
                                            : reachable(a, x) && reachable(b, y);
      if (!up) {
        idle(IdleReason::Unreachable);
        continue;
      }
      if (!listed.insert({std::min(a, b), std::max(a, b)}).second) continue;
      s.state = SessionState::Established;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace mnsim::bgp
