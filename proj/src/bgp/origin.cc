#include <fmt/format.h>

#include "mnsim/bgpsim.hpp"

namespace mnsim::bgp {

namespace {

std::vector<DeviceId> bgp_routers(const Network& net, uint32_t asn) {
  std::vector<DeviceId> out;
  for (auto id : net.devices_in(asn)) {
    const auto& dev = net.device(id);
    if (dev.kind == DeviceKind::Router && dev.config.bgp) out.push_back(id);
  }
  if (out.empty()) throw std::invalid_argument(fmt::format("AS {} has no BGP router", asn));
  return out;
}

}  // namespace

std::vector<std::string> originate_prefix(Network& net, uint32_t asn, const Prefix& prefix) {
  std::vector<std::string> warnings;
  auto own = net.plan().ases.find(asn);
  if (own == net.plan().ases.end() || !own->second.as_prefix.contains(prefix))
    warnings.push_back(fmt::format("AS {} originates {} outside its own address space", asn, prefix.str()));
  for (auto id : bgp_routers(net, asn)) net.mutable_device(id).config.bgp->networks.insert(prefix);
  return warnings;
}

std::vector<std::string> withdraw_prefix(Network& net, uint32_t asn, const Prefix& prefix) {
  std::vector<std::string> warnings;
  bool found = false;
  for (auto id : bgp_routers(net, asn)) found |= net.mutable_device(id).config.bgp->networks.erase(prefix) > 0;
  if (!found) warnings.push_back(fmt::format("AS {} did not originate {}", asn, prefix.str()));
  return warnings;
}

HijackRecord inject_hijack(Network& net, uint32_t attacker, const Prefix& victim_prefix, bool more_specific) {
  HijackRecord record{attacker, victim_prefix, {}};
  if (more_specific && victim_prefix.length() < 32) {
    auto [lo, hi] = victim_prefix.split();
    record.announced = {lo, hi};
  } else {
    record.announced = {victim_prefix};
  }
  for (const auto& p : record.announced) originate_prefix(net, attacker, p);
  net.record_hijack(record);
  return record;
}

std::vector<Prefix> mitigate_hijack(Network& net, uint32_t victim, const HijackRecord& hijack) {
  std::vector<Prefix> out;
  for (const auto& p : hijack.announced) {
    if (p.length() >= 32) continue;
    auto [lo, hi] = p.split();
    for (const auto& half : {lo, hi}) {
      originate_prefix(net, victim, half);
      out.push_back(half);
    }
  }
  return out;
}

}  // namespace mnsim::bgp
