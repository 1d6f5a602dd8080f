#include "fixtures.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace mnsim::testing {

void configure_all(Network& net, ConfigPhase phase) {
  for (auto asn : net.asns()) apply_reference_config(net, asn, phase);
  for (const auto& x : net.spec().ixps) apply_reference_config(net, x.id, ConfigPhase::Full);
}

Network reference_network(unsigned regions, unsigned per_region, ConfigPhase phase) {
  Network net(topo::generate_reference_topology(regions, per_region));
  configure_all(net, phase);
  converge_all(net);
  return net;
}

std::string single_as_topology(const std::vector<std::string>& routers, const std::vector<LinkDef>& links,
                               uint32_t asn) {
  std::string out = fmt::format("region r\nas {} role=transit region=r manual\nl3template {} routers=", asn, asn);
  for (size_t i = 0; i < routers.size(); ++i) out += (i ? "," : "") + routers[i];
  out += " links=";
  for (size_t i = 0; i < links.size(); ++i)
    out += fmt::format("{}{}-{}:{}:1000", i ? "," : "", links[i].a, links[i].b, links[i].cost);
  out += fmt::format("\nl2template {} none\n", asn);
  return out;
}

void apply_to_bgp_routers(Network& net, uint32_t asn, const std::string& script) {
  for (auto id : net.devices_in(asn)) {
    const auto& dev = net.device(id);
    if (dev.kind != DeviceKind::Router || !dev.config.bgp) continue;
    auto r = conf::load_config_script(net, asn, dev.name, script, true);
    if (!r.diagnostics.empty()) throw std::runtime_error(r.diagnostics.front().message);
  }
}

void invert_export_policy(Network& net, uint32_t asn) {
  apply_to_bgp_routers(net, asn, "route-map TO_PEER_PROVIDER deny 20\n");
}

void leak_routes(Network& net, uint32_t asn) {
  apply_to_bgp_routers(net, asn, "route-map TO_PEER_PROVIDER permit 10\n");
}

void invert_local_pref(Network& net, uint32_t asn) {
  apply_to_bgp_routers(net, asn, "route-map FROM_PROVIDER permit 10\n set local-preference 400\n");
}

uint32_t first_transit(const Network& net) {
  for (const auto& as : net.spec().ases)
    if (as.role == topo::Role::Transit && !as.auto_configured) return as.asn;
  throw std::logic_error("no transit AS");
}

std::string looking_glass_dump(const Network& net) {
  std::string out;
  for (DeviceId id = 0; id < net.device_count(); ++id) {
    const auto& dev = net.device(id);
    for (auto v : {mon::View::Route, mon::View::Ospf, mon::View::Bgp, mon::View::SpanningTree,
                   mon::View::RunningConfig}) {
      if (v == mon::View::SpanningTree && dev.kind != DeviceKind::Switch) continue;
      out += mon::looking_glass(net, dev.asn, dev.name, v);
    }
  }
  return out;
}

std::string check_golden(const std::string& name, const std::string& actual) {
  namespace fs = std::filesystem;
  fs::path path = fs::path(MNSIM_GOLDEN_DIR) / name;
  const char* update = std::getenv("UPDATE_GOLDENS");
  if (update && std::string(update) == "1") {
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << actual;
    return {};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return fmt::format("missing golden {} (run with UPDATE_GOLDENS=1)", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (ss.str() == actual) return {};
  return fmt::format("{} differs from the computed output ({} vs {} bytes)", path.string(), ss.str().size(),
                     actual.size());
}

}  // namespace mnsim::testing
