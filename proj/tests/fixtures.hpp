#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "mnsim/service.hpp"

namespace mnsim::testing {

// Generated topology with every AS and route server on `phase` reference
// configs, converged.
Network reference_network(unsigned regions, unsigned per_region, ConfigPhase phase = ConfigPhase::Full);

// Applies `phase` reference configs to every AS and every route server.
void configure_all(Network& net, ConfigPhase phase);

struct LinkDef {
  std::string a, b;
  uint32_t cost = 1;
};

// One student-operated AS with the given routers and links, no switches.
std::string single_as_topology(const std::vector<std::string>& routers, const std::vector<LinkDef>& links,
                               uint32_t asn = 1);

// Runs `script` on every router of `asn` that has BGP.
void apply_to_bgp_routers(Network& net, uint32_t asn, const std::string& script);

// TO_PEER_PROVIDER entry 20 becomes deny: the AS exports nothing to peers and providers.
void invert_export_policy(Network& net, uint32_t asn);
// TO_PEER_PROVIDER entry 10 becomes permit: peer and provider routes leak upward.
void leak_routes(Network& net, uint32_t asn);
// Routes from providers get a higher local-preference than customer routes.
void invert_local_pref(Network& net, uint32_t asn);

// First transit AS that is student-operated.
uint32_t first_transit(const Network& net);

// Every looking-glass view of every device, in device order.
std::string looking_glass_dump(const Network& net);

// Compares `actual` with tests/golden/<name>; with UPDATE_GOLDENS=1 rewrites
// the file instead. Returns an empty string on match, else a description.
std::string check_golden(const std::string& name, const std::string& actual);

}  // namespace mnsim::testing
