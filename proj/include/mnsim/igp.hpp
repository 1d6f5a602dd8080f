#pragma once

// Single-area OSPF, computed from a global snapshot of one AS: shortest paths
// with up to kMaxEcmp equal-cost next hops per prefix.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mnsim/ip.hpp"
#include "mnsim/network.hpp"

namespace mnsim::igp {

inline constexpr size_t kMaxEcmp = 8;

struct NextHop {
  std::string interface;
  Ipv4 gateway;  // 0.0.0.0 for directly connected prefixes

  auto operator<=>(const NextHop&) const = default;
};

struct IgpRoute {
  uint32_t cost = 0;
  std::vector<NextHop> next_hops;  // sorted, non-empty

  bool operator==(const IgpRoute&) const = default;
};

using IgpTable = std::map<Prefix, IgpRoute>;

// Abstract link-state database of one AS.
struct AsGraph {
  struct Adjacency {
    size_t to = 0;
    uint32_t cost = 1;  // cost of the sending interface
    std::string interface;
    Ipv4 neighbor_address;
  };
  struct Stub {
    Prefix prefix;
    std::string interface;
  };
  struct Router {
    std::vector<Adjacency> adjacencies;
    std::vector<Stub> stubs;
  };
  std::vector<Router> routers;
};

// One table per router of the graph.
std::vector<IgpTable> compute_igp(const AsGraph& graph);

struct AsIgp {
  uint32_t asn = 0;
  std::vector<DeviceId> routers;  // graph vertex -> device
  AsGraph graph;
  std::vector<IgpTable> tables;
};

// Routers take part if they are alive and have `router ospf`. An interface is
// OSPF-enabled when a network statement covers its subnet; adjacencies form
// over segments where both ends are enabled and up.
AsGraph build_as_graph(const Network& net, uint32_t asn, std::vector<DeviceId>& routers);
AsIgp compute_as_igp(const Network& net, uint32_t asn);

// Cost toward an address (longest match) or an exact prefix.
std::optional<uint32_t> igp_distance(const IgpTable& table, Ipv4 address);
std::optional<uint32_t> igp_distance(const IgpTable& table, const Prefix& prefix);

}  // namespace mnsim::igp
