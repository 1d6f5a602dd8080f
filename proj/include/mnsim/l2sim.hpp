#pragma once

// Spanning tree election and VLAN-scoped reachability inside one AS's
// switched network. One tree is shared by all VLANs; every link costs 1.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mnsim/network.hpp"

namespace mnsim::l2 {

struct BridgeId {
  uint32_t priority = 32768;
  uint32_t id = 0;  // switch number

  auto operator<=>(const BridgeId&) const = default;
};

struct SwitchGraph {
  struct Edge {
    size_t a = 0;
    size_t b = 0;
    uint32_t port_a = 0;  // port ids, compared on ties
    uint32_t port_b = 0;
  };
  std::vector<BridgeId> bridges;
  std::vector<Edge> edges;
};

enum class PortRole { Root, Designated, Blocked };

const char* to_string(PortRole role);

struct SpanningTree {
  size_t root = 0;
  std::vector<bool> active;                    // per edge
  std::vector<PortRole> role_a;                // per edge, role of the port at edge.a
  std::vector<PortRole> role_b;                // per edge, role of the port at edge.b
  std::vector<uint32_t> root_cost;             // per switch
  std::vector<std::optional<size_t>> root_edge;  // per switch; none for the root

  std::vector<size_t> active_edges() const;
};

// Throws std::invalid_argument for an empty or disconnected graph.
SpanningTree compute_spanning_tree(const SwitchGraph& graph);

// Same election run independently on every connected component; `root` and
// `root_cost` are then per component (root_edge is none for each root).
SpanningTree compute_spanning_forest(const SwitchGraph& graph);

// One AS's switched network as seen by the data plane.
struct L2Domain {
  uint32_t asn = 0;
  std::vector<DeviceId> switches;  // graph vertex -> device
  std::vector<size_t> edge_segment;  // graph edge -> segment
  SwitchGraph graph;
  SpanningTree tree;
};

// Builds the domain from switch configurations and link state. Failed
// switches and down links take no part in the election.
L2Domain build_domain(const Network& net, uint32_t asn);

struct Endpoint {
  DeviceId device = 0;
  std::string interface;  // "eth0" on hosts, "l2.<vlan>" on the gateway router

  auto operator<=>(const Endpoint&) const = default;
};

struct L2Hop {
  DeviceId device = 0;
  std::string ingress;
  std::string egress;
};

struct L2Path {
  uint16_t vlan = 0;
  std::vector<L2Hop> hops;  // source endpoint, switches, destination endpoint
  uint32_t delay_us = 0;
};

enum class NotReachable {
  VlanIsolation,  // endpoints are in different VLANs
  NoVlan,         // an endpoint's access port has no VLAN
  NotAttached,    // an endpoint is not on a switch port
  PortDown,
  Disconnected,   // no forwarding tree path carrying the VLAN
};

const char* to_string(NotReachable reason);

struct L2Result {
  std::optional<L2Path> path;
  NotReachable reason = NotReachable::Disconnected;

  explicit operator bool() const { return path.has_value(); }
};

// VLAN of an endpoint, if it is attached to a switch port that carries one.
std::optional<uint16_t> endpoint_vlan(const Network& net, const Endpoint& e);

// Throws std::out_of_range for an interface the device does not have.
L2Result l2_reach(const Network& net, const L2Domain& domain, const Endpoint& src, const Endpoint& dst);

// All endpoints (hosts and gateway sub-interfaces) reachable from `src` in its VLAN.
std::vector<Endpoint> broadcast_domain(const Network& net, const L2Domain& domain, const Endpoint& src);

std::string render_spanning_tree(const Network& net, const L2Domain& domain);

}  // namespace mnsim::l2
