#pragma once

// Forwarding: FIB construction from connected, static, OSPF and BGP routes,
// and hop-by-hop traceroute/ping over the converged snapshot.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mnsim/bgpsim.hpp"
#include "mnsim/fib.hpp"
#include "mnsim/igp.hpp"
#include "mnsim/l2sim.hpp"
#include "mnsim/network.hpp"

namespace mnsim {

// Everything computed from the configuration by converge_all().
struct Derived {
  std::map<uint32_t, l2::L2Domain> l2;      // per AS
  std::map<uint32_t, igp::AsIgp> igp;       // per AS
  std::vector<igp::IgpTable> igp_tables;    // per device, empty when not running OSPF
  std::vector<dp::Fib> base_fibs;           // connected + static + OSPF, per device
  std::vector<dp::Fib> fibs;                // base + BGP, per device
  bgp::BgpState bgp;
  std::map<Ipv4, l2::Endpoint> owners;      // configured address -> first owning interface
  std::vector<std::string> diagnostics;
};

// Runs L2, OSPF, session derivation, BGP and FIB construction, and attaches
// the result to the network.
bgp::ConvergenceReport converge_all(Network& net, size_t max_rounds = bgp::kDefaultMaxRounds);

// Converges only when the network changed since the last run.
const Derived& ensure_converged(Network& net);

// Throws std::logic_error when the network has not been converged since its
// last mutation.
const Derived& derived(const Network& net);

}  // namespace mnsim

namespace mnsim::dp {

inline constexpr size_t kInitialTtl = 64;

enum class Outcome { Delivered, Loop, NoRoute, LinkDown, TtlExceeded };

const char* to_string(Outcome outcome);

struct Hop {
  DeviceId device = 0;
  std::string ingress;  // empty at the source
  std::string egress;   // empty at the last hop
  Ipv4 address;         // ingress address, or the egress address at the source
  uint64_t delay_us = 0;  // cumulative on arrival
};

struct ForwardingTrace {
  Ipv4 destination;
  std::vector<Hop> hops;  // L3 devices only
  Outcome outcome = Outcome::NoRoute;
  std::optional<size_t> failed_segment;  // LinkDown
  uint64_t delay_us = 0;
};

Fib build_base_fib(const Network& net, DeviceId device, const igp::IgpTable& igp,
                   std::vector<std::string>* diagnostics = nullptr);
// Adds the Loc-RIB of `speaker`; next hops resolve through `base`. Locally
// originated prefixes become discard routes.
void install_bgp(Fib& fib, const Fib& base, const bgp::Speaker& speaker, const Network& net,
                 std::vector<std::string>* diagnostics = nullptr);

struct ForwardingView {
  const Network& net;
  const std::map<uint32_t, l2::L2Domain>& l2;
  const std::vector<Fib>& fibs;
};

ForwardingTrace walk(const ForwardingView& view, DeviceId src, Ipv4 dst, uint64_t flow = 0);

// Over the converged snapshot.
ForwardingTrace trace(const Network& net, DeviceId src, Ipv4 dst, uint64_t flow = 0);

enum class PingFailure { None, NoSuchDestination, ForwardUnreachable, ReverseUnreachable };

const char* to_string(PingFailure reason);

struct PingResult {
  bool success = false;
  uint64_t rtt_us = 0;
  PingFailure reason = PingFailure::None;
  ForwardingTrace forward;
  ForwardingTrace reverse;
};

PingResult ping(const Network& net, DeviceId src, Ipv4 dst, uint64_t flow = 0);

// One line per hop: index, device, address, cumulative delay in ms.
std::string render_trace(const Network& net, const ForwardingTrace& trace);

}  // namespace mnsim::dp
