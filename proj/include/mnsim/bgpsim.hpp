#pragma once

// Inter-domain routing: sessions derived from neighbor statements, route-map
// policy, the decision process, and synchronous propagation to a fixed point.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mnsim/confcli.hpp"
#include "mnsim/ip.hpp"
#include "mnsim/network.hpp"

namespace mnsim::bgp {

enum class Origin { Igp, Incomplete };
enum class SessionKind { Ibgp, Ebgp };

const char* to_string(SessionKind kind);

struct BgpRoute {
  Prefix prefix;
  std::vector<uint32_t> as_path;  // nearest AS first
  Ipv4 next_hop;
  uint32_t local_pref = 100;
  uint32_t med = 0;
  std::set<Community> communities;
  Origin origin = Origin::Igp;
  bool local = false;  // originated by this router
  SessionKind kind = SessionKind::Ebgp;
  Ipv4 peer_address;
  Ipv4 peer_router_id;

  bool operator==(const BgpRoute&) const = default;
};

std::string render_as_path(const std::vector<uint32_t>& path);

// Runs `route` through the named route-map of `config`. First matching entry
// wins; deny, no match, or an unknown map yield nullopt. A reference to a
// missing prefix-list or community-list makes that entry non-matching and is
// reported through `diagnostics`. Prepends use `prepend_asn`.
std::optional<BgpRoute> evaluate_route_map(const conf::DeviceConfig& config, const std::string& map,
                                           const BgpRoute& route, uint32_t prepend_asn,
                                           std::vector<std::string>* diagnostics = nullptr);

enum class DecisionStep {
  SingleCandidate,
  LocalOrigin,
  LocalPref,
  AsPathLength,
  OriginKind,
  Med,
  EbgpOverIbgp,
  IgpCost,
  RouterId,
  PeerAddress,
};

const char* to_string(DecisionStep step);

// IGP cost toward a next hop; nullopt when it cannot be resolved.
using IgpCostFn = std::function<std::optional<uint32_t>(Ipv4)>;

struct Decision {
  size_t index = 0;
  DecisionStep step = DecisionStep::SingleCandidate;
};

// Candidates whose next hop does not resolve are ignored (locally originated
// routes always resolve, at cost 0). Returns nullopt when none is usable.
std::optional<Decision> best_route(const std::vector<BgpRoute>& candidates, const IgpCostFn& igp_cost);

enum class SessionState { Established, Idle };
enum class IdleReason { None, OneSided, AsnMismatch, NoPeerDevice, Unreachable, PeerDown };

const char* to_string(IdleReason reason);

struct BgpSession {
  DeviceId local = 0;
  Ipv4 local_address;
  uint32_t local_as = 0;
  std::optional<DeviceId> remote;
  Ipv4 remote_address;
  uint32_t remote_as = 0;
  SessionKind kind = SessionKind::Ebgp;
  SessionState state = SessionState::Idle;
  IdleReason reason = IdleReason::None;
};

// Whether forwarding from `from` delivers to the device owning `to`.
using ReachFn = std::function<bool(DeviceId from, Ipv4 to)>;

// Established sessions appear once per device pair, seen from the lower
// device id; idle ones once per offending neighbor statement.
std::vector<BgpSession> derive_sessions(const Network& net, const ReachFn& reachable);

struct Peer {
  size_t session = 0;
  Ipv4 local_address;
  Ipv4 remote_address;
  uint32_t remote_as = 0;
  SessionKind kind = SessionKind::Ebgp;
  size_t remote_speaker = 0;
  Ipv4 remote_router_id;
};

struct Speaker {
  DeviceId device = 0;
  uint32_t asn = 0;
  Ipv4 router_id;
  bool route_server = false;
  std::vector<Peer> peers;
  std::map<Prefix, BgpRoute> originated;
  std::vector<std::map<Prefix, BgpRoute>> adj_in_pre;   // per peer, as received
  std::vector<std::map<Prefix, BgpRoute>> adj_in_post;  // per peer, after inbound policy
  std::vector<std::map<Prefix, BgpRoute>> adj_out;      // per peer, as sent
  std::map<Prefix, BgpRoute> loc_rib;
  std::map<Prefix, DecisionStep> decided_by;

  // Locally originated routes followed by every accepted route for `prefix`.
  std::vector<BgpRoute> candidates(const Prefix& prefix) const;
  size_t adj_rib_in_size() const;
};

struct ConvergenceReport {
  size_t rounds = 0;
  bool converged = false;
  std::map<DeviceId, size_t> adj_rib_in_sizes;
  std::vector<Prefix> churning;  // prefixes still changing when the round limit hit
  std::vector<std::string> diagnostics;
};

struct BgpState {
  std::vector<BgpSession> sessions;
  std::vector<Speaker> speakers;  // ascending (asn, router-id)
  ConvergenceReport report;

  const Speaker* speaker(DeviceId device) const;
};

using DeviceIgpCostFn = std::function<std::optional<uint32_t>(DeviceId, Ipv4)>;

inline constexpr size_t kDefaultMaxRounds = 1000;

BgpState converge(const Network& net, std::vector<BgpSession> sessions, const DeviceIgpCostFn& igp_cost,
                  size_t max_rounds = kDefaultMaxRounds);

// Adds or removes a `network` statement on every BGP router of `asn`. Throws
// std::invalid_argument when the AS has no BGP router. Returns warnings.
std::vector<std::string> originate_prefix(Network& net, uint32_t asn, const Prefix& prefix);
std::vector<std::string> withdraw_prefix(Network& net, uint32_t asn, const Prefix& prefix);

// The attacker originates `victim_prefix`, or its two halves. The ground truth
// is recorded on the network for the grader.
HijackRecord inject_hijack(Network& net, uint32_t attacker, const Prefix& victim_prefix, bool more_specific);

// The victim announces both halves of every prefix the hijack announced.
std::vector<Prefix> mitigate_hijack(Network& net, uint32_t victim, const HijackRecord& hijack);

// Router-id of a device: configured, else the loopback address.
Ipv4 router_id(const DeviceState& device);

}  // namespace mnsim::bgp
