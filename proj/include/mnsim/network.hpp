#pragma once

// The instantiated mini-Internet: one DeviceState per router, switch, host and
// IXP route server, wired through segments. Configuration lives on the
// devices; everything computed from it (trees, IGP, BGP, FIBs) is produced by
// converge_all() and attached as an immutable Derived snapshot.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnsim/confcli.hpp"
#include "mnsim/ip.hpp"
#include "mnsim/topo.hpp"

namespace mnsim {

using DeviceId = uint32_t;

struct DeviceState {
  DeviceKind kind = DeviceKind::Router;
  uint32_t asn = 0;  // route servers carry the IXP id
  std::string name;
  std::vector<std::string> ports;  // physical ports in wiring order
  size_t router_index = 0;         // 1-based template position (routers)
  size_t switch_index = 0;         // 1-based template position (switches)
  uint32_t default_stp_priority = 32768;
  bool failed = false;
  conf::DeviceConfig config;

  std::string label() const;  // "<asn>.<name>"
};

struct Attachment {
  DeviceId device = 0;
  std::string port;
};

enum class SegmentKind { Intra, InterAs, HostLan, Ixp, L2 };

const char* to_string(SegmentKind kind);

struct Segment {
  SegmentKind kind = SegmentKind::Intra;
  std::vector<Attachment> ends;
  uint32_t delay_us = 0;
  bool up = true;
  uint32_t asn = 0;                 // owning AS, 0 for inter-AS and IXP segments
  std::optional<size_t> spec_link;  // InterAs: index into TopologySpec::links
  uint32_t ixp = 0;                 // Ixp: the IXP id
};

struct HijackRecord {
  uint32_t attacker = 0;
  Prefix victim_prefix;
  std::vector<Prefix> announced;
};

struct Derived;

class Network {
 public:
  // Wires the topology; every device starts with an empty configuration.
  // Throws topo::TopologyError when the spec does not validate.
  explicit Network(topo::TopologySpec spec);

  const topo::TopologySpec& spec() const { return spec_; }
  const topo::AddressPlan& plan() const { return plan_; }

  size_t device_count() const { return devices_.size(); }
  const DeviceState& device(DeviceId id) const { return devices_.at(id); }
  // Any mutation makes the derived state stale until the next converge.
  DeviceState& mutable_device(DeviceId id);
  std::optional<DeviceId> find(uint32_t asn, std::string_view name) const;
  DeviceId id(uint32_t asn, std::string_view name) const;  // throws std::out_of_range
  std::vector<DeviceId> devices_in(uint32_t asn) const;
  std::vector<uint32_t> asns() const;  // ASes only, ascending
  bool is_ixp(uint32_t asn) const;

  const std::vector<Segment>& segments() const { return segments_; }
  void set_segment_up(size_t segment, bool up);
  std::optional<size_t> segment_at(DeviceId device, std::string_view port) const;
  // The intra-AS or inter-AS link between two routers.
  std::optional<size_t> find_link(const topo::RouterRef& a, const topo::RouterRef& b) const;
  void set_device_failed(DeviceId id, bool failed);

  const std::vector<HijackRecord>& hijacks() const { return hijacks_; }
  void record_hijack(HijackRecord record) { hijacks_.push_back(std::move(record)); }

  // The probe host of an AS, and the host used as the far end of its diagonal cell.
  std::optional<DeviceId> probe_host(uint32_t asn) const;
  std::optional<DeviceId> diagonal_host(uint32_t asn) const;

  const std::shared_ptr<const Derived>& derived() const { return derived_; }
  void set_derived(std::shared_ptr<const Derived> d);
  bool stale() const { return stale_ || !derived_; }
  uint64_t epoch() const { return epoch_; }

 private:
  DeviceId add_device(DeviceState d);
  size_t connect(Segment s);

  topo::TopologySpec spec_;
  topo::AddressPlan plan_;
  std::vector<DeviceState> devices_;
  std::map<std::pair<uint32_t, std::string>, DeviceId, std::less<>> by_name_;
  std::vector<Segment> segments_;
  std::vector<std::map<std::string, size_t, std::less<>>> port_segment_;
  std::vector<HijackRecord> hijacks_;
  std::shared_ptr<const Derived> derived_;
  bool stale_ = true;
  uint64_t epoch_ = 0;
};

// Port naming.
std::string host_name(const std::string& router);                    // ROUTER1-host
std::string intra_port(const std::string& peer_router);              // port_ROUTER2
std::string ext_port(uint32_t peer_asn, const std::string& router);  // ext_4_ROUTER1
std::string ixp_port(uint32_t ixp);                                  // ixp_61
inline constexpr const char* kRouteServerName = "RS";

// "l2.10" -> "l2"; plain names map to themselves.
std::string_view physical_port(std::string_view interface);
std::optional<uint16_t> subinterface_vlan(std::string_view interface);

// Whether an interface can pass traffic: configured address, not shut down,
// device alive, and (except loopbacks) its segment up.
bool interface_up(const Network& net, DeviceId id, const std::string& interface);

enum class ConfigPhase { Intra, Sessions, Full };

// Per-device scripts (device name -> script) for one AS, or for an IXP's route
// server when `asn` is an IXP id. Phases are cumulative.
std::map<std::string, std::string> generate_reference_config(const Network& net, uint32_t asn,
                                                             ConfigPhase phase = ConfigPhase::Full);

// Replaces the configuration of every device of `asn` with the reference one.
void apply_reference_config(Network& net, uint32_t asn, ConfigPhase phase = ConfigPhase::Full);

// Wires the network and pre-configures auto-configured ASes and all route servers.
Network instantiate(const topo::TopologySpec& spec);

}  // namespace mnsim
