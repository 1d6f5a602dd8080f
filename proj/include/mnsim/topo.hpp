#pragma once

// Topology specifications: ASes, inter-AS links, IXPs and the per-AS router
// and switch templates, plus the text file format and the generator for the
// regional reference topology.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mnsim/ip.hpp"

namespace mnsim::topo {

enum class Role { Tier1, Transit, Stub };

const char* to_string(Role role);

// Relationship of a link as seen from endpoint a.
enum class Relationship { AProviderOfB, BProviderOfA, Peer };

struct RouterRef {
  uint32_t asn = 0;
  std::string router;

  std::string str() const;
  auto operator<=>(const RouterRef&) const = default;
};

struct IntraLink {
  std::string a;
  std::string b;
  uint32_t cost = 1;
  uint32_t delay_us = 1000;

  bool operator==(const IntraLink&) const = default;
};

struct L3Template {
  std::vector<std::string> routers;
  std::vector<IntraLink> links;
  bool hosts = true;  // one host behind every router

  // 1-based position of `router`, 0 if absent.
  size_t index_of(const std::string& router) const;
  bool operator==(const L3Template&) const = default;
};

struct SwitchSpec {
  std::string name;
  uint32_t priority = 32768;

  bool operator==(const SwitchSpec&) const = default;
};

struct HostPort {
  std::string sw;
  std::string host;
  uint16_t vlan = 0;

  bool operator==(const HostPort&) const = default;
};

struct L2Template {
  std::vector<SwitchSpec> switches;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<HostPort> hosts;
  std::string gateway_switch;
  std::string gateway_router;

  // The VLANs carried by the network: those that have at least one host.
  std::set<uint16_t> vlans() const;
  size_t index_of(const std::string& sw) const;
  bool operator==(const L2Template&) const = default;
};

struct AsSpec {
  uint32_t asn = 0;
  Role role = Role::Transit;
  std::string region;
  L3Template l3;
  std::optional<L2Template> l2;
  bool auto_configured = false;

  bool operator==(const AsSpec&) const = default;
};

struct InterAsLink {
  RouterRef a;
  RouterRef b;
  Relationship rel = Relationship::Peer;
  uint32_t delay_us = 1000;
  uint64_t bandwidth_bps = 1'000'000'000;
  bool up = true;

  bool operator==(const InterAsLink&) const = default;
};

struct IxpSpec {
  uint32_t id = 0;
  std::vector<RouterRef> members;
  uint32_t delay_us = 1000;

  bool operator==(const IxpSpec&) const = default;
};

struct TopologySpec {
  std::vector<std::string> regions;
  std::vector<AsSpec> ases;
  std::vector<InterAsLink> links;
  std::vector<IxpSpec> ixps;

  const AsSpec* find_as(uint32_t asn) const;
  bool operator==(const TopologySpec&) const = default;
};

// Router and switch shapes of the 2019 edition: eight routers, four switches
// with two hosts each, gateway on the first router.
L3Template default_l3_template();
L2Template default_l2_template();

enum class ViolationCode {
  DuplicateAsn,
  AsnOutOfRange,
  UnknownRegion,
  DuplicateRegion,
  EmptyTemplate,
  InvalidName,
  DuplicateRouter,
  UnknownRouter,
  DuplicateLink,
  DisconnectedRouters,
  TemplateTooLarge,
  DuplicateSwitch,
  UnknownSwitch,
  DisconnectedSwitches,
  DuplicateHost,
  BadGateway,
  UnknownAs,
  SelfLink,
  DuplicateAsPair,
  IxpIdInvalid,
  IxpTooFewMembers,
  DuplicateMember,
  DisconnectedAsGraph,
};

const char* to_string(ViolationCode code);

struct Violation {
  enum class Element { Global, As, Link, Ixp };

  ViolationCode code;
  Element element = Element::Global;
  size_t index = 0;  // position in the corresponding spec vector
  std::string detail;

  std::string str() const;
};

std::vector<Violation> validate(const TopologySpec& spec);

class TopologyError : public std::runtime_error {
 public:
  TopologyError(size_t line, const std::string& message);
  size_t line() const { return line_; }  // 0 when not tied to a line

 private:
  size_t line_;
};

// Throws TopologyError for syntax errors and for any validation violation.
TopologySpec parse_topology_spec(std::string_view text);
std::string render_topology_spec(const TopologySpec& spec);

// `regions` regions of `ases_per_region` ASes: two Tier1s, pairs of transit
// ASes stacked in layers, and two stubs. Throws std::invalid_argument when
// regions < 1, ases_per_region < 4 or ases_per_region is odd.
TopologySpec generate_reference_topology(unsigned regions, unsigned ases_per_region);

// Relationship between two ASes from the point of view of `self`, derived from
// the direct links. Only one direct link per AS pair is allowed.
enum class Peering { Customer, Provider, Peer };
const char* to_string(Peering p);
std::optional<Peering> relationship(const TopologySpec& spec, uint32_t self, uint32_t other);

struct AsAddresses {
  Prefix as_prefix;
  Prefix l2_subnet;
  std::map<uint16_t, Prefix> vlan_subnets;
  std::map<std::string, Prefix> host_lans;
  std::map<std::string, Ipv4> loopbacks;
  // keyed by the ordered router-name pair
  std::map<std::pair<std::string, std::string>, Prefix> intra_links;
};

struct AddressPlan {
  std::map<uint32_t, AsAddresses> ases;
  std::vector<Prefix> inter_as_links;  // parallel to TopologySpec::links
  std::map<uint32_t, Prefix> ixps;

  // Address of `asn` on inter-AS link `index`.
  Ipv4 link_address(const TopologySpec& spec, size_t index, uint32_t asn) const;
  static Ipv4 ixp_member_address(uint32_t ixp, uint32_t asn);
  static Ipv4 route_server_address(uint32_t ixp);

  std::vector<Prefix> all_subnets() const;
};

// Throws std::invalid_argument for an ASN above 126.
AddressPlan allocate_addresses(const TopologySpec& spec);

// Ordered router pair as used for intra-link keys.
std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b);

}  // namespace mnsim::topo
