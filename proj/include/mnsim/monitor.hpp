#pragma once

// Operator instruments over a converged network: connectivity matrix and its
// diagnosis, looking-glass views, AS-path extraction.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnsim/dataplane.hpp"

namespace mnsim::mon {

struct MatrixCell {
  bool green = false;
  dp::Outcome outcome = dp::Outcome::NoRoute;

  bool operator==(const MatrixCell&) const = default;
};

// cells[i][j]: one-way delivery from AS i's probe host to AS j's probe host.
// The diagonal goes from the probe host to the host of the last router.
struct ConnectivityMatrix {
  std::vector<uint32_t> asns;
  std::vector<std::vector<MatrixCell>> cells;
  uint64_t round = 0;

  bool green(size_t i, size_t j) const { return cells[i][j].green; }
  std::optional<size_t> index_of(uint32_t asn) const;
  std::string to_json() const;
  bool operator==(const ConnectivityMatrix&) const = default;
};

// Planned address of an AS's probe host (or of its diagonal peer).
std::optional<Ipv4> probe_address(const Network& net, uint32_t asn, bool diagonal = false);

ConnectivityMatrix connectivity_matrix(const Network& net);

// Text grid: one row per source AS, '#' green and '.' red.
std::string render_matrix(const ConnectivityMatrix& m);

enum class FindingCode { IntraDomainFault, MissingEbgp, PolicyAsymmetry };

const char* to_string(FindingCode code);

struct Finding {
  uint32_t asn = 0;
  FindingCode code = FindingCode::IntraDomainFault;
  std::optional<uint32_t> other;  // PolicyAsymmetry: the AS that cannot reach back
  std::vector<std::pair<uint32_t, uint32_t>> evidence;  // red cells as (src, dst)
};

struct Diagnosis {
  std::vector<Finding> findings;

  std::string to_json() const;
};

// Red diagonal cell -> IntraDomainFault; column entirely red off the diagonal
// -> MissingEbgp; (i,j) green with (j,i) red, not explained by the first two
// rules for i or j -> PolicyAsymmetry attributed to i.
Diagnosis diagnose(const ConnectivityMatrix& m);

enum class View { Route, Bgp, Ospf, SpanningTree, RunningConfig };

std::optional<View> parse_view(std::string_view name);
const char* to_string(View view);

// Throws std::out_of_range for an unknown device.
std::string looking_glass(const Network& net, uint32_t asn, const std::string& device, View view);

struct AsPath {
  uint32_t src = 0;
  uint32_t dst = 0;
  std::vector<uint32_t> asns;
  std::vector<std::string> labels;  // per adjacent pair
  bool valley_free = true;
  bool diverted = false;  // the trace ended in an AS other than dst
  dp::Outcome outcome = dp::Outcome::NoRoute;

  std::string to_json() const;
};

// Labels: "customer->provider", "provider->customer", "peer", "ixp".
AsPath as_path_of_trace(const Network& net, const dp::ForwardingTrace& trace, uint32_t dst);
AsPath as_path_between(const Network& net, uint32_t src, uint32_t dst);

bool is_valley_free(const std::vector<std::string>& labels);

}  // namespace mnsim::mon
