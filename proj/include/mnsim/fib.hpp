#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mnsim/igp.hpp"
#include "mnsim/ip.hpp"

namespace mnsim::dp {

enum class RouteSource { Connected, Static, Ospf, Ebgp, Ibgp };

uint32_t admin_distance(RouteSource source);
char source_code(RouteSource source);  // C, S, O, B
const char* to_string(RouteSource source);

using NextHop = igp::NextHop;

inline constexpr const char* kNullInterface = "Null0";

struct FibEntry {
  Prefix prefix;
  RouteSource source = RouteSource::Connected;
  uint32_t distance = 0;
  uint32_t metric = 0;
  std::vector<NextHop> next_hops;  // a single Null0 hop discards
  std::optional<Ipv4> bgp_next_hop;

  bool discard() const { return next_hops.size() == 1 && next_hops.front().interface == kNullInterface; }
  bool operator==(const FibEntry&) const = default;
};

class Fib {
 public:
  // Installs `entry` unless an entry for the same prefix has a lower or equal
  // administrative distance. Returns whether it was installed.
  bool install(FibEntry entry);
  void remove(const Prefix& prefix);

  const FibEntry* find(const Prefix& prefix) const;
  const FibEntry* longest_match(Ipv4 address) const;
  // Longest match, then next_hops[flow % size].
  std::optional<NextHop> lookup(Ipv4 address, uint64_t flow) const;

  // Sorted by prefix.
  std::vector<const FibEntry*> entries() const;
  size_t size() const;

 private:
  std::array<std::unordered_map<uint32_t, FibEntry>, 33> by_length_;
};

}  // namespace mnsim::dp
