#include "mnsim/fib.hpp"

#include <algorithm>

namespace mnsim::dp {

uint32_t admin_distance(RouteSource source) {
  switch (source) {
    case RouteSource::Connected: return 0;
    case RouteSource::Static: return 1;
    case RouteSource::Ebgp: return 20;
    case RouteSource::Ospf: return 110;
    case RouteSource::Ibgp: return 200;
  }
  return 255;
}

char source_code(RouteSource source) {
  switch (source) {
    case RouteSource::Connected: return 'C';
    case RouteSource::Static: return 'S';
    case RouteSource::Ospf: return 'O';
    case RouteSource::Ebgp:
    case RouteSource::Ibgp: return 'B';
  }
  return '?';
}

const char* to_string(RouteSource source) {
  switch (source) {
    case RouteSource::Connected: return "connected";
    case RouteSource::Static: return "static";
    case RouteSource::Ospf: return "ospf";
    case RouteSource::Ebgp: return "ebgp";
    case RouteSource::Ibgp: return "ibgp";
  }
  return "?";
}

bool Fib::install(FibEntry entry) {
  auto& bucket = by_length_[entry.prefix.length()];
  auto key = entry.prefix.network().value();
  auto it = bucket.find(key);
  if (it != bucket.end() && it->second.distance <= entry.distance) return false;
  bucket.insert_or_assign(key, std::move(entry));
  return true;
}

void Fib::remove(const Prefix& prefix) { by_length_[prefix.length()].erase(prefix.network().value()); }

const FibEntry* Fib::find(const Prefix& prefix) const {
  const auto& bucket = by_length_[prefix.length()];
  auto it = bucket.find(prefix.network().value());
  return it == bucket.end() ? nullptr : &it->second;
}

const FibEntry* Fib::longest_match(Ipv4 address) const {
  for (int len = 32; len >= 0; --len) {
    const auto& bucket = by_length_[len];
    if (bucket.empty()) continue;
    auto it = bucket.find(address.value() & netmask(static_cast<uint8_t>(len)));
    if (it != bucket.end()) return &it->second;
  }
  return nullptr;
}

std::optional<NextHop> Fib::lookup(Ipv4 address, uint64_t flow) const {
  const auto* e = longest_match(address);
  if (!e || e->next_hops.empty()) return std::nullopt;
  return e->next_hops[flow % e->next_hops.size()];
}

std::vector<const FibEntry*> Fib::entries() const {
  std::vector<const FibEntry*> out;
  for (const auto& bucket : by_length_)
    for (const auto& [key, e] : bucket) out.push_back(&e);
  std::sort(out.begin(), out.end(), [](const FibEntry* a, const FibEntry* b) { return a->prefix < b->prefix; });
  return out;
}

size_t Fib::size() const {
  size_t n = 0;
  for (const auto& bucket : by_length_) n += bucket.size();
  return n;
}

}  // namespace mnsim::dp
