#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mnsim {

// IPv4 address in host byte order.
class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(uint32_t value) : value_(value) {}
  constexpr Ipv4(uint8_t a, uint8_t b, uint8_t c, uint8_t d)
      : value_((uint32_t{a} << 24) | (uint32_t{b} << 16) | (uint32_t{c} << 8) | d) {}

  static std::optional<Ipv4> parse(std::string_view text);
  static Ipv4 from_string(std::string_view text);  // throws std::invalid_argument

  constexpr uint32_t value() const { return value_; }
  constexpr bool is_unspecified() const { return value_ == 0; }
  std::string str() const;

  constexpr auto operator<=>(const Ipv4&) const = default;

 private:
  uint32_t value_ = 0;
};

constexpr uint32_t netmask(uint8_t length) {
  return length == 0 ? 0u : ~uint32_t{0} << (32 - length);
}

// A network prefix; the host bits of `network` are always zero.
class Prefix {
 public:
  constexpr Prefix() = default;
  constexpr Prefix(Ipv4 address, uint8_t length)
      : network_(address.value() & netmask(length)), length_(length) {
    if (length > 32) throw std::invalid_argument("prefix length > 32");
  }

  static std::optional<Prefix> parse(std::string_view text);
  static Prefix from_string(std::string_view text);

  constexpr Ipv4 network() const { return network_; }
  constexpr uint8_t length() const { return length_; }
  constexpr Ipv4 first() const { return network_; }
  constexpr Ipv4 last() const { return Ipv4(network_.value() | ~netmask(length_)); }
  constexpr uint64_t size() const { return uint64_t{1} << (32 - length_); }

  constexpr bool contains(Ipv4 a) const {
    return (a.value() & netmask(length_)) == network_.value();
  }
  constexpr bool contains(const Prefix& p) const {
    return p.length_ >= length_ && contains(p.network_);
  }
  constexpr bool overlaps(const Prefix& p) const { return contains(p) || p.contains(*this); }

  // The two halves one bit longer; requires length() < 32.
  std::pair<Prefix, Prefix> split() const;

  std::string str() const;

  constexpr auto operator<=>(const Prefix&) const = default;

 private:
  Ipv4 network_;
  uint8_t length_ = 0;
};

// An interface address with its subnet length, e.g. 3.0.1.1/30.
struct InterfaceAddress {
  Ipv4 address;
  uint8_t length = 32;

  static std::optional<InterfaceAddress> parse(std::string_view text);
  Prefix subnet() const { return Prefix(address, length); }
  std::string str() const;

  auto operator<=>(const InterfaceAddress&) const = default;
};

// BGP community in asn:tag form.
struct Community {
  uint16_t asn = 0;
  uint16_t tag = 0;

  static std::optional<Community> parse(std::string_view text);
  std::string str() const;

  auto operator<=>(const Community&) const = default;
};

}  // namespace mnsim

template <>
struct std::hash<mnsim::Ipv4> {
  size_t operator()(mnsim::Ipv4 a) const noexcept { return std::hash<uint32_t>{}(a.value()); }
};
