#include "mnsim/ip.hpp"

#include <fmt/format.h>

#include "mnsim/text.hpp"

namespace mnsim {

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  auto parts = text::split(text, '.');
  if (parts.size() != 4) return std::nullopt;
  uint32_t value = 0;
  for (auto part : parts) {
    if (part.empty() || part.size() > 3) return std::nullopt;
    auto octet = text::to_number<uint32_t>(part);
    if (!octet || *octet > 255) return std::nullopt;
    value = (value << 8) | *octet;
  }
  return Ipv4(value);
}

Ipv4 Ipv4::from_string(std::string_view text) {
  auto a = parse(text);
  if (!a) throw std::invalid_argument(fmt::format("malformed IPv4 address '{}'", text));
  return *a;
}

std::string Ipv4::str() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xff, (value_ >> 8) & 0xff,
                     value_ & 0xff);
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = Ipv4::parse(text.substr(0, slash));
  auto len = text::to_number<uint32_t>(text.substr(slash + 1));
  if (!addr || !len || *len > 32) return std::nullopt;
  Prefix p(*addr, static_cast<uint8_t>(*len));
  // Host bits must be clear, as on a real CLI ("network 3.0.0.1/8" is rejected).
  if (p.network() != *addr) return std::nullopt;
  return p;
}

Prefix Prefix::from_string(std::string_view text) {
  auto p = parse(text);
  if (!p) throw std::invalid_argument(fmt::format("malformed prefix '{}'", text));
  return *p;
}

std::pair<Prefix, Prefix> Prefix::split() const {
  if (length_ >= 32) throw std::invalid_argument("cannot split a /32");
  auto len = static_cast<uint8_t>(length_ + 1);
  return {Prefix(network_, len), Prefix(Ipv4(network_.value() | (uint32_t{1} << (32 - len))), len)};
}

std::string Prefix::str() const { return fmt::format("{}/{}", network_.str(), length_); }

std::optional<InterfaceAddress> InterfaceAddress::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = Ipv4::parse(text.substr(0, slash));
  auto len = text::to_number<uint32_t>(text.substr(slash + 1));
  if (!addr || !len || *len > 32) return std::nullopt;
  return InterfaceAddress{*addr, static_cast<uint8_t>(*len)};
}

std::string InterfaceAddress::str() const { return fmt::format("{}/{}", address.str(), length); }

std::optional<Community> Community::parse(std::string_view text) {
  auto parts = text::split(text, ':');
  if (parts.size() != 2) return std::nullopt;
  auto a = text::to_number<uint16_t>(parts[0]);
  auto t = text::to_number<uint16_t>(parts[1]);
  if (!a || !t) return std::nullopt;
  return Community{*a, *t};
}

std::string Community::str() const { return fmt::format("{}:{}", asn, tag); }

}  // namespace mnsim
