#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mnsim::text {

std::string_view trim(std::string_view s);

// Splits on runs of whitespace.
std::vector<std::string_view> tokens(std::string_view s);

// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

std::vector<std::string> lines(std::string_view s);

template <typename T>
std::optional<T> to_number(std::string_view s) {
  T value{};
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool starts_with(std::string_view s, std::string_view prefix);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace mnsim::text
