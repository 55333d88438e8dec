#pragma once

// Exact decimal rescaling of floating-point text.
//
// Values that cross a power-of-ten unit boundary (nm <-> m, GHz <-> Hz) are
// rescaled by editing the decimal exponent of their text form and letting a
// correctly rounded parser do the single rounding. Multiplying by 1e-9 would
// round twice and break exact round trips.

#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace bawkit::detail {

inline std::optional<double> parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

/// Parse decimal text and multiply by 10^pow10 with a single rounding.
inline std::optional<double> parse_scaled(std::string_view text, int pow10) {
  if (text.empty()) return std::nullopt;
  std::string_view mantissa = text;
  long exponent = 0;
  if (auto pos = text.find_first_of("eE"); pos != std::string_view::npos) {
    mantissa = text.substr(0, pos);
    std::string_view exp_text = text.substr(pos + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size() || exp_text.empty()) {
      return std::nullopt;
    }
  }
  // Reject text the plain parser would reject (e.g. "1.2.3", "abc").
  if (!parse_double(mantissa)) return std::nullopt;
  std::string shifted(mantissa);
  shifted += 'e';
  shifted += std::to_string(exponent + pow10);
  return parse_double(shifted);
}

/// Shortest round-trip text of v.
inline std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Text t such that parse_scaled(t, pow10) == v exactly.
inline std::string format_scaled(double v, int pow10) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string s(buf, ptr);
  auto pos = s.find('e');
  long exponent = std::strtol(s.c_str() + pos + 1, nullptr, 10);
  return s.substr(0, pos) + "e" + std::to_string(exponent - pow10);
}

}  // namespace bawkit::detail
