#include "bawkit/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "bawkit/errors.hpp"
#include "decimal.hpp"

namespace bawkit {

std::string_view to_string(FrequencyUnit unit) {
  switch (unit) {
    case FrequencyUnit::hz: return "HZ";
    case FrequencyUnit::khz: return "KHZ";
    case FrequencyUnit::mhz: return "MHZ";
    case FrequencyUnit::ghz: return "GHZ";
  }
  return "GHZ";
}

std::string_view to_string(DataFormat format) {
  switch (format) {
    case DataFormat::ri: return "RI";
    case DataFormat::ma: return "MA";
    case DataFormat::db: return "DB";
  }
  return "MA";
}

int unit_exponent(FrequencyUnit unit) {
  switch (unit) {
    case FrequencyUnit::hz: return 0;
    case FrequencyUnit::khz: return 3;
    case FrequencyUnit::mhz: return 6;
    case FrequencyUnit::ghz: return 9;
  }
  return 9;
}

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Options {
  FrequencyUnit unit = FrequencyUnit::ghz;
  DataFormat format = DataFormat::ma;
  double z0 = 50.0;
};

Options parse_options(std::string_view line, std::size_t line_no) {
  Options o;
  const auto tokens = split_ws(line.substr(1));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string t = upper(tokens[i]);
    if (t == "HZ") o.unit = FrequencyUnit::hz;
    else if (t == "KHZ") o.unit = FrequencyUnit::khz;
    else if (t == "MHZ") o.unit = FrequencyUnit::mhz;
    else if (t == "GHZ") o.unit = FrequencyUnit::ghz;
    else if (t == "RI") o.format = DataFormat::ri;
    else if (t == "MA") o.format = DataFormat::ma;
    else if (t == "DB") o.format = DataFormat::db;
    else if (t == "S") continue;
    else if (t == "Y" || t == "Z" || t == "G" || t == "H") {
      throw ParseError("only S parameters are supported", line_no);
    } else if (t == "R") {
      if (i + 1 >= tokens.size()) throw ParseError("option R needs a value", line_no);
      auto z = detail::parse_double(tokens[++i]);
      if (!z || !(*z > 0.0) || !std::isfinite(*z)) {
        throw ParseError("reference impedance must be positive", line_no);
      }
      o.z0 = *z;
    } else {
      throw ParseError("unknown option '" + std::string(tokens[i]) + "'", line_no);
    }
  }
  return o;
}

Complex decode(double x, double y, DataFormat format) {
  switch (format) {
    case DataFormat::ri: return {x, y};
    case DataFormat::ma: return std::polar(x, y * kDegree);
    case DataFormat::db: return std::polar(std::pow(10.0, x / 20.0), y * kDegree);
  }
  return {};
}

std::pair<double, double> encode(Complex s, DataFormat format) {
  switch (format) {
    case DataFormat::ri: return {s.real(), s.imag()};
    case DataFormat::ma: return {std::abs(s), std::arg(s) / kDegree};
    case DataFormat::db: return {20.0 * std::log10(std::abs(s)), std::arg(s) / kDegree};
  }
  return {};
}

}  // namespace

TouchstoneData parse_touchstone(std::string_view text) {
  TouchstoneData data;
  bool have_options = false;
  std::vector<std::string_view> pending;
  std::size_t record_line = 0;
  std::size_t line_no = 0;

  auto finish_record = [&] {
    const double f = *detail::parse_scaled(pending[0], unit_exponent(data.unit));
    if (!data.frequencies.empty() && !(f > data.frequencies.back())) {
      throw ParseError("frequencies must be strictly increasing", record_line);
    }
    TwoPort s;
    for (std::size_t k = 0; k < 4; ++k) {
      s[k] = decode(*detail::parse_double(pending[1 + 2 * k]),
                    *detail::parse_double(pending[2 + 2 * k]), data.format);
    }
    data.frequencies.push_back(f);
    data.s.push_back(s);
    pending.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0].front() == '#') {
      if (!have_options) {
        const Options o = parse_options(line.substr(line.find('#')), line_no);
        data.unit = o.unit;
        data.format = o.format;
        data.z0 = o.z0;
        have_options = true;
      }
      continue;
    }
    if (!have_options) throw ParseError("data before the option line", line_no);
    if (tokens[0].front() == '[') throw ParseError("version 2 keywords are not supported", line_no);

    for (std::string_view t : tokens) {
      const bool ok = pending.empty() ? detail::parse_scaled(t, 0).has_value()
                                      : detail::parse_double(t).has_value();
      if (!ok) throw ParseError("not a number: '" + std::string(t) + "'", line_no);
    }
    if (pending.empty()) record_line = line_no;
    if (pending.size() + tokens.size() > 9) {
      throw ParseError("expected 9 columns per two-port record, got " +
                           std::to_string(pending.size() + tokens.size()),
                       line_no);
    }
    pending.insert(pending.end(), tokens.begin(), tokens.end());
    if (pending.size() == 9) finish_record();
  }
  if (!have_options) throw ParseError("missing option line", line_no);
  if (!pending.empty()) {
    throw ParseError("truncated record: " + std::to_string(pending.size()) + " of 9 columns",
                     record_line);
  }
  if (data.frequencies.empty()) throw ParseError("no data records", line_no);
  return data;
}

std::string emit_touchstone(const TouchstoneData& data) {
  if (data.frequencies.size() != data.s.size()) {
    throw ValidationError("touchstone", "frequency and S array lengths differ");
  }
  std::string out = "! two-port S parameters\n# ";
  out += to_string(data.unit);
  out += " S ";
  out += to_string(data.format);
  out += " R ";
  out += detail::shortest(data.z0);
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.frequencies.size(); ++i) {
    const int p = unit_exponent(data.unit);
    const double f = data.frequencies[i];
    // Plain text when it parses back exactly, exponent-shifted text otherwise.
    std::string plain = detail::shortest(f / std::pow(10.0, p));
    out += detail::parse_scaled(plain, p) == f ? plain : detail::format_scaled(f, p);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto [x, y] = encode(data.s[i][k], data.format);
      std::snprintf(buf, sizeof buf, " %.17g %.17g", x, y);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

TwoPortY s_to_y(const TouchstoneData& data) {
  TwoPortY out;
  out.frequencies = data.frequencies;
  out.y.reserve(data.s.size());
  const double z0 = data.z0;
  for (std::size_t i = 0; i < data.s.size(); ++i) {
    const TwoPort& s = data.s[i];
    const Complex s12s21 = s[p12] * s[p21];
    const Complex delta = (1.0 + s[p11]) * (1.0 + s[p22]) - s12s21;
    if (std::abs(delta) < 1e-30) {
      throw PhysicsError("singular S to Y conversion", data.frequencies[i]);
    }
    const Complex scale = 1.0 / (delta * z0);
    TwoPort y;
    y[p11] = ((1.0 - s[p11]) * (1.0 + s[p22]) + s12s21) * scale;
    y[p12] = -2.0 * s[p12] * scale;
    y[p21] = -2.0 * s[p21] * scale;
    y[p22] = ((1.0 + s[p11]) * (1.0 - s[p22]) + s12s21) * scale;
    out.y.push_back(y);
  }
  return out;
}

}  // namespace bawkit
