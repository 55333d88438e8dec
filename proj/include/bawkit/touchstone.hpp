#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "bawkit/materials.hpp"

namespace bawkit {

enum class FrequencyUnit { hz, khz, mhz, ghz };
enum class DataFormat { ri, ma, db };

std::string_view to_string(FrequencyUnit unit);
std::string_view to_string(DataFormat format);
/// Power of ten that converts the unit to Hz (0, 3, 6, 9).
int unit_exponent(FrequencyUnit unit);

/// Two-port matrix stored as {x11, x21, x12, x22}, the column order of a
/// version-1 .s2p record.
using TwoPort = std::array<Complex, 4>;
enum TwoPortIndex : std::size_t { p11 = 0, p21 = 1, p12 = 2, p22 = 3 };

struct TouchstoneData {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<TwoPort> s;
  double z0 = 50.0;
  FrequencyUnit unit = FrequencyUnit::ghz;
  DataFormat format = DataFormat::ma;
};

/// Version-1 two-port Touchstone. The option line `# <unit> S <format> R <z0>`
/// is required; tokens are case-insensitive and may appear in any order.
/// Later option lines are ignored. A record may wrap over several lines but
/// must end at a line end. Errors carry the offending line number.
TouchstoneData parse_touchstone(std::string_view text);

/// Emits in data.unit and data.format. Frequencies are written so that
/// parse_touchstone returns them bit for bit.
std::string emit_touchstone(const TouchstoneData& data);

struct TwoPortY {
  std::vector<double> frequencies;
  std::vector<TwoPort> y;  // S
};

/// Throws PhysicsError when (1+S11)(1+S22) - S12 S21 vanishes at some point.
TwoPortY s_to_y(const TouchstoneData& data);

}  // namespace bawkit
