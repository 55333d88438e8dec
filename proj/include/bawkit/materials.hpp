#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bawkit {

using Complex = std::complex<double>;

/// Constants of one layer medium along the thickness (33) axis, SI units.
///
/// Only c33E is stored; the stiffened constant c33D is always derived so a
/// record can never be stiffened twice.
struct Material {
  std::string name;
  double density = 0.0;    // kg/m^3
  double c33e = 0.0;       // Pa, stiffness at constant electric field
  double e33 = 0.0;        // C/m^2, zero for non-piezoelectric media
  double eps33s = 0.0;     // F/m, clamped permittivity
  double q_mech = 0.0;     // mechanical quality factor
  double tan_delta = 0.0;  // dielectric loss tangent
  bool lossless = false;   // q_mech -> infinity; for limit studies only
  std::string citation;

  /// c33E + e33^2/eps33S, or c33E when e33 == 0.
  double c33d() const;
  /// Material coupling e33^2 / (c33D * eps33S), in [0, 1).
  double coupling() const;
  /// Mechanical loss 1/q_mech, zero for lossless media.
  double inverse_q() const { return lossless ? 0.0 : 1.0 / q_mech; }

  bool operator==(const Material&) const = default;
};

enum class LayerRole { piezo, electrode, passive };
enum class Boundary { free, rigid };

std::string_view to_string(LayerRole role);
std::string_view to_string(Boundary boundary);

struct Layer {
  Material material;
  double thickness = 0.0;  // m
  LayerRole role = LayerRole::passive;

  bool operator==(const Layer&) const = default;
};

/// Ordered bottom-to-top layer list with a scalar electrode area.
///
/// Construction validates every invariant (exactly one piezo layer, positive
/// thicknesses and area, physically admissible materials) and throws
/// ValidationError naming the offending field. A constructed Stack is
/// immutable.
class Stack {
 public:
  Stack(std::vector<Layer> layers, double area_m2, double rs_ohm = 0.0,
        Boundary bottom = Boundary::free, Boundary top = Boundary::free);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t size() const noexcept { return layers_.size(); }
  double area() const noexcept { return area_; }
  double rs() const noexcept { return rs_; }
  Boundary bottom() const noexcept { return bottom_; }
  Boundary top() const noexcept { return top_; }

  std::size_t piezo_index() const noexcept { return piezo_; }
  const Layer& piezo() const { return layers_[piezo_]; }
  double total_thickness() const;

  /// Copy with layer i resized; the result is validated like any Stack.
  Stack with_thickness(std::size_t i, double thickness_m) const;
  /// Copy with every thickness multiplied by factor.
  Stack scaled(double factor) const;
  /// Copy with the piezo material replaced.
  Stack with_piezo_material(const Material& m) const;
  /// Copy with e33 of the piezo layer set to zero: the zero-coupling limit.
  /// This is the only way to obtain a piezo layer without coupling.
  Stack without_coupling() const;

  bool operator==(const Stack&) const = default;

 private:
  struct Uncoupled {};
  Stack(Uncoupled, std::vector<Layer> layers, double area_m2, double rs_ohm, Boundary bottom,
        Boundary top);
  void validate(bool allow_uncoupled);

  std::vector<Layer> layers_;
  double area_;
  double rs_;
  Boundary bottom_;
  Boundary top_;
  std::size_t piezo_ = 0;
};

/// Throws ValidationError if m violates a material invariant.
void validate_material(const Material& m, bool piezo);

struct LayerConstants {
  double c_eff = 0.0;   // c33D for the piezo layer, c33E otherwise
  Complex stiffness;    // c_eff * (1 + j/q)
  Complex velocity;     // sqrt(stiffness / density), Im >= 0
  Complex impedance;    // density * velocity * area
};

struct DerivedConstants {
  std::vector<LayerConstants> layers;
  double c0 = 0.0;         // eps33S * A / t_piezo
  Complex c0_lossy;        // c0 * (1 - j tan_delta)
  double coupling = 0.0;   // material kt^2 of the piezo layer
  double f0_piezo = 0.0;   // Re(v_piezo) / (2 t_piezo)
};

/// Pure, deterministic evaluation of per-layer and stack constants.
DerivedConstants derive_constants(const Stack& stack);

/// Parse a JSON stack description; unknown keys are rejected.
Stack load_stack(std::string_view json_text);
/// Inverse of load_stack (area is always written as area_m2).
std::string serialize_stack(const Stack& stack);

/// Parse a JSON material library: {"materials": {name: {...}}}.
std::map<std::string, Material> load_material_library(std::string_view json_text);

/// Read a whole file into a string; throws std::runtime_error on failure.
std::string read_text_file(const std::string& path);

}  // namespace bawkit
