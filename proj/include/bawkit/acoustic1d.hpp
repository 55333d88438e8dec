#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bawkit/materials.hpp"

namespace bawkit {

enum class Spacing { linear, logarithmic };

/// Sampling of a frequency band; validated on construction.
class FrequencyGrid {
 public:
  FrequencyGrid(double f_min, double f_max, std::size_t n_points,
                Spacing spacing = Spacing::linear);

  double f_min() const noexcept { return f_min_; }
  double f_max() const noexcept { return f_max_; }
  std::size_t size() const noexcept { return n_; }
  Spacing spacing() const noexcept { return spacing_; }

  /// i-th sample; endpoints are exactly f_min and f_max.
  double at(std::size_t i) const;
  std::vector<double> points() const;

 private:
  double f_min_;
  double f_max_;
  std::size_t n_;
  Spacing spacing_;
};

enum class Backend { bvp, mason };
enum class Provenance { simulated_bvp, simulated_mason, measured };

std::string_view to_string(Backend backend);
std::string_view to_string(Provenance provenance);

struct AdmittanceCurve {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<Complex> y;           // S
  Provenance provenance = Provenance::measured;

  /// Throws ValidationError when lengths differ or frequencies do not increase.
  void validate() const;
};

/// Electrical admittance from the layered boundary-value problem.
///
/// Each layer carries u(z) = a e^{-jkz} + b e^{+jkz} in local coordinates.
/// The 2L+1 unknowns (a_i, b_i, D) are fixed by the outer boundary conditions,
/// continuity of u and T at each interface, and the electrical constraint
/// V = 1 across the piezo layer. Throws SingularSystemError when the system is
/// numerically singular, which requires lossless media.
Complex admittance_bvp(const Stack& stack, double f_hz);

/// Electrical admittance from the closed-form loaded-plate (Mason) model.
Complex admittance_mason(const Stack& stack, double f_hz);

Complex admittance(const Stack& stack, double f_hz, Backend backend);

AdmittanceCurve spectrum(const Stack& stack, const FrequencyGrid& grid, Backend backend);

/// Writes `freq_hz,re_y_s,im_y_s` rows with 17 significant digits.
std::string spectrum_csv(const AdmittanceCurve& curve);

struct LayerField {
  Complex a;                    // forward amplitude, m
  Complex b;                    // backward amplitude, m
  Complex k;                    // wavenumber, 1/m
  double z_bottom = 0.0;        // global position of the lower face, m
  std::vector<double> z;        // global sample positions, both faces included
  std::vector<Complex> u;       // displacement, m
  std::vector<Complex> stress;  // T, Pa
};

struct FieldProfile {
  double frequency = 0.0;
  double voltage = 1.0;
  Complex d_field;  // electric displacement in the piezo layer, C/m^2
  std::vector<LayerField> layers;
};

/// Standing-wave solution at f_hz for a 1 V drive, sampled on
/// samples_per_layer points per layer (minimum 64).
FieldProfile field_profile(const Stack& stack, double f_hz, std::size_t samples_per_layer = 64);

struct EnergyPartition {
  std::vector<double> layer_energy;  // J, time averaged
  double total = 0.0;
  double eta = 0.0;  // piezo share of the total
};

/// U_i = (A/4) * c_eff,i * integral |u_i'|^2 dz, evaluated with the exact
/// antiderivative of the two-wave form. Throws PhysicsError when the profile
/// carries no acoustic excitation.
EnergyPartition strain_energy(const FieldProfile& profile, const Stack& stack);

}  // namespace bawkit
