#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bawkit/acoustic1d.hpp"

namespace bawkit {

/// Device coupling computed from the fs/fp pair.
///   separation: (fp^2 - fs^2) / fp^2
///   ieee:       (pi/2)(fs/fp) tan((pi/2)(fp - fs)/fp)
///   approx:     (pi^2/8)(fp^2 - fs^2) / fp^2
enum class Keff2Definition { separation, ieee, approx };

std::string_view to_string(Keff2Definition def);
Keff2Definition keff2_definition_from_string(std::string_view name);

struct ModeSummary {
  std::size_t mode_index = 0;  // ascending fs within the band, 0 = fundamental
  double fs = 0.0;             // conductance peak, Hz
  double fp = 0.0;             // admittance minimum above fs, Hz
  double keff2 = 0.0;
  double eta = 0.0;
  double qm = 0.0;
  double fom = 0.0;  // keff2 * qm
  Keff2Definition keff2_definition = Keff2Definition::ieee;
};

/// Throws std::invalid_argument unless 0 < fs < fp.
double keff2(double fs, double fp, Keff2Definition def = Keff2Definition::ieee);

/// Energy-weighted harmonic mean of the layer quality factors. With all
/// non-piezo layers at one Q this is 1 / (eta/Q_piezo + (1 - eta)/Q_metal).
double qm_from_partition(const EnergyPartition& partition, const Stack& stack);

/// f_n = n v / (2 t).
double estimate_frequency(int mode_order, double velocity, double thickness);
/// t = n v / (2 f).
double estimate_thickness(double frequency, int mode_order, double velocity);

struct ModeSearchOptions {
  Keff2Definition definition = Keff2Definition::ieee;
  double rel_tol = 1e-9;  // golden-section stopping width, relative to f
  Backend backend = Backend::bvp;
};

/// Coarse scan of the band, golden-section refinement of every conductance
/// peak (fs) and of the admittance minimum that follows it (fp), then the
/// per-mode metrics. A last mode whose fp lies beyond the band edge is
/// dropped. Throws ModeSearchError when no complete mode is found or when
/// two conductance peaks occur without an admittance minimum between them.
std::vector<ModeSummary> find_modes(const Stack& stack, const FrequencyGrid& band,
                                    std::size_t max_modes, const ModeSearchOptions& options = {});

/// `mode,fs_hz,fp_hz,keff2,eta,qm,fom,keff2_def` with 17 significant digits.
std::string modes_csv(const std::vector<ModeSummary>& modes);

struct Calibration {
  double stiffness_scale = 1.0;  // factor applied to the piezo c33E
  Stack stack;
};

/// Scale the piezo c33E by a single factor so that mode `mode_index` of the
/// stack sits at target_fs. Bisection on log(scale) within [0.25, 4].
Calibration calibrate_piezo_stiffness(const Stack& stack, const FrequencyGrid& band,
                                      std::size_t mode_index, double target_fs,
                                      const ModeSearchOptions& options = {});

}  // namespace bawkit
