#include "bawkit/modal.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bawkit/errors.hpp"

namespace bawkit {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

// Maximize g on [lo, hi]; stops once the bracket is below rel_tol of its
// midpoint.
template <typename F>
double golden_max(F&& g, double lo, double hi, double rel_tol) {
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  while (hi - lo > rel_tol * 0.5 * (hi + lo)) {
    if (g1 >= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kInvPhi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kInvPhi * (hi - lo);
      g2 = g(x2);
    }
  }
  return g1 >= g2 ? x1 : x2;
}

// Golden-section search on a flat maximum stalls at ~sqrt(eps) of the peak
// width. Polish with the vertex of a symmetric three-point parabola whose
// half-width is the smallest step that lifts the curvature above the rounding
// floor (noise = absolute noise scale of g).
template <typename F>
double polish_max(F&& g, double x, double noise) {
  for (int pass = 0; pass < 3; ++pass) {
    const double g0 = g(x);
    double delta = x * 1e-13;
    double gm = 0.0;
    double gp = 0.0;
    double drop = 0.0;
    for (; delta < x * 1e-2; delta *= 2.0) {
      gm = g(x - delta);
      gp = g(x + delta);
      drop = 2.0 * g0 - gm - gp;
      if (drop > 1e6 * noise) break;
    }
    if (!(drop > 1e6 * noise)) return x;
    const double shift = 0.5 * delta * (gp - gm) / drop;
    if (!(std::abs(shift) <= delta)) return x;
    x += shift;
    if (std::abs(shift) < 1e-15 * x) break;
  }
  return x;
}

}  // namespace

std::string_view to_string(Keff2Definition def) {
  switch (def) {
    case Keff2Definition::separation: return "separation";
    case Keff2Definition::ieee: return "ieee";
    case Keff2Definition::approx: return "approx";
  }
  return "ieee";
}

Keff2Definition keff2_definition_from_string(std::string_view name) {
  if (name == "separation") return Keff2Definition::separation;
  if (name == "ieee") return Keff2Definition::ieee;
  if (name == "approx") return Keff2Definition::approx;
  throw std::invalid_argument("unknown keff2 definition '" + std::string(name) + "'");
}

double keff2(double fs, double fp, Keff2Definition def) {
  if (!(fs > 0.0) || !(fp > fs)) throw std::invalid_argument("keff2 requires 0 < fs < fp");
  constexpr double pi = std::numbers::pi;
  // (fp^2 - fs^2)/fp^2 as (1 - r)(1 + r) keeps precision when fs ~ fp.
  const double r = fs / fp;
  switch (def) {
    case Keff2Definition::separation: return (1.0 - r) * (1.0 + r);
    case Keff2Definition::ieee: return 0.5 * pi * r * std::tan(0.5 * pi * (fp - fs) / fp);
    case Keff2Definition::approx: return pi * pi / 8.0 * (1.0 - r) * (1.0 + r);
  }
  return 0.0;
}

double qm_from_partition(const EnergyPartition& partition, const Stack& stack) {
  if (partition.layer_energy.size() != stack.size()) {
    throw ValidationError("partition", "layer count does not match stack");
  }
  if (!(partition.total > 0.0)) throw ValidationError("partition.total", "total energy is zero");
  double loss = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    loss += partition.layer_energy[i] / partition.total * stack.layer(i).material.inverse_q();
  }
  return 1.0 / loss;
}

double estimate_frequency(int mode_order, double velocity, double thickness) {
  if (mode_order < 1 || !(velocity > 0.0) || !(thickness > 0.0)) {
    throw std::invalid_argument("estimate_frequency requires positive inputs");
  }
  return mode_order * velocity / (2.0 * thickness);
}

double estimate_thickness(double frequency, int mode_order, double velocity) {
  if (mode_order < 1 || !(velocity > 0.0) || !(frequency > 0.0)) {
    throw std::invalid_argument("estimate_thickness requires positive inputs");
  }
  return mode_order * velocity / (2.0 * frequency);
}

std::vector<ModeSummary> find_modes(const Stack& stack, const FrequencyGrid& band,
                                    std::size_t max_modes, const ModeSearchOptions& options) {
  if (max_modes < 1) throw std::invalid_argument("max_modes must be >= 1");
  const std::vector<double> f = band.points();
  const std::size_t n = f.size();
  std::vector<Complex> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = admittance(stack, f[i], options.backend);

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (y[i].real() > y[i - 1].real() && y[i].real() >= y[i + 1].real()) peaks.push_back(i);
  }

  auto conductance = [&](double x) { return admittance(stack, x, options.backend).real(); };
  auto neg_magnitude = [&](double x) { return -std::abs(admittance(stack, x, options.backend)); };

  std::vector<ModeSummary> modes;
  for (std::size_t p = 0; p < peaks.size() && modes.size() < max_modes; ++p) {
    const std::size_t i = peaks[p];
    const std::size_t limit = p + 1 < peaks.size() ? peaks[p + 1] : n - 1;
    std::size_t dip = 0;
    for (std::size_t j = i + 1; j < limit && j + 1 < n; ++j) {
      if (std::abs(y[j]) < std::abs(y[j - 1]) && std::abs(y[j]) <= std::abs(y[j + 1])) {
        dip = j;
        break;
      }
    }
    if (dip == 0) {
      if (p + 1 < peaks.size()) {
        throw ModeSearchError("fp not found before next fs near " + std::to_string(f[i]) + " Hz");
      }
      break;  // the antiresonance lies beyond the band edge
    }

    ModeSummary m;
    m.mode_index = modes.size();
    m.keff2_definition = options.definition;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    m.fs = golden_max(conductance, f[i - 1], f[i + 1], options.rel_tol);
    m.fs = polish_max(conductance, m.fs, eps * std::abs(admittance(stack, m.fs, options.backend)));
    m.fp = golden_max(neg_magnitude, std::max(f[dip - 1], m.fs), f[dip + 1], options.rel_tol);
    m.fp = polish_max(neg_magnitude, m.fp, eps * std::abs(admittance(stack, m.fp, options.backend)));
    m.keff2 = keff2(m.fs, m.fp, options.definition);
    const EnergyPartition part = strain_energy(field_profile(stack, m.fs), stack);
    m.eta = part.eta;
    m.qm = qm_from_partition(part, stack);
    m.fom = m.keff2 * m.qm;
    modes.push_back(m);
  }
  if (modes.empty()) throw ModeSearchError("no resonance found in band");
  return modes;
}

std::string modes_csv(const std::vector<ModeSummary>& modes) {
  std::string out = "mode,fs_hz,fp_hz,keff2,eta,qm,fom,keff2_def\n";
  char buf[256];
  for (const auto& m : modes) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", m.mode_index, m.fs,
                  m.fp, m.keff2, m.eta, m.qm, m.fom);
    out += buf;
    out += to_string(m.keff2_definition);
    out += '\n';
  }
  return out;
}

Calibration calibrate_piezo_stiffness(const Stack& stack, const FrequencyGrid& band,
                                      std::size_t mode_index, double target_fs,
                                      const ModeSearchOptions& options) {
  const Material base = stack.piezo().material;
  auto fs_at = [&](double scale) {
    Material m = base;
    m.c33e = base.c33e * scale;
    const auto modes = find_modes(stack.with_piezo_material(m), band, mode_index + 1, options);
    if (modes.size() <= mode_index) throw ModeSearchError("calibration mode not in band");
    return modes[mode_index].fs;
  };
  // fs rises monotonically with stiffness. Grow the bracket outwards from the
  // nominal stiffness: near the range ends the mode can leave the band.
  const double limit = std::log(4.0);
  const double step = std::log(1.25);
  double lo = 0.0;
  double hi = 0.0;
  auto above = [&](double log_scale) { return fs_at(std::exp(log_scale)) > target_fs; };
  try {
    if (above(0.0)) {
      while (lo > -limit && above(lo)) {
        hi = lo;
        lo = std::max(lo - step, -limit);
      }
      if (above(lo)) throw ModeSearchError("");
    } else {
      while (hi < limit && !above(hi)) {
        lo = hi;
        hi = std::min(hi + step, limit);
      }
      if (!above(hi)) throw ModeSearchError("");
    }
  } catch (const ModeSearchError&) {
    throw ModeSearchError("calibration target not bracketed by stiffness scale [0.25, 4]");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (fs_at(std::exp(mid)) < target_fs) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Calibration out{std::exp(0.5 * (lo + hi)), stack};
  Material m = base;
  m.c33e = base.c33e * out.stiffness_scale;
  out.stack = stack.with_piezo_material(m);
  return out;
}

}  // namespace bawkit
