#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "bawkit/acoustic1d.hpp"
#include "bawkit/touchstone.hpp"

namespace bawkit {

/// Modified Butterworth-Van Dyke circuit: rm-lm-cm motional branch in
/// parallel with r0-c0, both behind rs.
struct MbvdParams {
  double rm = 0.0;  // ohm
  double lm = 0.0;  // H
  double cm = 0.0;  // F
  double c0 = 0.0;  // F
  double r0 = 0.0;  // ohm
  double rs = 0.0;  // ohm

  /// Throws ValidationError unless all values are finite, >= 0, and lm, cm, c0 > 0.
  void validate() const;
};

Complex mbvd_admittance(const MbvdParams& p, double f_hz, bool motional = true);

/// ratio:      (pi^2/8) cm/c0
/// normalized: (pi^2/8) (cm/c0) / (1 + cm/c0)
enum class MbvdCoupling { ratio, normalized };

struct MbvdMetrics {
  double fs = 0.0;  // 1 / (2 pi sqrt(lm cm))
  double qs = 0.0;  // 2 pi fs lm / rm
  double keff2 = 0.0;
  double fom = 0.0;  // keff2 * qs
};

MbvdMetrics report(const MbvdParams& p, MbvdCoupling coupling = MbvdCoupling::ratio);

/// Which two-port admittance represents the resonator.
enum class Topology { series_through, shunt };  // -Y12, Y11

std::string_view to_string(Topology topology);
Topology topology_from_string(std::string_view name);

AdmittanceCurve device_admittance(const TwoPortY& y, Topology topology = Topology::series_through);

/// S parameters of an impedance z placed in series between two z0 ports.
TwoPort series_element_s(Complex z, double z0);

struct FitOptions {
  std::optional<std::pair<double, double>> band;  // Hz, inclusive
  std::optional<MbvdParams> init;
  MbvdCoupling coupling = MbvdCoupling::ratio;
  std::size_t max_evaluations = 4000;
};

struct FitReport {
  MbvdParams params;
  MbvdMetrics metrics;
  double residual = 0.0;  // relative RMS admittance error over the band
  std::size_t n_iterations = 0;
  bool converged = false;
};

/// Heuristic starting point from the shape of the curve (points inside band).
MbvdParams seed_mbvd(const AdmittanceCurve& curve);

/// Least-squares fit of the six parameters in log space with a
/// Levenberg-Marquardt solver and analytic Jacobian. The residual of each
/// point is (Y_model - Y_data)/|Y_data|. Non-convergence is reported through
/// the converged flag; ValidationError is thrown for fewer than 50 points in
/// the band or a band without a conductance peak.
FitReport fit_mbvd(const AdmittanceCurve& curve, const FitOptions& options = {});

/// Relative RMS of (Y_model - Y_data)/|Y_data| over the points.
double relative_rms(const MbvdParams& p, const AdmittanceCurve& curve);

/// `key=value` lines: rm_ohm lm_h cm_f c0_f r0_ohm rs_ohm fs_hz qs keff2 fom
/// residual converged.
std::string fit_report_text(const FitReport& report);

/// `freq_hz,re_y_data,im_y_data,re_y_model,im_y_model`.
std::string fit_csv(const AdmittanceCurve& curve, const MbvdParams& p);

}  // namespace bawkit
