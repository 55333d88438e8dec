#include "bawkit/mbvd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>

#include "bawkit/errors.hpp"

namespace bawkit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kResistanceFloor = 1e-3;  // ohm, seed for r0 and rs
const Complex kJ{0.0, 1.0};

std::array<double, 6> to_array(const MbvdParams& p) { return {p.rm, p.lm, p.cm, p.c0, p.r0, p.rs}; }

MbvdParams from_array(const std::array<double, 6>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

// Y and dY/d(log p_i) for the six parameters.
Complex admittance_and_gradient(const MbvdParams& p, double f, std::array<Complex, 6>& grad) {
  const double w = kTwoPi * f;
  const Complex zm = p.rm + kJ * w * p.lm + 1.0 / (kJ * w * p.cm);
  const Complex zs = p.r0 + 1.0 / (kJ * w * p.c0);
  const Complex ym = 1.0 / zm;
  const Complex ys = 1.0 / zs;
  const Complex yp = ym + ys;
  const Complex y = 1.0 / (p.rs + 1.0 / yp);
  const Complex dy_dyp = y * y / (yp * yp);
  const Complex dy_dzm = -dy_dyp * ym * ym;
  const Complex dy_dzs = -dy_dyp * ys * ys;
  grad[0] = dy_dzm * p.rm;
  grad[1] = dy_dzm * (kJ * w * p.lm);
  grad[2] = dy_dzm * (-1.0 / (kJ * w * p.cm));
  grad[3] = dy_dzs * (-1.0 / (kJ * w * p.c0));
  grad[4] = dy_dzs * p.r0;
  grad[5] = -y * y * p.rs;
  return y;
}

struct Residual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& f;
  const std::vector<Complex>& y;
  std::vector<double> inv_mag;

  Residual(const std::vector<double>& freqs, const std::vector<Complex>& ys) : f(freqs), y(ys) {
    inv_mag.reserve(ys.size());
    for (const Complex& v : ys) inv_mag.push_back(1.0 / std::abs(v));
  }

  int inputs() const { return 6; }
  int values() const { return static_cast<int>(2 * f.size()); }

  static MbvdParams params(const Eigen::VectorXd& x) {
    std::array<double, 6> v;
    for (int i = 0; i < 6; ++i) v[static_cast<std::size_t>(i)] = std::exp(x[i]);
    return from_array(v);
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    const MbvdParams p = params(x);
    for (std::size_t k = 0; k < f.size(); ++k) {
      const Complex r = (mbvd_admittance(p, f[k]) - y[k]) * inv_mag[k];
      fvec[static_cast<Eigen::Index>(2 * k)] = r.real();
      fvec[static_cast<Eigen::Index>(2 * k + 1)] = r.imag();
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    const MbvdParams p = params(x);
    std::array<Complex, 6> g;
    for (std::size_t k = 0; k < f.size(); ++k) {
      admittance_and_gradient(p, f[k], g);
      for (int i = 0; i < 6; ++i) {
        const Complex d = g[static_cast<std::size_t>(i)] * inv_mag[k];
        jac(static_cast<Eigen::Index>(2 * k), i) = d.real();
        jac(static_cast<Eigen::Index>(2 * k + 1), i) = d.imag();
      }
    }
    return 0;
  }
};

AdmittanceCurve restrict_to_band(const AdmittanceCurve& curve,
                                 const std::optional<std::pair<double, double>>& band) {
  if (!band) return curve;
  if (!(band->first < band->second)) throw ValidationError("band", "requires fmin < fmax");
  AdmittanceCurve out;
  out.provenance = curve.provenance;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    const double f = curve.frequencies[i];
    if (f >= band->first && f <= band->second) {
      out.frequencies.push_back(f);
      out.y.push_back(curve.y[i]);
    }
  }
  return out;
}

}  // namespace

void MbvdParams::validate() const {
  const std::array<std::pair<const char*, double>, 6> fields{
      {{"rm", rm}, {"lm", lm}, {"cm", cm}, {"c0", c0}, {"r0", r0}, {"rs", rs}}};
  for (const auto& [name, v] : fields) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(name, "must be finite and >= 0");
  }
  if (!(lm > 0.0)) throw ValidationError("lm", "must be > 0");
  if (!(cm > 0.0)) throw ValidationError("cm", "must be > 0");
  if (!(c0 > 0.0)) throw ValidationError("c0", "must be > 0");
}

Complex mbvd_admittance(const MbvdParams& p, double f_hz, bool motional) {
  const double w = kTwoPi * f_hz;
  Complex yp = 1.0 / (p.r0 + 1.0 / (kJ * w * p.c0));
  if (motional) yp += 1.0 / (p.rm + kJ * w * p.lm + 1.0 / (kJ * w * p.cm));
  return 1.0 / (p.rs + 1.0 / yp);
}

MbvdMetrics report(const MbvdParams& p, MbvdCoupling coupling) {
  MbvdMetrics m;
  m.fs = 1.0 / (kTwoPi * std::sqrt(p.lm * p.cm));
  m.qs = kTwoPi * m.fs * p.lm / p.rm;
  const double ratio = p.cm / p.c0;
  constexpr double k = std::numbers::pi * std::numbers::pi / 8.0;
  m.keff2 = coupling == MbvdCoupling::ratio ? k * ratio : k * ratio / (1.0 + ratio);
  m.fom = m.keff2 * m.qs;
  return m;
}

std::string_view to_string(Topology topology) {
  return topology == Topology::shunt ? "shunt" : "series";
}

Topology topology_from_string(std::string_view name) {
  if (name == "series") return Topology::series_through;
  if (name == "shunt") return Topology::shunt;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

AdmittanceCurve device_admittance(const TwoPortY& y, Topology topology) {
  AdmittanceCurve out;
  out.provenance = Provenance::measured;
  out.frequencies = y.frequencies;
  out.y.reserve(y.y.size());
  for (const TwoPort& m : y.y) out.y.push_back(topology == Topology::shunt ? m[p11] : -m[p12]);
  return out;
}

TwoPort series_element_s(Complex z, double z0) {
  const Complex den = z + 2.0 * z0;
  const Complex reflect = z / den;
  const Complex through = 2.0 * z0 / den;
  return {reflect, through, through, reflect};
}

MbvdParams seed_mbvd(const AdmittanceCurve& curve) {
  const auto& f = curve.frequencies;
  const auto& y = curve.y;
  const std::size_t n = f.size();
  std::size_t is = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i].real() > y[is].real()) is = i;
  }
  if (is == 0 || is + 1 == n) throw ValidationError("band", "no conductance peak inside the band");
  std::size_t ip = is + 1;
  for (std::size_t i = is + 1; i < n; ++i) {
    if (std::abs(y[i]) < std::abs(y[ip])) ip = i;
  }
  const double fs = f[is];
  const double fp = f[ip] > fs ? f[ip] : fs * 1.01;
  const double span = fp - fs;

  std::vector<double> c_est;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] < fs - 2.0 * span || f[i] > fp + 2.0 * span) {
      c_est.push_back(y[i].imag() / (kTwoPi * f[i]));
    }
  }
  if (c_est.empty()) {
    for (std::size_t i = 0; i < n; ++i) c_est.push_back(y[i].imag() / (kTwoPi * f[i]));
  }
  std::sort(c_est.begin(), c_est.end());
  const std::size_t mid = c_est.size() / 2;
  double c0 = c_est.size() % 2 ? c_est[mid] : 0.5 * (c_est[mid - 1] + c_est[mid]);
  if (!(c0 > 0.0)) c0 = std::abs(c0) > 0.0 ? std::abs(c0) : 1e-12;

  MbvdParams p;
  p.c0 = c0;
  p.cm = c0 * ((fp / fs) * (fp / fs) - 1.0);
  p.lm = 1.0 / ((kTwoPi * fs) * (kTwoPi * fs) * p.cm);
  p.rm = 1.0 / y[is].real();
  p.r0 = kResistanceFloor;
  p.rs = kResistanceFloor;
  return p;
}

double relative_rms(const MbvdParams& p, const AdmittanceCurve& curve) {
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    sum += std::norm((mbvd_admittance(p, curve.frequencies[i]) - curve.y[i]) / std::abs(curve.y[i]));
  }
  return std::sqrt(sum / static_cast<double>(curve.frequencies.size()));
}

FitReport fit_mbvd(const AdmittanceCurve& full, const FitOptions& options) {
  full.validate();
  const AdmittanceCurve curve = restrict_to_band(full, options.band);
  if (curve.frequencies.size() < 50) {
    throw ValidationError("band", "at least 50 points are required inside the band");
  }
  MbvdParams start = seed_mbvd(curve);
  if (options.init) {
    options.init->validate();
    start = *options.init;
  }
  // Zero resistances have no logarithm; start them from the floor instead.
  start.rm = std::max(start.rm, kResistanceFloor);
  start.r0 = std::max(start.r0, kResistanceFloor);
  start.rs = std::max(start.rs, kResistanceFloor);

  Residual functor(curve.frequencies, curve.y);
  auto run = [&](const MbvdParams& from) {
    Eigen::VectorXd x(6);
    const auto s = to_array(from);
    for (int i = 0; i < 6; ++i) x[i] = std::log(s[static_cast<std::size_t>(i)]);
    Eigen::LevenbergMarquardt<Residual> lm(functor);
    lm.parameters.xtol = 1e-10;
    lm.parameters.ftol = 1e-14;
    lm.parameters.gtol = 0.0;
    lm.parameters.maxfev = static_cast<Eigen::Index>(options.max_evaluations);
    const auto status = lm.minimize(x);
    return std::tuple{Residual::params(x), status, static_cast<std::size_t>(lm.iter)};
  };

  // In log space a resistance that drifts towards zero loses its gradient and
  // the solver stalls on that plateau. Restarting r0 and rs from a ladder of
  // values scaled to the static reactance avoids it; the lowest residual wins.
  std::vector<double> ladder{kResistanceFloor};
  const double z_ref = 1.0 / (kTwoPi * report(start).fs * start.c0);
  if (std::isfinite(z_ref)) {
    for (double k : {1e-3, 1e-2, 1e-1}) ladder.push_back(k * z_ref);
  }
  std::vector<MbvdParams> starts{start};
  for (double r0 : ladder) {
    for (double rs : ladder) {
      if (r0 == start.r0 && rs == start.rs) continue;
      MbvdParams p = start;
      p.r0 = r0;
      p.rs = rs;
      starts.push_back(p);
    }
  }

  FitReport r;
  r.residual = INFINITY;
  Eigen::LevenbergMarquardtSpace::Status status{};
  for (const MbvdParams& from : starts) {
    auto [params, st, iterations] = run(from);
    r.n_iterations += iterations;
    const double residual = relative_rms(params, curve);
    if (residual < r.residual) {
      r.residual = residual;
      r.params = params;
      status = st;
    }
  }
  r.metrics = report(r.params, options.coupling);
  using S = Eigen::LevenbergMarquardtSpace::Status;
  // Statuses 6 and 7 mean no further reduction is possible at machine
  // precision, i.e. the residual has plateaued.
  r.converged = status == S::RelativeReductionTooSmall || status == S::RelativeErrorTooSmall ||
                status == S::RelativeErrorAndReductionTooSmall || status == S::CosinusTooSmall ||
                status == S::FtolTooSmall || status == S::XtolTooSmall;
  r.converged = r.converged && std::isfinite(r.residual);
  return r;
}

std::string fit_report_text(const FitReport& r) {
  const std::array<std::pair<const char*, double>, 11> rows{{{"rm_ohm", r.params.rm},
                                                             {"lm_h", r.params.lm},
                                                             {"cm_f", r.params.cm},
                                                             {"c0_f", r.params.c0},
                                                             {"r0_ohm", r.params.r0},
                                                             {"rs_ohm", r.params.rs},
                                                             {"fs_hz", r.metrics.fs},
                                                             {"qs", r.metrics.qs},
                                                             {"keff2", r.metrics.keff2},
                                                             {"fom", r.metrics.fom},
                                                             {"residual", r.residual}}};
  std::string out;
  char buf[64];
  for (const auto& [key, v] : rows) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out += buf;
  }
  out += r.converged ? "converged=true\n" : "converged=false\n";
  return out;
}

std::string fit_csv(const AdmittanceCurve& curve, const MbvdParams& p) {
  std::string out = "freq_hz,re_y_data,im_y_data,re_y_model,im_y_model\n";
  char buf[160];
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    const Complex m = mbvd_admittance(p, curve.frequencies[i]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", curve.frequencies[i],
                  curve.y[i].real(), curve.y[i].imag(), m.real(), m.imag());
    out += buf;
  }
  return out;
}

}  // namespace bawkit
