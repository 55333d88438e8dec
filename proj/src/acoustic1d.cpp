#include "bawkit/acoustic1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Dense>

#include "bawkit/errors.hpp"

namespace bawkit {

namespace {

constexpr Complex kJ{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Reciprocal condition number below which the equilibrated system is
// treated as singular.
constexpr double kSingularRcond = 1e-13;

struct Amplitudes {
  std::vector<Complex> a;
  std::vector<Complex> b;
  std::vector<Complex> k;
  Complex d_field;
};

Amplitudes solve_amplitudes(const Stack& stack, const DerivedConstants& dc, double f_hz) {
  if (!(f_hz > 0.0) || !std::isfinite(f_hz)) throw PhysicsError("frequency must be > 0", f_hz);
  const double omega = kTwoPi * f_hz;
  const std::size_t n_layers = stack.size();
  const auto n = static_cast<Eigen::Index>(2 * n_layers + 1);
  const Eigen::Index col_d = n - 1;
  const std::size_t ip = stack.piezo_index();
  const Material& pm = stack.piezo().material;
  const Complex eps = pm.eps33s * Complex(1.0, -pm.tan_delta);
  const Complex h = pm.e33 / eps;

  std::vector<Complex> k(n_layers), fwd(n_layers), bwd(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    k[i] = omega / dc.layers[i].velocity;
    fwd[i] = std::exp(-kJ * k[i] * stack.layer(i).thickness);
    bwd[i] = std::exp(kJ * k[i] * stack.layer(i).thickness);
  }

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  auto col_a = [](std::size_t i) { return static_cast<Eigen::Index>(2 * i); };
  auto col_b = [](std::size_t i) { return static_cast<Eigen::Index>(2 * i + 1); };

  // Displacement of layer i at its lower (at_top = false) or upper face.
  auto put_u = [&](Eigen::Index row, std::size_t i, bool at_top, double sign) {
    m(row, col_a(i)) += sign * (at_top ? fwd[i] : Complex(1.0));
    m(row, col_b(i)) += sign * (at_top ? bwd[i] : Complex(1.0));
  };
  // Stress T = c u' - h D (the D term only in the piezo layer).
  auto put_t = [&](Eigen::Index row, std::size_t i, bool at_top, double sign) {
    const Complex ck = dc.layers[i].stiffness * k[i];
    m(row, col_a(i)) += sign * (-kJ * ck) * (at_top ? fwd[i] : Complex(1.0));
    m(row, col_b(i)) += sign * (kJ * ck) * (at_top ? bwd[i] : Complex(1.0));
    if (i == ip) m(row, col_d) += -sign * h;
  };

  Eigen::Index row = 0;
  if (stack.bottom() == Boundary::free) {
    put_t(row++, 0, false, 1.0);
  } else {
    put_u(row++, 0, false, 1.0);
  }
  for (std::size_t i = 0; i + 1 < n_layers; ++i) {
    put_u(row, i, true, 1.0);
    put_u(row++, i + 1, false, -1.0);
    put_t(row, i, true, 1.0);
    put_t(row++, i + 1, false, -1.0);
  }
  if (stack.top() == Boundary::free) {
    put_t(row++, n_layers - 1, true, 1.0);
  } else {
    put_u(row++, n_layers - 1, true, 1.0);
  }
  // V = (D t - e33 (u(t) - u(0))) / eps = 1
  const double tp = stack.piezo().thickness;
  m(row, col_a(ip)) = -h * (fwd[ip] - 1.0);
  m(row, col_b(ip)) = -h * (bwd[ip] - 1.0);
  m(row, col_d) = tp / eps;
  rhs(row) = 1.0;

  // Rows mix displacements (~1) with stresses (~1e17); equilibrate so the
  // condition estimate measures physics rather than units.
  Eigen::VectorXd col_scale(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double s = m.col(c).cwiseAbs().maxCoeff();
    col_scale(c) = s > 0.0 ? 1.0 / s : 1.0;
  }
  m = m * col_scale.asDiagonal();
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = m.row(r).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      m.row(r) /= s;
      rhs(r) /= s;
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    throw SingularSystemError("singular stack system (lossless resonance)", f_hz);
  }
  Eigen::VectorXcd x = lu.solve(rhs);
  x = col_scale.asDiagonal() * x;

  Amplitudes out;
  out.a.resize(n_layers);
  out.b.resize(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    out.a[i] = x(col_a(i));
    out.b[i] = x(col_b(i));
  }
  out.k = std::move(k);
  out.d_field = x(col_d);
  return out;
}

Complex with_series_resistance(Complex y, double rs) {
  if (rs == 0.0 || y == Complex(0.0)) return y;
  return 1.0 / (rs + 1.0 / y);
}

// Acoustic impedance seen looking into one side of the piezo layer. A rigid
// wall directly on the piezo face is the only way to get an infinite load.
struct Load {
  bool infinite = false;
  Complex z;
};

Load transform(Load load, Complex z_line, Complex theta) {
  if (load.infinite) return {false, z_line / (kJ * std::tan(theta))};
  const Complex c = std::cos(theta);
  const Complex s = std::sin(theta);
  return {false, z_line * (load.z * c + kJ * z_line * s) / (z_line * c + kJ * load.z * s)};
}

}  // namespace

FrequencyGrid::FrequencyGrid(double f_min, double f_max, std::size_t n_points, Spacing spacing)
    : f_min_(f_min), f_max_(f_max), n_(n_points), spacing_(spacing) {
  if (!(f_min > 0.0) || !std::isfinite(f_max)) throw ValidationError("grid.f_min", "must be > 0");
  if (!(f_max > f_min)) throw ValidationError("grid.f_max", "must exceed f_min");
  if (n_points < 2) throw ValidationError("grid.n_points", "at least 2 points required");
}

double FrequencyGrid::at(std::size_t i) const {
  if (i == 0) return f_min_;
  if (i + 1 >= n_) return f_max_;
  const double t = static_cast<double>(i) / static_cast<double>(n_ - 1);
  if (spacing_ == Spacing::linear) return f_min_ + (f_max_ - f_min_) * t;
  return f_min_ * std::exp(std::log(f_max_ / f_min_) * t);
}

std::vector<double> FrequencyGrid::points() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = at(i);
  return out;
}

std::string_view to_string(Backend backend) { return backend == Backend::bvp ? "bvp" : "mason"; }

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::simulated_bvp: return "simulated-bvp";
    case Provenance::simulated_mason: return "simulated-mason";
    case Provenance::measured: return "measured";
  }
  return "measured";
}

void AdmittanceCurve::validate() const {
  if (frequencies.size() != y.size()) throw ValidationError("curve", "array lengths differ");
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > frequencies[i - 1])) {
      throw ValidationError("curve.frequencies", "must be strictly increasing");
    }
  }
}

Complex admittance_bvp(const Stack& stack, double f_hz) {
  const DerivedConstants dc = derive_constants(stack);
  const Amplitudes amp = solve_amplitudes(stack, dc, f_hz);
  const Complex y = kJ * (kTwoPi * f_hz) * amp.d_field * stack.area();
  return with_series_resistance(y, stack.rs());
}

Complex admittance_mason(const Stack& stack, double f_hz) {
  if (!(f_hz > 0.0) || !std::isfinite(f_hz)) throw PhysicsError("frequency must be > 0", f_hz);
  const DerivedConstants dc = derive_constants(stack);
  const double omega = kTwoPi * f_hz;
  const std::size_t ip = stack.piezo_index();

  auto theta = [&](std::size_t i) { return omega * stack.layer(i).thickness / dc.layers[i].velocity; };

  Load top{stack.top() == Boundary::rigid, Complex(0.0)};
  for (std::size_t i = stack.size() - 1; i > ip; --i) {
    top = transform(top, dc.layers[i].impedance, theta(i));
  }
  Load bottom{stack.bottom() == Boundary::rigid, Complex(0.0)};
  for (std::size_t i = 0; i < ip; ++i) {
    bottom = transform(bottom, dc.layers[i].impedance, theta(i));
  }

  const Complex zp = dc.layers[ip].impedance;
  const Complex th = theta(ip);
  const Complex c = std::cos(th);
  const Complex s = std::sin(th);
  Complex ratio;
  if (top.infinite && bottom.infinite) {
    ratio = 0.0;
  } else if (top.infinite || bottom.infinite) {
    const Complex z_other = (top.infinite ? bottom.z : top.z) / zp;
    ratio = s / (c + kJ * z_other * s);
  } else {
    const Complex zt = top.z / zp;
    const Complex zb = bottom.z / zp;
    ratio = ((zt + zb) * s + 2.0 * kJ * (1.0 - c)) / ((zt + zb) * c + kJ * (1.0 + zt * zb) * s);
  }

  const Material& pm = stack.piezo().material;
  // With loss the coupling that multiplies the bracket is e^2/(eps* c33D*),
  // complex; it equals the material kt^2 when both loss terms vanish.
  const Complex eps = pm.eps33s * Complex(1.0, -pm.tan_delta);
  const Complex coupling = pm.e33 * pm.e33 / (eps * dc.layers[ip].stiffness);
  const Complex z_static = 1.0 / (kJ * omega * dc.c0_lossy);
  const Complex z_e = z_static * (1.0 - coupling / th * ratio);
  if (!std::isfinite(z_e.real()) || !std::isfinite(z_e.imag())) return Complex(0.0);
  const Complex z_total = stack.rs() + z_e;
  if (!(std::abs(z_total) > 1e-13 * std::abs(z_static))) {
    throw SingularSystemError("singular loaded-plate impedance (lossless resonance)", f_hz);
  }
  return 1.0 / z_total;
}

Complex admittance(const Stack& stack, double f_hz, Backend backend) {
  return backend == Backend::bvp ? admittance_bvp(stack, f_hz) : admittance_mason(stack, f_hz);
}

AdmittanceCurve spectrum(const Stack& stack, const FrequencyGrid& grid, Backend backend) {
  AdmittanceCurve curve;
  curve.provenance =
      backend == Backend::bvp ? Provenance::simulated_bvp : Provenance::simulated_mason;
  curve.frequencies = grid.points();
  curve.y.reserve(grid.size());
  for (double f : curve.frequencies) curve.y.push_back(admittance(stack, f, backend));
  return curve;
}

std::string spectrum_csv(const AdmittanceCurve& curve) {
  std::string out = "freq_hz,re_y_s,im_y_s\n";
  char buf[128];
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", curve.frequencies[i], curve.y[i].real(),
                  curve.y[i].imag());
    out += buf;
  }
  return out;
}

FieldProfile field_profile(const Stack& stack, double f_hz, std::size_t samples_per_layer) {
  const DerivedConstants dc = derive_constants(stack);
  const Amplitudes amp = solve_amplitudes(stack, dc, f_hz);
  const std::size_t ns = std::max<std::size_t>(samples_per_layer, 64);
  const std::size_t ip = stack.piezo_index();
  const Material& pm = stack.piezo().material;
  const Complex h = pm.e33 / (pm.eps33s * Complex(1.0, -pm.tan_delta));

  FieldProfile out;
  out.frequency = f_hz;
  out.voltage = 1.0;
  out.d_field = amp.d_field;
  double z0 = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    LayerField lf;
    lf.a = amp.a[i];
    lf.b = amp.b[i];
    lf.k = amp.k[i];
    lf.z_bottom = z0;
    const double t = stack.layer(i).thickness;
    const Complex ck = dc.layers[i].stiffness * lf.k;
    lf.z.resize(ns);
    lf.u.resize(ns);
    lf.stress.resize(ns);
    for (std::size_t j = 0; j < ns; ++j) {
      const double zeta = j + 1 == ns ? t : t * static_cast<double>(j) / static_cast<double>(ns - 1);
      const Complex ef = std::exp(-kJ * lf.k * zeta);
      const Complex eb = std::exp(kJ * lf.k * zeta);
      lf.z[j] = z0 + zeta;
      lf.u[j] = lf.a * ef + lf.b * eb;
      lf.stress[j] = -kJ * ck * (lf.a * ef - lf.b * eb);
      if (i == ip) lf.stress[j] -= h * amp.d_field;
    }
    z0 += t;
    out.layers.push_back(std::move(lf));
  }
  return out;
}

namespace {

// integral_0^t exp(alpha z) dz for real alpha.
double exp_integral(double alpha, double t) {
  const double x = alpha * t;
  if (x == 0.0) return t;
  return std::expm1(x) / alpha;
}

// integral_0^t exp(-2j kr z) dz, written without cancellation.
Complex phase_integral(double kr, double t) {
  if (kr == 0.0) return t;
  const double phi = 2.0 * kr * t;
  const double half = std::sin(0.5 * phi);
  const Complex num(-2.0 * half * half, -std::sin(phi));
  return num / Complex(0.0, -2.0 * kr);
}

}  // namespace

EnergyPartition strain_energy(const FieldProfile& profile, const Stack& stack) {
  if (profile.layers.size() != stack.size()) {
    throw ValidationError("profile", "layer count does not match stack");
  }
  EnergyPartition out;
  out.layer_energy.resize(stack.size());
  bool excited = false;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const LayerField& lf = profile.layers[i];
    const Layer& layer = stack.layer(i);
    const double c_eff = layer.role == LayerRole::piezo ? layer.material.c33d() : layer.material.c33e;
    const double t = layer.thickness;
    const double kr = lf.k.real();
    const double ki = lf.k.imag();
    // |u'|^2 = |k|^2 (|a|^2 e^{2 ki z} + |b|^2 e^{-2 ki z} - 2 Re(a b* e^{-2j kr z}))
    const double integral =
        std::norm(lf.k) * (std::norm(lf.a) * exp_integral(2.0 * ki, t) +
                           std::norm(lf.b) * exp_integral(-2.0 * ki, t) -
                           2.0 * (lf.a * std::conj(lf.b) * phase_integral(kr, t)).real());
    if (lf.a != Complex(0.0) || lf.b != Complex(0.0)) excited = true;
    out.layer_energy[i] = 0.25 * stack.area() * c_eff * std::max(integral, 0.0);
    out.total += out.layer_energy[i];
  }
  if (!excited || !(out.total > 0.0)) {
    throw PhysicsError("no acoustic excitation at this frequency", profile.frequency);
  }
  out.eta = out.layer_energy[stack.piezo_index()] / out.total;
  return out;
}

}  // namespace bawkit
