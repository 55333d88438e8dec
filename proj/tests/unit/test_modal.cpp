#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "bawkit/errors.hpp"
#include "bawkit/modal.hpp"
#include "test_support.hpp"

using namespace bawkit;
using bawkit::testing::nominal_stack;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

Big big_pi() { return boost::math::constants::pi<Big>(); }

double oracle_ieee(double fs, double fp) {
  const Big s(fs);
  const Big p(fp);
  return static_cast<double>(big_pi() / 2 * (s / p) * tan(big_pi() / 2 * (p - s) / p));
}

double oracle_separation(double fs, double fp) {
  const Big s(fs);
  const Big p(fp);
  return static_cast<double>((p * p - s * s) / (p * p));
}

Material plate_material(double q) {
  Material m;
  m.name = "P";
  m.density = 3300.0;
  m.c33e = 3.5e11;
  m.e33 = 1.5;
  m.eps33s = 9e-11;
  m.q_mech = q;
  return m;
}

Stack bare_plate(double q) { return Stack({{plate_material(q), 500e-9, LayerRole::piezo}}, 1e-8); }

double stiffened_half_wave(const Stack& s) {
  const Material& m = s.piezo().material;
  return std::sqrt(m.c33d() / m.density) / (2.0 * s.piezo().thickness);
}

const FrequencyGrid kNominalBand(3e9, 15e9, 4001);

}  // namespace

TEST(Keff2, FrozenAgainstMultiprecision) {
  // Oracle values at 50 digits for fs = 12.8 GHz, fp = 13.2 GHz.
  EXPECT_NEAR(oracle_ieee(12.8e9, 13.2e9), 0.072558789198348741, 1e-17);
  EXPECT_NEAR(oracle_separation(12.8e9, 13.2e9), 0.059687786960514233, 1e-17);
  EXPECT_NEAR(keff2(12.8e9, 13.2e9, Keff2Definition::ieee), 0.072558789198348741, 1e-15);
  EXPECT_NEAR(keff2(12.8e9, 13.2e9, Keff2Definition::separation), 0.059687786960514233, 1e-15);
  EXPECT_NEAR(keff2(12.8e9, 13.2e9, Keff2Definition::approx),
              std::numbers::pi * std::numbers::pi / 8.0 * 0.059687786960514233, 1e-15);
}

TEST(Keff2, RandomPairsAgainstMultiprecision) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(1e-6, 0.3);
  for (int i = 0; i < 500; ++i) {
    const double fs = bawkit::testing::log_uniform(rng, 1e8, 1e11);
    const double fp = fs * (1.0 + u(rng));
    const double a = oracle_ieee(fs, fp);
    const double b = oracle_separation(fs, fp);
    EXPECT_NEAR(keff2(fs, fp, Keff2Definition::ieee), a, 1e-13 * a + 1e-300);
    EXPECT_NEAR(keff2(fs, fp, Keff2Definition::separation), b, 1e-13 * b + 1e-300);
  }
}

TEST(Keff2, IncreasesWithFp) {
  for (auto def : {Keff2Definition::ieee, Keff2Definition::separation, Keff2Definition::approx}) {
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = keff2(10e9, 10e9 * (1.0 + 0.001 * i), def);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(Keff2, IeeeBelowApprox) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(1e-6, 0.3);
  for (int i = 0; i < 500; ++i) {
    const double fs = 1e10;
    const double fp = fs * (1.0 + u(rng));
    EXPECT_LT(oracle_ieee(fs, fp), oracle_separation(fs, fp) * std::numbers::pi * std::numbers::pi / 8.0);
    EXPECT_LT(keff2(fs, fp, Keff2Definition::ieee), keff2(fs, fp, Keff2Definition::approx));
  }
}

TEST(Keff2, VanishesAsFpApproachesFs) {
  const double fs = 10e9;
  for (auto def : {Keff2Definition::ieee, Keff2Definition::separation, Keff2Definition::approx}) {
    EXPECT_LT(keff2(fs, std::nextafter(fs, INFINITY), def), 1e-15);
    EXPECT_GT(keff2(fs, std::nextafter(fs, INFINITY), def), 0.0);
  }
}

TEST(Keff2, RejectsBadPairs) {
  EXPECT_THROW(keff2(0.0, 1e9), std::invalid_argument);
  EXPECT_THROW(keff2(1e9, 1e9), std::invalid_argument);
  EXPECT_THROW(keff2(2e9, 1e9), std::invalid_argument);
  EXPECT_THROW(keff2(-1e9, 1e9), std::invalid_argument);
}

TEST(Keff2, DefinitionNames) {
  for (auto def : {Keff2Definition::ieee, Keff2Definition::separation, Keff2Definition::approx}) {
    EXPECT_EQ(keff2_definition_from_string(to_string(def)), def);
  }
  EXPECT_THROW(keff2_definition_from_string("bogus"), std::invalid_argument);
}

TEST(QmFromPartition, WeightedHarmonicMean) {
  const Stack s = nominal_stack();  // Q: 200, 2000, 200
  EnergyPartition e;
  e.layer_energy = {0.0, 1.0, 0.0};
  e.total = 1.0;
  e.eta = 1.0;
  EXPECT_DOUBLE_EQ(qm_from_partition(e, s), 2000.0);
  e.layer_energy = {0.5, 0.0, 0.5};
  e.eta = 0.0;
  EXPECT_DOUBLE_EQ(qm_from_partition(e, s), 200.0);
  e.layer_energy = {0.25, 0.5, 0.25};
  e.eta = 0.5;
  EXPECT_NEAR(qm_from_partition(e, s), 1.0 / (0.5 / 2000.0 + 0.5 / 200.0), 1e-9);
  EXPECT_NEAR(qm_from_partition(e, s), 363.636363636, 1e-6);
}

TEST(QmFromPartition, StaysBetweenLayerQs) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const Stack s = bawkit::testing::random_stack(rng);
    // A lone piezo layer clamped on both faces has no strain to partition.
    if (s.size() == 1 && s.bottom() == Boundary::rigid && s.top() == Boundary::rigid) continue;
    const double f0 = derive_constants(s).f0_piezo;
    const EnergyPartition e = strain_energy(field_profile(s, 0.9 * f0), s);
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& l : s.layers()) {
      lo = std::min(lo, l.material.q_mech);
      hi = std::max(hi, l.material.q_mech);
    }
    const double q = qm_from_partition(e, s);
    EXPECT_GE(q, lo * (1 - 1e-12));
    EXPECT_LE(q, hi * (1 + 1e-12));
  }
}

TEST(QmFromPartition, Validation) {
  const Stack s = nominal_stack();
  EnergyPartition e;
  e.layer_energy = {1.0};
  e.total = 1.0;
  EXPECT_THROW(qm_from_partition(e, s), ValidationError);
  e.layer_energy = {0.0, 0.0, 0.0};
  e.total = 0.0;
  EXPECT_THROW(qm_from_partition(e, s), ValidationError);
}

TEST(Estimate, HalfWaveRelations) {
  EXPECT_DOUBLE_EQ(estimate_frequency(1, 11000.0, 550e-9), 10e9);
  EXPECT_DOUBLE_EQ(estimate_thickness(10e9, 1, 13000.0), 650e-9);
  EXPECT_DOUBLE_EQ(estimate_frequency(3, 11000.0, 550e-9), 30e9);
  EXPECT_DOUBLE_EQ(estimate_frequency(1, 10000.0, 500e-9), 10e9);
  EXPECT_NEAR(estimate_frequency(2, 8450.0, 650e-9), 13.0e9, 1e-3);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const double v = bawkit::testing::log_uniform(rng, 3e3, 2e4);
    const double t = bawkit::testing::log_uniform(rng, 1e-8, 1e-5);
    const double back = estimate_thickness(estimate_frequency(n, v, t), n, v);
    EXPECT_NEAR(back, t, 1e-15 * t);
  }
  EXPECT_THROW(estimate_frequency(0, 1e4, 1e-7), std::invalid_argument);
  EXPECT_THROW(estimate_frequency(1, -1e4, 1e-7), std::invalid_argument);
  EXPECT_THROW(estimate_thickness(0.0, 1, 1e4), std::invalid_argument);
}

TEST(FindModes, BarePlateAntiresonanceIsStiffenedHalfWave) {
  const Stack s = bare_plate(1e5);
  const double fa = stiffened_half_wave(s);
  const auto modes = find_modes(s, FrequencyGrid(0.5 * fa, 1.5 * fa, 2001), 1);
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_NEAR(modes[0].fp / fa, 1.0, 1e-6);
  EXPECT_LT(modes[0].fs, modes[0].fp);
}

TEST(FindModes, BarePlateResonanceIsTranscendentalRoot) {
  const Stack s = bare_plate(1e5);
  const Material& m = s.piezo().material;
  const double fa = stiffened_half_wave(s);
  // tan(x)/x = 1/kt^2 with x = (pi/2) f / fa.
  long double lo = 1.0L;
  long double hi = std::numbers::pi_v<long double> / 2 - 1e-15L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (m.coupling() * std::tan(mid) / mid < 1.0L ? lo : hi) = mid;
  }
  const double fs = static_cast<double>(lo / (std::numbers::pi_v<long double> / 2)) * fa;
  const auto modes = find_modes(s, FrequencyGrid(0.5 * fa, 1.5 * fa, 2001), 1);
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_NEAR(modes[0].fs / fs, 1.0, 1e-9);
  EXPECT_EQ(modes[0].eta, 1.0);
  EXPECT_NEAR(modes[0].qm, 1e5, 1e-6);
}

TEST(FindModes, BarePlateExcitesOddOvertonesOnly) {
  const Stack s = bare_plate(1e5);
  const double fa = stiffened_half_wave(s);
  const auto modes = find_modes(s, FrequencyGrid(0.5 * fa, 6.0 * fa, 8001), 16);
  ASSERT_EQ(modes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(modes[i].fp / fa / (2.0 * i + 1.0), 1.0, 1e-6) << i;
    EXPECT_EQ(modes[i].mode_index, i);
  }
  EXPECT_GT(modes[0].keff2, modes[1].keff2);
  EXPECT_GT(modes[1].keff2, modes[2].keff2);
}

TEST(FindModes, NominalStackHasThreeModes) {
  const auto modes = find_modes(nominal_stack(), kNominalBand, 16);
  ASSERT_EQ(modes.size(), 3u);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    EXPECT_EQ(modes[i].mode_index, i);
    EXPECT_LT(modes[i].fs, modes[i].fp);
    if (i > 0) EXPECT_LT(modes[i - 1].fp, modes[i].fs);
    EXPECT_GT(modes[i].eta, 0.0);
    EXPECT_LT(modes[i].eta, 1.0);
    EXPECT_EQ(modes[i].fom, modes[i].keff2 * modes[i].qm);
    EXPECT_EQ(modes[i].keff2, keff2(modes[i].fs, modes[i].fp));
  }
  // Regression values of the uncalibrated stack.
  EXPECT_NEAR(modes[0].fs, 4997795899.65, 1e3);
  EXPECT_NEAR(modes[2].fs, 12987699370.81, 1e3);
  EXPECT_NEAR(modes[2].keff2, 0.012960554240, 1e-9);
  EXPECT_NEAR(modes[2].eta, 0.256516647999, 1e-9);
}

TEST(FindModes, RefinedPointsAreLocalExtrema) {
  const Stack s = nominal_stack();
  for (const auto& m : find_modes(s, kNominalBand, 16)) {
    const double g = admittance_bvp(s, m.fs).real();
    const double a = std::abs(admittance_bvp(s, m.fp));
    for (double d : {-1e-3, -1e-5, 1e-5, 1e-3}) {
      EXPECT_GE(g, admittance_bvp(s, m.fs * (1 + d)).real()) << m.mode_index << " " << d;
      EXPECT_LE(a, std::abs(admittance_bvp(s, m.fp * (1 + d)))) << m.mode_index << " " << d;
    }
  }
}

TEST(FindModes, TighterToleranceConverges) {
  const Stack s = nominal_stack();
  ModeSearchOptions loose;
  loose.rel_tol = 1e-5;
  const auto a = find_modes(s, kNominalBand, 16, loose);
  const auto b = find_modes(s, kNominalBand, 16);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].fs / b[i].fs, 1.0, 1e-5);
    EXPECT_NEAR(a[i].fp / b[i].fp, 1.0, 1e-5);
  }
}

TEST(FindModes, StableUnderTolerance1e11) {
  const Stack s = nominal_stack();
  ModeSearchOptions tight;
  tight.rel_tol = 1e-11;
  const auto a = find_modes(s, kNominalBand, 16);
  const auto b = find_modes(s, kNominalBand, 16, tight);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].fs / b[i].fs, 1.0, 1e-8);
    EXPECT_NEAR(a[i].fp / b[i].fp, 1.0, 1e-8);
  }
}

TEST(FindModes, MaxModesTruncates) {
  const auto modes = find_modes(nominal_stack(), kNominalBand, 2);
  EXPECT_EQ(modes.size(), 2u);
  EXPECT_THROW(find_modes(nominal_stack(), kNominalBand, 0), std::invalid_argument);
}

TEST(FindModes, MasonBackendAgrees) {
  ModeSearchOptions o;
  o.backend = Backend::mason;
  const auto a = find_modes(nominal_stack(), kNominalBand, 16, o);
  const auto b = find_modes(nominal_stack(), kNominalBand, 16);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].fs / b[i].fs, 1.0, 1e-9);
}

TEST(FindModes, EmptyBandThrows) {
  EXPECT_THROW(find_modes(nominal_stack(), FrequencyGrid(1e9, 2e9, 201), 4), ModeSearchError);
  try {
    find_modes(nominal_stack(), FrequencyGrid(1e9, 2e9, 201), 4);
  } catch (const ModeSearchError& e) {
    EXPECT_NE(std::string(e.what()).find("no resonance found"), std::string::npos);
  }
}

TEST(FindModes, DefinitionIsRecorded) {
  ModeSearchOptions o;
  o.definition = Keff2Definition::separation;
  for (const auto& m : find_modes(nominal_stack(), kNominalBand, 16, o)) {
    EXPECT_EQ(m.keff2_definition, Keff2Definition::separation);
    EXPECT_EQ(m.keff2, keff2(m.fs, m.fp, Keff2Definition::separation));
  }
}

TEST(ModesCsv, Format) {
  ModeSummary m;
  m.fs = 1e9;
  m.fp = 1.1e9;
  m.keff2 = 0.1;
  m.eta = 0.5;
  m.qm = 300.0;
  m.fom = 30.0;
  const std::string csv = modes_csv({m});
  EXPECT_EQ(csv, "mode,fs_hz,fp_hz,keff2,eta,qm,fom,keff2_def\n"
                 "0,1000000000,1100000000,0.10000000000000001,0.5,300,30,ieee\n");
}

TEST(Calibration, HitsTargetFrequency) {
  const Stack s = nominal_stack();
  const FrequencyGrid band(3e9, 15e9, 801);
  const Calibration c = calibrate_piezo_stiffness(s, band, 2, 13.12e9);
  EXPECT_GT(c.stiffness_scale, 0.25);
  EXPECT_LT(c.stiffness_scale, 4.0);
  EXPECT_NEAR(c.stack.piezo().material.c33e, s.piezo().material.c33e * c.stiffness_scale, 1.0);
  const auto modes = find_modes(c.stack, band, 3);
  ASSERT_EQ(modes.size(), 3u);
  EXPECT_NEAR(modes[2].fs / 13.12e9, 1.0, 1e-9);
  // Only the piezo c33E changes.
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(c.stack.layer(i).thickness, s.layer(i).thickness);
    if (i != s.piezo_index()) EXPECT_EQ(c.stack.layer(i).material, s.layer(i).material);
  }
}

TEST(Calibration, UnreachableTargetThrows) {
  EXPECT_THROW(calibrate_piezo_stiffness(nominal_stack(), FrequencyGrid(3e9, 15e9, 801), 0, 40e9),
               ModeSearchError);
}
