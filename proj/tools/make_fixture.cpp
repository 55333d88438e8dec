// Writes the forward-modelled two-port fixture used by the fit tests: an mBVD
// resonator in series between two 50 ohm ports, noiseless, MA format.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <string>

#include "bawkit/mbvd.hpp"
#include "bawkit/sweep.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <out.s2p>\n";
    return 2;
  }
  using namespace bawkit;
  constexpr double pi = std::numbers::pi;
  const double fs = 13.3e9;
  const double qs = 210.0;
  const double keff2 = 0.052;

  // Invert fs = 1/(2 pi sqrt(lm cm)), qs = 2 pi fs lm / rm, keff2 = (pi^2/8) cm/c0.
  MbvdParams p;
  p.c0 = 0.25e-12;
  p.cm = p.c0 * keff2 * 8.0 / (pi * pi);
  p.lm = 1.0 / ((2.0 * pi * fs) * (2.0 * pi * fs) * p.cm);
  p.rm = 2.0 * pi * fs * p.lm / qs;
  p.r0 = 0.5;
  p.rs = 1.5;

  TouchstoneData data;
  data.unit = FrequencyUnit::ghz;
  data.format = DataFormat::ma;
  data.z0 = 50.0;
  const FrequencyGrid grid(12.5e9, 14e9, 601);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid.at(i);
    data.frequencies.push_back(f);
    data.s.push_back(series_element_s(1.0 / mbvd_admittance(p, f), data.z0));
  }
  write_text_file(argv[1], emit_touchstone(data));
  return 0;
}
