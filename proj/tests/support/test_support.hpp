#pragma once

// Shared helpers for the unit tests and the acceptance runner.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bawkit/materials.hpp"

namespace bawkit::testing {

inline std::string source_path(const std::string& relative) {
  return std::string(BAWKIT_SOURCE_DIR) + "/" + relative;
}

inline Stack nominal_stack() { return load_stack(read_text_file(source_path("data/nominal_stack.json"))); }

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

inline Material random_piezo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Material m;
  m.name = "piezo";
  m.density = 2500.0 + 5000.0 * u(rng);
  m.c33e = 1.0e11 + 3.0e11 * u(rng);
  m.e33 = 0.5 + 2.5 * u(rng);
  m.eps33s = (8.0 + 12.0 * u(rng)) * 8.8541878128e-12;
  m.q_mech = log_uniform(rng, 50.0, 5000.0);
  return m;
}

inline Material random_passive(std::mt19937_64& rng, int i) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Material m;
  m.name = "m" + std::to_string(i);
  m.density = 2000.0 + 20000.0 * u(rng);
  m.c33e = 5.0e10 + 3.5e11 * u(rng);
  m.q_mech = log_uniform(rng, 50.0, 5000.0);
  return m;
}

/// One piezo layer plus 0-4 passive layers at random positions, thickness
/// ratios in [0.1, 3] of the piezo, Q in [50, 5000], random boundaries.
inline Stack random_stack(std::mt19937_64& rng, bool allow_rigid = true) {
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t_piezo = 100e-9 + 900e-9 * u(rng);
  const int n_passive = count(rng);
  std::uniform_int_distribution<int> position(0, n_passive);
  const int piezo_at = position(rng);
  std::vector<Layer> layers;
  for (int i = 0; i < n_passive; ++i) {
    if (i == piezo_at) layers.push_back({random_piezo(rng), t_piezo, LayerRole::piezo});
    const double ratio = 0.1 + 2.9 * u(rng);
    layers.push_back({random_passive(rng, i), ratio * t_piezo,
                      i % 2 ? LayerRole::electrode : LayerRole::passive});
  }
  if (piezo_at == n_passive) layers.push_back({random_piezo(rng), t_piezo, LayerRole::piezo});
  auto boundary = [&] { return allow_rigid && u(rng) < 0.2 ? Boundary::rigid : Boundary::free; };
  const Boundary bottom = boundary();
  const Boundary top = boundary();
  return Stack(std::move(layers), log_uniform(rng, 1e-10, 1e-7), u(rng) < 0.5 ? 0.0 : 2.0 * u(rng),
               bottom, top);
}

}  // namespace bawkit::testing
