#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bawkit/modal.hpp"

namespace bawkit {

struct SweepConfig {
  Stack base;
  FrequencyGrid band;
  std::size_t top_layer_index = 0;
  std::size_t bottom_layer_index = 0;
  double ratio_min = 0.2;  // multiples of the piezo thickness
  double ratio_max = 2.0;
  std::size_t grid_n = 25;
  std::size_t n_modes = 3;
  ModeSearchOptions search;

  /// Varies the layers directly above and below the piezo layer.
  SweepConfig(Stack base_stack, FrequencyGrid sweep_band);

  /// Throws ValidationError on an inconsistent configuration.
  void validate() const;
};

/// Row-major grids indexed by cell(b, t) = b * grid_n + t, where b walks the
/// bottom-thickness axis and t the top-thickness axis.
struct ModeGrids {
  std::vector<double> fs, keff2, eta, qm, fom;
  std::vector<double> fs_norm, keff2_norm, fom_norm;
};

struct SweepResult {
  std::size_t grid_n = 0;
  std::size_t n_modes = 0;
  double piezo_thickness = 0.0;
  double f0_piezo = 0.0;
  Keff2Definition keff2_definition = Keff2Definition::ieee;
  std::vector<double> top_thickness;     // m
  std::vector<double> bottom_thickness;  // m
  std::vector<ModeGrids> modes;          // one entry per mode
  std::vector<char> ok;                  // per cell; 0 where detection failed

  std::size_t cell(std::size_t b, std::size_t t) const { return b * grid_n + t; }
  std::size_t masked_count() const;
};

/// Evaluates every (top, bottom) cell with find_modes. Cells are independent
/// work items spread over `jobs` threads (0 = hardware concurrency) and
/// merged by index, so the result does not depend on `jobs`. Throws
/// SweepCoverageError when more than half the cells are masked.
SweepResult run_sweep(const SweepConfig& config, unsigned jobs = 1);

/// Long-format CSV, one row per (cell, mode): bottom-major, then top, then mode.
std::string sweep_csv(const SweepResult& result);
/// Rebuilds a SweepResult from sweep_csv output (normalization re-derived).
SweepResult parse_sweep_csv(std::string_view csv, double piezo_thickness, double f0_piezo);

enum class HeatmapMetric { fs_norm, keff2_norm, fom_norm, eta };

std::string_view to_string(HeatmapMetric metric);
/// Throws std::invalid_argument for an unknown name.
HeatmapMetric heatmap_metric_from_string(std::string_view name);

/// Standalone SVG heat map of one metric for one mode. Deterministic bytes.
///
/// Cells are filled from a 256-level ramp through the viridis anchors
/// #440154, #3b528b, #21918c, #5ec962, #fde725 at 0, 1/4, 1/2, 3/4, 1.
/// A value v in [0, 1] takes level floor(255 v), so only v == 1 reaches the
/// top colour. fs_norm is first mapped linearly from its grid range onto
/// [0, 1]; the other metrics are used as-is. Masked cells are hatched.
std::string heatmap_svg(const SweepResult& result, HeatmapMetric metric, std::size_t mode);

/// Hex colour (#rrggbb) of the ramp at v, clamped to [0, 1].
std::string ramp_color(double v);

void write_text_file(const std::string& path, std::string_view content);

}  // namespace bawkit
