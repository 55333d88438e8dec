#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "bawkit/errors.hpp"
#include "bawkit/sweep.hpp"
#include "test_support.hpp"

using namespace bawkit;
using bawkit::testing::nominal_stack;

namespace {

SweepConfig small_config(std::size_t n, std::size_t modes) {
  SweepConfig c(nominal_stack(), FrequencyGrid(1e9, 30e9, 1501, Spacing::logarithmic));
  c.grid_n = n;
  c.n_modes = modes;
  return c;
}

std::size_t count(const std::string& text, const std::string& what) {
  std::size_t k = 0;
  for (std::size_t p = text.find(what); p != std::string::npos; p = text.find(what, p + 1)) ++k;
  return k;
}

// A hand-built result for rendering tests.
SweepResult synthetic(std::size_t n, double value) {
  SweepResult r;
  r.grid_n = n;
  r.n_modes = 1;
  r.piezo_thickness = 250e-9;
  r.f0_piezo = 1e10;
  for (std::size_t i = 0; i < n; ++i) {
    r.top_thickness.push_back((0.2 + 0.1 * i) * 250e-9);
    r.bottom_thickness.push_back((0.2 + 0.1 * i) * 250e-9);
  }
  ModeGrids g;
  for (auto* v : {&g.fs, &g.keff2, &g.eta, &g.qm, &g.fom, &g.fs_norm, &g.keff2_norm, &g.fom_norm}) {
    v->assign(n * n, value);
  }
  r.modes = {g};
  r.ok.assign(n * n, 1);
  return r;
}

std::vector<std::string> cell_fills(const std::string& svg) {
  static const std::regex re("class=\"cell\"[^>]*fill=\"([^\"]+)\"");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

}  // namespace

TEST(SweepConfig, DefaultsAroundPiezo) {
  const SweepConfig c(nominal_stack(), FrequencyGrid(1e9, 40e9, 11));
  EXPECT_EQ(c.top_layer_index, 2u);
  EXPECT_EQ(c.bottom_layer_index, 0u);
  EXPECT_EQ(c.grid_n, 25u);
  EXPECT_EQ(c.n_modes, 3u);
  EXPECT_NO_THROW(c.validate());
}

TEST(SweepConfig, Validation) {
  SweepConfig c = small_config(3, 1);
  c.top_layer_index = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(3, 1);
  c.top_layer_index = 7;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(3, 1);
  c.bottom_layer_index = c.top_layer_index;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(3, 1);
  c.ratio_min = 2.0;
  c.ratio_max = 0.2;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(3, 1);
  c.ratio_min = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(1, 1);
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(3, 0);
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(run_sweep(c), ValidationError);
}

TEST(RunSweep, CornersMatchStandaloneEvaluation) {
  const SweepConfig c = small_config(2, 2);
  const SweepResult r = run_sweep(c);
  const double tp = 250e-9;
  EXPECT_NEAR(r.top_thickness.front(), 0.2 * tp, 1e-22);
  EXPECT_NEAR(r.top_thickness.back(), 2.0 * tp, 1e-22);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t t = 0; t < 2; ++t) {
      const Stack s = c.base.with_thickness(2, r.top_thickness[t]).with_thickness(0, r.bottom_thickness[b]);
      const auto modes = find_modes(s, c.band, 2);
      const std::size_t cell = r.cell(b, t);
      ASSERT_TRUE(r.ok[cell]);
      for (std::size_t m = 0; m < 2; ++m) {
        EXPECT_EQ(r.modes[m].fs[cell], modes[m].fs);
        EXPECT_EQ(r.modes[m].keff2[cell], modes[m].keff2);
        EXPECT_EQ(r.modes[m].eta[cell], modes[m].eta);
        EXPECT_EQ(r.modes[m].fom[cell], modes[m].fom);
      }
    }
  }
}

TEST(RunSweep, ThreadCountDoesNotChangeResult) {
  const SweepConfig c = small_config(4, 2);
  const std::string a = sweep_csv(run_sweep(c, 1));
  EXPECT_EQ(sweep_csv(run_sweep(c, 3)), a);
  EXPECT_EQ(sweep_csv(run_sweep(c, 16)), a);
  EXPECT_EQ(sweep_csv(run_sweep(c, 0)), a);
}

TEST(RunSweep, Normalization) {
  const SweepResult r = run_sweep(small_config(4, 2), 2);
  for (const ModeGrids& g : r.modes) {
    double k_max = 0.0;
    double f_max = 0.0;
    for (std::size_t c = 0; c < r.ok.size(); ++c) {
      if (!r.ok[c]) continue;
      EXPECT_EQ(g.fs_norm[c], g.fs[c] / r.f0_piezo);
      EXPECT_LE(g.keff2_norm[c], 1.0);
      EXPECT_LE(g.fom_norm[c], 1.0);
      k_max = std::max(k_max, g.keff2_norm[c]);
      f_max = std::max(f_max, g.fom_norm[c]);
    }
    EXPECT_EQ(k_max, 1.0);
    EXPECT_EQ(f_max, 1.0);
  }
}

TEST(RunSweep, ResonancesFallWithElectrodeThickness) {
  const SweepResult r = run_sweep(small_config(5, 3));
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& fs = r.modes[m].fs;
    for (std::size_t b = 0; b < 5; ++b) {
      for (std::size_t t = 1; t < 5; ++t) {
        if (r.ok[r.cell(b, t)] && r.ok[r.cell(b, t - 1)]) {
          EXPECT_LT(fs[r.cell(b, t)], fs[r.cell(b, t - 1)]) << m;
        }
        if (r.ok[r.cell(t, b)] && r.ok[r.cell(t - 1, b)]) {
          EXPECT_LT(fs[r.cell(t, b)], fs[r.cell(t - 1, b)]) << m;
        }
      }
    }
  }
}

TEST(RunSweep, TwoByTwoSingleModeFullyPopulated) {
  const SweepResult r = run_sweep(small_config(2, 1));
  EXPECT_EQ(r.masked_count(), 0u);
  EXPECT_EQ(r.ok.size(), 4u);
}

TEST(RunSweep, NarrowBandRaisesCoverageError) {
  SweepConfig c(nominal_stack(), FrequencyGrid(1e9, 2e9, 201));
  c.grid_n = 3;
  c.n_modes = 1;
  EXPECT_THROW(run_sweep(c), SweepCoverageError);
}

TEST(SweepCsv, RowsAndMaskFormat) {
  SweepResult r = run_sweep(small_config(3, 2));
  r.ok[4] = 0;
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t_top_m,t_bot_m,mode,fs_hz,fs_norm,keff2,keff2_norm,eta,qm,fom,fom_norm,ok");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 9 * 2);
  EXPECT_EQ(count(csv, ",,,,,,,,0\n"), 2u);
}

TEST(SweepCsv, RoundTrip) {
  const SweepResult r = run_sweep(small_config(3, 2));
  const std::string csv = sweep_csv(r);
  const SweepResult back = parse_sweep_csv(csv, r.piezo_thickness, r.f0_piezo);
  EXPECT_EQ(sweep_csv(back), csv);
  EXPECT_EQ(back.grid_n, 3u);
  EXPECT_EQ(back.n_modes, 2u);
}

TEST(SweepCsv, RejectsMalformed) {
  EXPECT_THROW(parse_sweep_csv("a,b\n", 1.0, 1.0), ParseError);
  const std::string header = "t_top_m,t_bot_m,mode,fs_hz,fs_norm,keff2,keff2_norm,eta,qm,fom,fom_norm,ok\n";
  EXPECT_THROW(parse_sweep_csv(header + "1,2,0\n", 1.0, 1.0), ParseError);
}

TEST(Heatmap, RampEndpointsAndLevels) {
  EXPECT_EQ(ramp_color(0.0), "#440154");
  EXPECT_EQ(ramp_color(1.0), "#fde725");
  EXPECT_EQ(ramp_color(0.5), ramp_color(0.5 - 1e-9));
  EXPECT_NE(ramp_color(1.0 - 1e-9), "#fde725");
  EXPECT_EQ(ramp_color(-3.0), "#440154");
  EXPECT_EQ(ramp_color(7.0), "#fde725");
  std::set<std::string> levels;
  for (int i = 0; i <= 1000; ++i) levels.insert(ramp_color(i / 1000.0));
  EXPECT_LE(levels.size(), 256u);
  EXPECT_GT(levels.size(), 200u);
}

TEST(Heatmap, UniformFieldIsOneColour) {
  const SweepResult r = synthetic(4, 1.0);
  EXPECT_EQ(cell_fills(heatmap_svg(r, HeatmapMetric::fom_norm, 0)),
            std::vector<std::string>(16, "#fde725"));
  // A flat fs_norm grid has no range and maps to mid-ramp.
  EXPECT_EQ(cell_fills(heatmap_svg(r, HeatmapMetric::fs_norm, 0)),
            std::vector<std::string>(16, ramp_color(0.5)));
}

TEST(Heatmap, ExtremeValuesGetEndColours) {
  SweepResult r = synthetic(2, 0.0);
  r.modes[0].eta = {0.0, 1.0, 1.0, 0.0};
  const auto fills = cell_fills(heatmap_svg(r, HeatmapMetric::eta, 0));
  ASSERT_EQ(fills.size(), 4u);
  // Cells are emitted bottom-major: (b0,t0), (b0,t1), (b1,t0), (b1,t1).
  EXPECT_EQ(fills, (std::vector<std::string>{"#440154", "#fde725", "#fde725", "#440154"}));
}

TEST(Heatmap, MaskedCellsAreHatched) {
  SweepResult r = synthetic(3, 0.0);
  r.ok[0] = 0;
  r.ok[8] = 0;
  const std::string svg = heatmap_svg(r, HeatmapMetric::eta, 0);
  EXPECT_EQ(count(svg, "fill=\"url(#hatch)\""), 2u);
  EXPECT_NE(svg.find("<pattern id=\"hatch\""), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"legend\""), 64u);
  EXPECT_NE(svg.find("t_top / t_piezo"), std::string::npos);
  EXPECT_NE(svg.find("t_bottom / t_piezo"), std::string::npos);
  EXPECT_NE(svg.find("eta, mode 0"), std::string::npos);
}

TEST(Heatmap, DeterministicBytes) {
  const SweepResult r = run_sweep(small_config(3, 1));
  EXPECT_EQ(heatmap_svg(r, HeatmapMetric::keff2_norm, 0), heatmap_svg(r, HeatmapMetric::keff2_norm, 0));
  EXPECT_THROW(heatmap_svg(r, HeatmapMetric::eta, 1), std::invalid_argument);
}

TEST(Heatmap, MetricNames) {
  for (auto m : {HeatmapMetric::fs_norm, HeatmapMetric::keff2_norm, HeatmapMetric::fom_norm,
                 HeatmapMetric::eta}) {
    EXPECT_EQ(heatmap_metric_from_string(to_string(m)), m);
  }
  EXPECT_THROW(heatmap_metric_from_string("qm"), std::invalid_argument);
}

TEST(Heatmap, NominalFomPeakIsSingleTopColourCell) {
  SweepConfig c(nominal_stack(), FrequencyGrid(1e9, 40e9, 4001, Spacing::logarithmic));
  c.grid_n = 9;
  const SweepResult r = run_sweep(c, 0);
  const auto fills = cell_fills(heatmap_svg(r, HeatmapMetric::fom_norm, 2));
  EXPECT_EQ(std::count(fills.begin(), fills.end(), "#fde725"), 1);
}
