#include "bawkit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bawkit/errors.hpp"
#include "decimal.hpp"

namespace bawkit {

SweepConfig::SweepConfig(Stack base_stack, FrequencyGrid sweep_band)
    : base(std::move(base_stack)), band(sweep_band) {
  const std::size_t ip = base.piezo_index();
  top_layer_index = ip + 1;
  bottom_layer_index = ip > 0 ? ip - 1 : base.size();
}

void SweepConfig::validate() const {
  const std::size_t ip = base.piezo_index();
  if (top_layer_index >= base.size() || top_layer_index == ip) {
    throw ValidationError("sweep.top_layer_index", "must name a non-piezo layer");
  }
  if (bottom_layer_index >= base.size() || bottom_layer_index == ip) {
    throw ValidationError("sweep.bottom_layer_index", "must name a non-piezo layer");
  }
  if (top_layer_index == bottom_layer_index) {
    throw ValidationError("sweep.top_layer_index", "top and bottom layers must differ");
  }
  if (!(ratio_min > 0.0) || !(ratio_max > ratio_min) || !std::isfinite(ratio_max)) {
    throw ValidationError("sweep.range", "requires 0 < ratio_min < ratio_max");
  }
  if (grid_n < 2) throw ValidationError("sweep.grid_n", "at least 2 points per axis");
  if (n_modes < 1) throw ValidationError("sweep.n_modes", "at least one mode");
}

std::size_t SweepResult::masked_count() const {
  return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), char{0}));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> axis(double t_piezo, double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio =
        i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = ratio * t_piezo;
  }
  return out;
}

ModeGrids empty_grids(std::size_t cells) {
  ModeGrids g;
  for (auto* v : {&g.fs, &g.keff2, &g.eta, &g.qm, &g.fom, &g.fs_norm, &g.keff2_norm, &g.fom_norm}) {
    v->assign(cells, kNaN);
  }
  return g;
}

void normalize(SweepResult& r) {
  for (auto& g : r.modes) {
    double k_max = 0.0;
    double f_max = 0.0;
    for (std::size_t c = 0; c < r.ok.size(); ++c) {
      if (!r.ok[c]) continue;
      k_max = std::max(k_max, g.keff2[c]);
      f_max = std::max(f_max, g.fom[c]);
    }
    for (std::size_t c = 0; c < r.ok.size(); ++c) {
      if (!r.ok[c]) continue;
      g.fs_norm[c] = g.fs[c] / r.f0_piezo;
      g.keff2_norm[c] = g.keff2[c] / k_max;
      g.fom_norm[c] = g.fom[c] / f_max;
    }
  }
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, unsigned jobs) {
  config.validate();
  const double t_piezo = config.base.piezo().thickness;
  const std::size_t n = config.grid_n;
  const std::size_t cells = n * n;

  SweepResult r;
  r.grid_n = n;
  r.n_modes = config.n_modes;
  r.piezo_thickness = t_piezo;
  r.f0_piezo = derive_constants(config.base).f0_piezo;
  r.keff2_definition = config.search.definition;
  r.top_thickness = axis(t_piezo, config.ratio_min, config.ratio_max, n);
  r.bottom_thickness = axis(t_piezo, config.ratio_min, config.ratio_max, n);
  r.modes.assign(config.n_modes, empty_grids(cells));
  r.ok.assign(cells, 0);

  auto evaluate = [&](std::size_t c) {
    const std::size_t b = c / n;
    const std::size_t t = c % n;
    try {
      const Stack stack = config.base.with_thickness(config.top_layer_index, r.top_thickness[t])
                              .with_thickness(config.bottom_layer_index, r.bottom_thickness[b]);
      const auto modes = find_modes(stack, config.band, config.n_modes, config.search);
      if (modes.size() < config.n_modes) return;
      for (std::size_t m = 0; m < config.n_modes; ++m) {
        ModeGrids& g = r.modes[m];
        g.fs[c] = modes[m].fs;
        g.keff2[c] = modes[m].keff2;
        g.eta[c] = modes[m].eta;
        g.qm[c] = modes[m].qm;
        g.fom[c] = modes[m].fom;
      }
      r.ok[c] = 1;
    } catch (const ModeSearchError&) {
    } catch (const PhysicsError&) {
    }
  };

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cells));
  if (jobs <= 1) {
    for (std::size_t c = 0; c < cells; ++c) evaluate(c);
  } else {
    // Each cell writes only its own slots, so workers share no mutable state.
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t c = next++; c < cells; c = next++) evaluate(c);
      });
    }
  }

  if (2 * r.masked_count() > cells) {
    throw SweepCoverageError("band does not cover requested modes (" +
                             std::to_string(r.masked_count()) + " of " + std::to_string(cells) +
                             " cells masked)");
  }
  normalize(r);
  return r;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "t_top_m,t_bot_m,mode,fs_hz,fs_norm,keff2,keff2_norm,eta,qm,fom,fom_norm,ok\n";
  for (std::size_t b = 0; b < r.grid_n; ++b) {
    for (std::size_t t = 0; t < r.grid_n; ++t) {
      const std::size_t c = r.cell(b, t);
      for (std::size_t m = 0; m < r.n_modes; ++m) {
        append_number(out, r.top_thickness[t]);
        out += ',';
        append_number(out, r.bottom_thickness[b]);
        out += ',';
        out += std::to_string(m);
        const ModeGrids& g = r.modes[m];
        for (double v : {g.fs[c], g.fs_norm[c], g.keff2[c], g.keff2_norm[c], g.eta[c], g.qm[c],
                         g.fom[c], g.fom_norm[c]}) {
          out += ',';
          if (r.ok[c]) append_number(out, v);
        }
        out += r.ok[c] ? ",1\n" : ",0\n";
      }
    }
  }
  return out;
}

SweepResult parse_sweep_csv(std::string_view csv, double piezo_thickness, double f0_piezo) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) ||
      line != "t_top_m,t_bot_m,mode,fs_hz,fs_norm,keff2,keff2_norm,eta,qm,fom,fom_norm,ok") {
    throw ParseError("unexpected sweep CSV header", 1);
  }
  struct Row {
    double top, bot;
    std::size_t mode;
    double fs, keff2, eta, qm, fom;
    bool ok;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (line.back() == ',') cols.emplace_back();
    if (cols.size() != 12) throw ParseError("expected 12 columns", line_no);
    auto num = [&](const std::string& s) {
      if (s.empty()) return kNaN;
      auto v = detail::parse_double(s);
      if (!v) throw ParseError("bad number '" + s + "'", line_no);
      return *v;
    };
    Row r{num(cols[0]), num(cols[1]), static_cast<std::size_t>(num(cols[2])),
          num(cols[3]), num(cols[5]), num(cols[7]), num(cols[8]), num(cols[9]),
          cols[11] == "1"};
    rows.push_back(r);
  }
  SweepResult r;
  r.piezo_thickness = piezo_thickness;
  r.f0_piezo = f0_piezo;
  for (const Row& row : rows) {
    r.n_modes = std::max(r.n_modes, row.mode + 1);
    if (std::find(r.top_thickness.begin(), r.top_thickness.end(), row.top) == r.top_thickness.end()) {
      r.top_thickness.push_back(row.top);
    }
    if (std::find(r.bottom_thickness.begin(), r.bottom_thickness.end(), row.bot) ==
        r.bottom_thickness.end()) {
      r.bottom_thickness.push_back(row.bot);
    }
  }
  r.grid_n = r.top_thickness.size();
  if (r.bottom_thickness.size() != r.grid_n || rows.size() != r.grid_n * r.grid_n * r.n_modes) {
    throw ParseError("sweep CSV is not a complete square grid");
  }
  r.modes.assign(r.n_modes, empty_grids(r.grid_n * r.grid_n));
  r.ok.assign(r.grid_n * r.grid_n, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    const std::size_t c = i / r.n_modes;
    r.ok[c] = row.ok ? 1 : 0;
    ModeGrids& g = r.modes[row.mode];
    g.fs[c] = row.fs;
    g.keff2[c] = row.keff2;
    g.eta[c] = row.eta;
    g.qm[c] = row.qm;
    g.fom[c] = row.fom;
  }
  normalize(r);
  return r;
}

std::string_view to_string(HeatmapMetric metric) {
  switch (metric) {
    case HeatmapMetric::fs_norm: return "fs_norm";
    case HeatmapMetric::keff2_norm: return "keff2_norm";
    case HeatmapMetric::fom_norm: return "fom_norm";
    case HeatmapMetric::eta: return "eta";
  }
  return "eta";
}

HeatmapMetric heatmap_metric_from_string(std::string_view name) {
  if (name == "fs_norm") return HeatmapMetric::fs_norm;
  if (name == "keff2_norm") return HeatmapMetric::keff2_norm;
  if (name == "fom_norm") return HeatmapMetric::fom_norm;
  if (name == "eta") return HeatmapMetric::eta;
  throw std::invalid_argument("unknown heatmap metric '" + std::string(name) + "'");
}

std::string ramp_color(double v) {
  static constexpr int kAnchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  v = std::clamp(v, 0.0, 1.0);
  const int level = std::min(255, static_cast<int>(std::floor(v * 255.0)));
  const double x = level / 255.0 * 4.0;
  const int seg = std::min(3, static_cast<int>(x));
  const double w = x - seg;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    rgb[k] = static_cast<int>(std::lround(kAnchors[seg][k] + w * (kAnchors[seg + 1][k] - kAnchors[seg][k])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string heatmap_svg(const SweepResult& r, HeatmapMetric metric, std::size_t mode) {
  if (mode >= r.modes.size()) throw std::invalid_argument("mode index out of range");
  const ModeGrids& g = r.modes[mode];
  const std::vector<double>* values = nullptr;
  switch (metric) {
    case HeatmapMetric::fs_norm: values = &g.fs_norm; break;
    case HeatmapMetric::keff2_norm: values = &g.keff2_norm; break;
    case HeatmapMetric::fom_norm: values = &g.fom_norm; break;
    case HeatmapMetric::eta: values = &g.eta; break;
  }

  double lo = 0.0;
  double hi = 1.0;
  if (metric == HeatmapMetric::fs_norm) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t c = 0; c < r.ok.size(); ++c) {
      if (!r.ok[c]) continue;
      lo = std::min(lo, (*values)[c]);
      hi = std::max(hi, (*values)[c]);
    }
    if (!(hi >= lo)) {
      lo = 0.0;
      hi = 1.0;
    }
  }
  auto unit = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

  const int cell = 16;
  const int n = static_cast<int>(r.grid_n);
  const int x0 = 80;
  const int y0 = 50;
  const int plot = n * cell;
  const int legend_x = x0 + plot + 30;
  const int width = legend_x + 90;
  const int height = y0 + plot + 70;
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\" font-family=\"sans-serif\" font-size=\"11\">\n",
                width, height, width, height);
  out += buf;
  out +=
      "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
      "<rect width=\"6\" height=\"6\" fill=\"#ffffff\"/>"
      "<path d=\"M0,6 L6,0\" stroke=\"#808080\" stroke-width=\"1\"/></pattern></defs>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">%s, mode %zu</text>\n",
                x0 + plot / 2, std::string(to_string(metric)).c_str(), mode);
  out += buf;

  // Bottom thickness grows upwards, top thickness to the right.
  for (int b = 0; b < n; ++b) {
    for (int t = 0; t < n; ++t) {
      const std::size_t c = r.cell(static_cast<std::size_t>(b), static_cast<std::size_t>(t));
      const int x = x0 + t * cell;
      const int y = y0 + (n - 1 - b) * cell;
      const std::string fill = r.ok[c] ? ramp_color(unit((*values)[c])) : "url(#hatch)";
      std::snprintf(buf, sizeof buf,
                    "<rect class=\"cell\" data-b=\"%d\" data-t=\"%d\" x=\"%d\" y=\"%d\" "
                    "width=\"%d\" height=\"%d\" fill=\"%s\"/>\n",
                    b, t, x, y, cell, cell, fill.c_str());
      out += buf;
    }
  }

  const double tp = r.piezo_thickness;
  auto ratio_label = [&](double t) {
    std::snprintf(buf, sizeof buf, "%.2f", t / tp);
    return std::string(buf);
  };
  std::string label;
  for (int i : {0, n / 2, n - 1}) {
    label = ratio_label(r.top_thickness[static_cast<std::size_t>(i)]);
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n",
                  x0 + i * cell + cell / 2, y0 + plot + 16, label.c_str());
    out += buf;
    label = ratio_label(r.bottom_thickness[static_cast<std::size_t>(i)]);
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%s</text>\n",
                  x0 - 6, y0 + (n - 1 - i) * cell + cell / 2 + 4, label.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">t_top / t_piezo</text>\n",
                x0 + plot / 2, y0 + plot + 40);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"20\" y=\"%d\" text-anchor=\"middle\" transform=\"rotate(-90 20 %d)\">"
                "t_bottom / t_piezo</text>\n",
                y0 + plot / 2, y0 + plot / 2);
  out += buf;

  // Legend: 64 bands from the bottom (0) to the top (1).
  const int bands = 64;
  const double band_h = static_cast<double>(plot) / bands;
  for (int i = 0; i < bands; ++i) {
    const double v = i + 1 == bands ? 1.0 : static_cast<double>(i) / (bands - 1);
    std::snprintf(buf, sizeof buf,
                  "<rect class=\"legend\" x=\"%d\" y=\"%.3f\" width=\"16\" height=\"%.3f\" "
                  "fill=\"%s\"/>\n",
                  legend_x, y0 + plot - (i + 1) * band_h, band_h, ramp_color(v).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\">%.4g</text>\n", legend_x + 22,
                y0 + plot, lo);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\">%.4g</text>\n", legend_x + 22, y0 + 8,
                hi);
  out += buf;
  out += "</svg>\n";
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace bawkit
