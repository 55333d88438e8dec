#include "bawkit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "bawkit/errors.hpp"
#include "bawkit/mbvd.hpp"
#include "bawkit/modal.hpp"
#include "bawkit/sweep.hpp"
#include "bawkit/touchstone.hpp"
#include "decimal.hpp"

namespace bawkit {

namespace fs = std::filesystem;

std::optional<double> parse_frequency(std::string_view text, int default_pow10) {
  static constexpr std::pair<std::string_view, int> kSuffixes[] = {
      {"ghz", 9}, {"mhz", 6}, {"khz", 3}, {"hz", 0}};
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  int pow10 = default_pow10;
  std::string_view number = text;
  for (const auto& [suffix, p] : kSuffixes) {
    if (lower.size() > suffix.size() && lower.ends_with(suffix)) {
      number = text.substr(0, text.size() - suffix.size());
      pow10 = p;
      break;
    }
  }
  auto v = detail::parse_scaled(number, pow10);
  if (!v || !std::isfinite(*v) || !(*v > 0.0)) return std::nullopt;
  return v;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

double frequency_arg(const std::string& text, const std::string& flag, int default_pow10 = 0) {
  auto v = parse_frequency(text, default_pow10);
  if (!v) throw UsageError(flag + ": invalid frequency '" + text + "'");
  return *v;
}

std::pair<std::string, std::string> split_pair(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || text.find(':', colon + 1) != std::string::npos) {
    throw UsageError(flag + ": expected <lo>:<hi>, got '" + text + "'");
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::pair<double, double> band_arg(const std::string& text, const std::string& flag) {
  const auto [lo, hi] = split_pair(text, flag);
  const double a = frequency_arg(lo, flag);
  const double b = frequency_arg(hi, flag);
  if (!(a < b)) throw UsageError(flag + ": lower edge must be below the upper edge");
  return {a, b};
}

// key=value record; the digest covers every line except the timestamp.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) {
    add("subcommand", std::move(subcommand));
    add("version", std::string(kVersion));
  }
  void add(const std::string& key, const std::string& value) {
    body_ += key + "=" + value + "\n";
  }
  void input(const std::string& key, const std::string& path, std::string_view content) {
    add("input." + key + ".path", path);
    add("input." + key + ".sha256", sha256_hex(content));
  }
  void output(const fs::path& path) { add("output", path.generic_string()); }
  std::string text() const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return body_ + "digest=" + sha256_hex(body_) + "\ntimestamp=" + stamp + "\n";
  }

 private:
  std::string body_;
};

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw UsageError("cannot create output directory '" + dir + "'");
  return p;
}

struct Outputs {
  std::vector<std::pair<fs::path, std::string>> files;
  void add(fs::path path, std::string content) { files.emplace_back(std::move(path), std::move(content)); }
  void write(Manifest& manifest, const fs::path& out_dir) {
    for (const auto& [path, content] : files) {
      write_text_file(path.string(), content);
      manifest.output(path);
    }
    write_text_file((out_dir / "manifest.txt").string(), manifest.text());
  }
};

struct SimulateArgs {
  std::string stack, fmin, fmax, backend = "bvp", keff2 = "ieee", out = "out";
  std::size_t points = 0;
  std::size_t max_modes = 16;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const std::string text = read_text_file(a.stack);
  const Stack stack = load_stack(text);
  const FrequencyGrid grid(frequency_arg(a.fmin, "--fmin"), frequency_arg(a.fmax, "--fmax"),
                           a.points);
  std::vector<Backend> backends;
  if (a.backend == "bvp" || a.backend == "both") backends.push_back(Backend::bvp);
  if (a.backend == "mason" || a.backend == "both") backends.push_back(Backend::mason);

  ModeSearchOptions opts;
  opts.definition = keff2_definition_from_string(a.keff2);
  opts.backend = backends.front();

  std::vector<AdmittanceCurve> curves;
  for (Backend b : backends) curves.push_back(spectrum(stack, grid, b));
  const auto modes = find_modes(stack, grid, a.max_modes, opts);

  const fs::path dir = prepare_out(a.out);
  Manifest manifest("simulate");
  manifest.input("stack", a.stack, text);
  manifest.add("config.fmin_hz", fmt(grid.f_min()));
  manifest.add("config.fmax_hz", fmt(grid.f_max()));
  manifest.add("config.points", std::to_string(grid.size()));
  manifest.add("config.backend", a.backend);
  manifest.add("config.keff2_def", a.keff2);
  manifest.add("config.max_modes", std::to_string(a.max_modes));
  if (curves.size() == 2) {
    double dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      dev = std::max(dev, std::abs(curves[0].y[i] - curves[1].y[i]) / std::abs(curves[1].y[i]));
    }
    manifest.add("max_rel_backend_deviation", fmt(dev));
  }
  Outputs files;
  for (std::size_t k = 0; k < backends.size(); ++k) {
    files.add(dir / ("spectrum_" + std::string(to_string(backends[k])) + ".csv"),
              spectrum_csv(curves[k]));
  }
  files.add(dir / "modes.csv", modes_csv(modes));
  files.write(manifest, dir);
  out << "found " << modes.size() << " modes; outputs in " << dir.generic_string() << "\n";
  return exit_ok;
}

struct SweepArgs {
  std::string stack, range = "0.2:2.0", band = "1GHz:40GHz", spacing = "log", keff2 = "ieee",
                     out = "out";
  std::size_t grid = 25, modes = 3, points = 4001;
  unsigned jobs = 0;
  bool heatmaps = false;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const auto [lo_text, hi_text] = split_pair(a.range, "--range");
  const auto lo = detail::parse_double(lo_text);
  const auto hi = detail::parse_double(hi_text);
  if (!lo || !hi) throw UsageError("--range: expected two numbers");
  if (!(*lo > 0.0) || !(*lo < *hi)) throw UsageError("--range: requires 0 < lo < hi");
  const auto [fmin, fmax] = band_arg(a.band, "--band");
  if (a.spacing != "log" && a.spacing != "linear") throw UsageError("--spacing: log or linear");

  const std::string text = read_text_file(a.stack);
  SweepConfig cfg(load_stack(text),
                  FrequencyGrid(fmin, fmax, a.points,
                                a.spacing == "log" ? Spacing::logarithmic : Spacing::linear));
  cfg.ratio_min = *lo;
  cfg.ratio_max = *hi;
  cfg.grid_n = a.grid;
  cfg.n_modes = a.modes;
  cfg.search.definition = keff2_definition_from_string(a.keff2);
  cfg.validate();

  const SweepResult result = run_sweep(cfg, a.jobs);

  const fs::path dir = prepare_out(a.out);
  Manifest manifest("sweep");
  manifest.input("stack", a.stack, text);
  manifest.add("config.grid", std::to_string(cfg.grid_n));
  manifest.add("config.range", detail::shortest(cfg.ratio_min) + ":" + detail::shortest(cfg.ratio_max));
  manifest.add("config.modes", std::to_string(cfg.n_modes));
  manifest.add("config.band_hz", fmt(fmin) + ":" + fmt(fmax));
  manifest.add("config.points", std::to_string(a.points));
  manifest.add("config.spacing", a.spacing);
  manifest.add("config.keff2_def", a.keff2);
  manifest.add("config.top_layer_index", std::to_string(cfg.top_layer_index));
  manifest.add("config.bottom_layer_index", std::to_string(cfg.bottom_layer_index));
  manifest.add("masked_cells", std::to_string(result.masked_count()));
  Outputs files;
  files.add(dir / "sweep.csv", sweep_csv(result));
  if (a.heatmaps) {
    for (std::size_t m = 0; m < result.n_modes; ++m) {
      for (HeatmapMetric metric :
           {HeatmapMetric::fs_norm, HeatmapMetric::keff2_norm, HeatmapMetric::fom_norm}) {
        files.add(dir / ("heatmap_" + std::string(to_string(metric)) + "_mode" +
                         std::to_string(m) + ".svg"),
                  heatmap_svg(result, metric, m));
      }
    }
  }
  files.write(manifest, dir);
  out << "swept " << cfg.grid_n * cfg.grid_n << " cells (" << result.masked_count()
      << " masked); outputs in " << dir.generic_string() << "\n";
  return exit_ok;
}

struct FitArgs {
  std::string s2p, band, topology = "series", coupling = "ratio", out = "out";
  std::size_t max_evaluations = 4000;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const auto band = band_arg(a.band, "--band");
  const Topology topology = topology_from_string(a.topology);
  FitOptions opts;
  opts.band = band;
  if (a.max_evaluations < 1) throw UsageError("--max-evaluations must be >= 1");
  opts.max_evaluations = a.max_evaluations;
  if (a.coupling == "ratio") {
    opts.coupling = MbvdCoupling::ratio;
  } else if (a.coupling == "normalized") {
    opts.coupling = MbvdCoupling::normalized;
  } else {
    throw UsageError("--coupling: ratio or normalized");
  }
  const std::string text = read_text_file(a.s2p);
  const TouchstoneData data = parse_touchstone(text);
  const AdmittanceCurve curve = device_admittance(s_to_y(data), topology);
  const FitReport report = fit_mbvd(curve, opts);

  const fs::path dir = prepare_out(a.out);
  Manifest manifest("fit");
  manifest.input("s2p", a.s2p, text);
  manifest.add("config.band_hz", fmt(band.first) + ":" + fmt(band.second));
  manifest.add("config.topology", a.topology);
  manifest.add("config.device_admittance", topology == Topology::shunt ? "Y11" : "-Y12");
  manifest.add("config.coupling", a.coupling);
  manifest.add("config.max_evaluations", std::to_string(a.max_evaluations));
  manifest.add("iterations", std::to_string(report.n_iterations));
  manifest.add("converged", report.converged ? "true" : "false");

  AdmittanceCurve in_band;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    if (curve.frequencies[i] >= band.first && curve.frequencies[i] <= band.second) {
      in_band.frequencies.push_back(curve.frequencies[i]);
      in_band.y.push_back(curve.y[i]);
    }
  }
  Outputs files;
  files.add(dir / "fit_report.txt", fit_report_text(report));
  files.add(dir / "fit_model.csv", fit_csv(in_band, report.params));
  files.write(manifest, dir);
  if (!report.converged) {
    out << "fit did not converge; report in " << dir.generic_string() << "\n";
    return exit_no_converge;
  }
  out << "fit converged after " << report.n_iterations << " iterations; outputs in "
      << dir.generic_string() << "\n";
  return exit_ok;
}

struct EstimateArgs {
  int mode_order = 0;
  double velocity = 0.0;
  std::string thickness, frequency;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  if (a.thickness.empty() == a.frequency.empty()) {
    throw UsageError("give exactly one of --thickness or --frequency");
  }
  if (a.mode_order < 1) throw UsageError("--mode-order must be >= 1");
  if (!(a.velocity > 0.0) || !std::isfinite(a.velocity)) throw UsageError("--velocity must be > 0");
  char buf[64];
  if (!a.thickness.empty()) {
    const auto t = detail::parse_scaled(a.thickness, -9);
    if (!t || !(*t > 0.0) || !std::isfinite(*t)) throw UsageError("--thickness must be > 0 (nm)");
    const double f = estimate_frequency(a.mode_order, a.velocity, *t);
    std::snprintf(buf, sizeof buf, "frequency_hz=%.15g\n", f);
  } else {
    const double f = frequency_arg(a.frequency, "--frequency", 9);
    const double t = estimate_thickness(f, a.mode_order, a.velocity);
    std::snprintf(buf, sizeof buf, "thickness_nm=%.15g\n", t * 1e9);
  }
  out << buf;
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layered bulk acoustic resonator simulation, sweeps and mBVD fitting", "bawkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::string freq_note =
      "Frequencies accept Hz, kHz, MHz or GHz suffixes; bare numbers are Hz.";

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Admittance spectrum and mode table of a stack");
  simulate->footer(freq_note);
  simulate->add_option("--stack", sim.stack, "Stack JSON file")->required();
  simulate->add_option("--fmin", sim.fmin, "Lower band edge")->required();
  simulate->add_option("--fmax", sim.fmax, "Upper band edge")->required();
  simulate->add_option("--points", sim.points, "Number of grid points (>= 2)")->required();
  simulate->add_option("--backend", sim.backend, "bvp, mason or both")
      ->check(CLI::IsMember({"bvp", "mason", "both"}));
  simulate->add_option("--keff2", sim.keff2, "ieee, separation or approx")
      ->check(CLI::IsMember({"ieee", "separation", "approx"}));
  simulate->add_option("--max-modes", sim.max_modes, "Upper bound on reported modes")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "Output directory");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Electrode thickness sweep around the piezo layer");
  sweep->footer(freq_note + " Band defaults to 1GHz:40GHz.");
  sweep->add_option("--stack", sw.stack, "Stack JSON file")->required();
  sweep->add_option("--grid", sw.grid, "Points per thickness axis");
  sweep->add_option("--range", sw.range, "Thickness range lo:hi in units of t_piezo");
  sweep->add_option("--modes", sw.modes, "Modes per cell");
  sweep->add_option("--band", sw.band, "Search band fmin:fmax");
  sweep->add_option("--points", sw.points, "Search grid points per cell");
  sweep->add_option("--spacing", sw.spacing, "log or linear search grid");
  sweep->add_option("--keff2", sw.keff2, "ieee, separation or approx")
      ->check(CLI::IsMember({"ieee", "separation", "approx"}));
  sweep->add_option("--jobs", sw.jobs, "Worker threads (0 = all cores)");
  sweep->add_flag("--heatmaps", sw.heatmaps, "Write SVG heat maps");
  sweep->add_option("--out", sw.out, "Output directory");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "mBVD fit of a two-port Touchstone file");
  fit->footer(freq_note);
  fit->add_option("--s2p", fa.s2p, "Touchstone v1 .s2p file")->required();
  fit->add_option("--band", fa.band, "Fit band fmin:fmax")->required();
  fit->add_option("--topology", fa.topology, "series (-Y12) or shunt (Y11)")
      ->check(CLI::IsMember({"series", "shunt"}));
  fit->add_option("--coupling", fa.coupling, "ratio or normalized mBVD coupling");
  fit->add_option("--max-evaluations", fa.max_evaluations, "Residual evaluation budget per start");
  fit->add_option("--out", fa.out, "Output directory");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "f_n = n v / (2 t) or its inverse");
  estimate->footer("--frequency accepts Hz, kHz, MHz or GHz suffixes; bare numbers are GHz.");
  estimate->add_option("--mode-order", ea.mode_order, "Mode order n >= 1")->required();
  estimate->add_option("--velocity", ea.velocity, "Phase velocity, m/s")->required();
  estimate->add_option("--thickness", ea.thickness, "Thickness, nm");
  estimate->add_option("--frequency", ea.frequency, "Frequency (GHz by default)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return exit_ok;
    }
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*sweep) return cmd_sweep(sw, out);
    if (*fit) return cmd_fit(fa, out);
    if (*estimate) return cmd_estimate(ea, out);
  } catch (const SweepCoverageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_coverage;
  } catch (const PhysicsError& e) {
    err << "error: " << e.what() << "\n";
    return exit_physics;
  } catch (const ModeSearchError& e) {
    err << "error: " << e.what() << "\n";
    return exit_physics;
  } catch (const std::exception& e) {
    // Parse, validation, usage and I/O failures.
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace bawkit
