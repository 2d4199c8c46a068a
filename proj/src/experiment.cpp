#include "maskblur/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <vector>

#include "maskblur/calib.hpp"
#include "maskblur/errors.hpp"
#include "maskblur/io.hpp"
#include "maskblur/metrics.hpp"
#include "maskblur/recon.hpp"
#include "maskblur/rng.hpp"
#include "maskblur/simkit.hpp"
#include "maskblur/spectral.hpp"
#include "maskblur/svgplot.hpp"
#include "maskblur/system.hpp"
#include "maskblur/version.hpp"

namespace maskblur {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, field + ": " + what);
}

const json& get_field(const json& j, const std::string& parent, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) config_fail(parent.empty() ? key : parent + "." + key, "missing");
  return *it;
}

template <typename T>
T get_or(const json& j, const std::string& parent, const std::string& key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_fail(parent.empty() ? key : parent + "." + key, "wrong type");
  }
}

template <typename T>
T get_required(const json& j, const std::string& parent, const std::string& key) {
  const json& f = get_field(j, parent, key);
  try {
    return f.get<T>();
  } catch (const json::exception&) {
    config_fail(parent.empty() ? key : parent + "." + key, "wrong type");
  }
}

enum class ExperimentKind { Spectrum, Reconstruct, SweepK, OneD, Calibrate, MTF };

struct SolverSpec {
  SolverKind kind = SolverKind::Direct;
  double fixed_delta = 0.0;  // 0 means sweep a grid
  int grid_points = 25;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Reconstruct;
  std::string output_dir;
  Geometry geometry;
  std::vector<std::string> kernel_names;
  PatternScheme scheme = PatternScheme::HalfOnExact;
  std::uint64_t pattern_seed = 1;
  int pattern_count = 100;
  std::string scene_path;
  NoiseModel noise;
  std::uint64_t noise_seed = 7;
  SolverSpec solver;
  std::optional<BilinearWarp> distortion;
  double spectrum_tau = 1e-4;
  std::vector<int> k_values;
  // OneD
  int oned_length = 256;
  std::vector<double> oned_taps{1.0, 2.0, 1.0};
  int oned_patterns = 50;
  std::vector<std::uint64_t> oned_seeds{0};
  // Calibrate
  double calib_threshold = 1e-4;
  int calib_repeats = 1;
  NoiseModel calib_noise;
  std::uint64_t calib_seed = 11;
  // MTF
  int mtf_spokes = 16;
  std::vector<double> mtf_radius_fractions;
  json raw;
  std::string config_dir;  // paths in the config resolve relative to it
};

ExperimentKind parse_kind(const std::string& s) {
  if (s == "Spectrum") return ExperimentKind::Spectrum;
  if (s == "Reconstruct") return ExperimentKind::Reconstruct;
  if (s == "SweepK") return ExperimentKind::SweepK;
  if (s == "OneD") return ExperimentKind::OneD;
  if (s == "Calibrate") return ExperimentKind::Calibrate;
  if (s == "MTF") return ExperimentKind::MTF;
  config_fail("kind", "unknown experiment kind \"" + s + "\"");
}

PatternScheme parse_scheme(const std::string& s) {
  if (s == "HalfOnExact") return PatternScheme::HalfOnExact;
  if (s == "Bernoulli") return PatternScheme::Bernoulli;
  if (s == "SingleElement") return PatternScheme::SingleElement;
  config_fail("patterns.scheme", "unknown scheme \"" + s + "\"");
}

NoiseModel parse_noise(const json& j, const std::string& parent, std::uint64_t* seed) {
  NoiseModel noise;
  const std::string kind = get_or<std::string>(j, parent, "kind", "None");
  if (kind == "None")
    noise.kind = NoiseModel::Kind::None;
  else if (kind == "GaussianPsnr")
    noise.kind = NoiseModel::Kind::GaussianPsnr;
  else
    config_fail(parent + ".kind", "unknown noise kind \"" + kind + "\"");
  noise.target_psnr_db = get_or<double>(j, parent, "psnr_db", 40.0);
  if (seed) *seed = get_or<std::uint64_t>(j, parent, "seed", 7);
  return noise;
}

ExperimentConfig parse_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  } catch (const Error& e) {
    // A config file that cannot be opened is a configuration error, not a
    // runtime failure.
    fail(ErrorCode::ConfigInvalid, std::string(e.what()));
  }

  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.config_dir = fs::path(path).parent_path().string();

  const int schema = get_required<int>(j, "", "schema");
  if (schema != 1) config_fail("schema", "unsupported schema " + std::to_string(schema));
  cfg.kind = parse_kind(get_required<std::string>(j, "", "kind"));
  cfg.output_dir = get_required<std::string>(j, "", "output_dir");

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    cfg.geometry = make_geometry(get_or<int>(g, "geometry", "mask_side", 32),
                                 get_or<int>(g, "geometry", "sensor_side", 32),
                                 get_or<int>(g, "geometry", "superres_factor", 4));
  } else {
    cfg.geometry = make_geometry(32, 32, 4);
  }

  cfg.kernel_names = get_or<std::vector<std::string>>(j, "", "kernels", {"disk-1.667"});
  if (cfg.kernel_names.empty()) config_fail("kernels", "must name at least one kernel");

  if (j.contains("patterns")) {
    const json& p = j["patterns"];
    cfg.scheme = parse_scheme(get_or<std::string>(p, "patterns", "scheme", "HalfOnExact"));
    cfg.pattern_seed = get_or<std::uint64_t>(p, "patterns", "seed", 1);
    cfg.pattern_count = get_or<int>(p, "patterns", "count", 100);
    if (cfg.pattern_count < 1) config_fail("patterns.count", "must be >= 1");
  }

  cfg.scene_path = get_or<std::string>(j, "", "scene", "");

  if (j.contains("noise")) cfg.noise = parse_noise(j["noise"], "noise", &cfg.noise_seed);

  if (j.contains("solver")) {
    const json& s = j["solver"];
    const std::string type = get_or<std::string>(s, "solver", "kind", "Direct");
    if (type == "Direct")
      cfg.solver.kind = SolverKind::Direct;
    else if (type == "ConjugateGradient")
      cfg.solver.kind = SolverKind::ConjugateGradient;
    else
      config_fail("solver.kind", "unknown solver \"" + type + "\"");
    cfg.solver.fixed_delta = get_or<double>(s, "solver", "delta", 0.0);
    if (cfg.solver.fixed_delta < 0.0) config_fail("solver.delta", "must be >= 0");
    cfg.solver.grid_points = get_or<int>(s, "solver", "grid_points", 25);
    if (cfg.solver.grid_points < 1) config_fail("solver.grid_points", "must be >= 1");
    cfg.solver.cg_tol = get_or<double>(s, "solver", "cg_tol", 1e-8);
    cfg.solver.cg_max_iter = get_or<int>(s, "solver", "cg_max_iter", 500);
  }

  if (j.contains("distortion")) {
    const json& d = j["distortion"];
    BilinearWarp w;
    w.scale_x = get_or<double>(d, "distortion", "scale_x", 1.0);
    w.scale_y = get_or<double>(d, "distortion", "scale_y", 1.0);
    w.shift_x = get_or<double>(d, "distortion", "shift_x", 0.0);
    w.shift_y = get_or<double>(d, "distortion", "shift_y", 0.0);
    if (w.scale_x <= 0.0 || w.scale_y <= 0.0)
      config_fail("distortion.scale_x", "scales must be positive");
    cfg.distortion = w;
  }

  if (j.contains("spectrum"))
    cfg.spectrum_tau = get_or<double>(j["spectrum"], "spectrum", "tau", 1e-4);
  if (cfg.spectrum_tau <= 0.0 || cfg.spectrum_tau >= 1.0)
    config_fail("spectrum.tau", "must lie in (0,1)");

  if (j.contains("sweep_k")) {
    cfg.k_values = get_or<std::vector<int>>(j["sweep_k"], "sweep_k", "k_values", {});
    for (std::size_t i = 0; i + 1 < cfg.k_values.size(); ++i)
      if (cfg.k_values[i] >= cfg.k_values[i + 1])
        config_fail("sweep_k.k_values", "must be strictly increasing");
    if (!cfg.k_values.empty() && cfg.k_values.front() < 1)
      config_fail("sweep_k.k_values", "entries must be >= 1");
  }

  if (j.contains("oned")) {
    const json& o = j["oned"];
    cfg.oned_length = get_or<int>(o, "oned", "length", 256);
    if (cfg.oned_length < 2 || cfg.oned_length % 2 != 0)
      config_fail("oned.length", "must be even and >= 2");
    cfg.oned_taps = get_or<std::vector<double>>(o, "oned", "taps", {1.0, 2.0, 1.0});
    if (cfg.oned_taps.empty() || cfg.oned_taps.size() % 2 == 0)
      config_fail("oned.taps", "tap count must be odd");
    cfg.oned_patterns = get_or<int>(o, "oned", "patterns", 50);
    if (cfg.oned_patterns < 1) config_fail("oned.patterns", "must be >= 1");
    cfg.oned_seeds = get_or<std::vector<std::uint64_t>>(o, "oned", "seeds", {0});
    if (cfg.oned_seeds.empty()) config_fail("oned.seeds", "must name at least one seed");
  }

  if (j.contains("calibrate")) {
    const json& c = j["calibrate"];
    cfg.calib_threshold = get_or<double>(c, "calibrate", "threshold", 1e-4);
    if (cfg.calib_threshold < 0.0) config_fail("calibrate.threshold", "must be >= 0");
    cfg.calib_repeats = get_or<int>(c, "calibrate", "repeats", 1);
    if (cfg.calib_repeats < 1) config_fail("calibrate.repeats", "must be >= 1");
    if (c.contains("noise")) cfg.calib_noise = parse_noise(c["noise"], "calibrate.noise", &cfg.calib_seed);
  }

  if (j.contains("mtf")) {
    const json& m = j["mtf"];
    cfg.mtf_spokes = get_or<int>(m, "mtf", "spokes", 16);
    if (cfg.mtf_spokes < 2) config_fail("mtf.spokes", "must be >= 2");
    cfg.mtf_radius_fractions =
        get_or<std::vector<double>>(m, "mtf", "radius_fractions", {});
    for (double f : cfg.mtf_radius_fractions)
      if (f <= 0.0 || f >= 0.5) config_fail("mtf.radius_fractions", "fractions must lie in (0,0.5)");
  }

  return cfg;
}

std::string resolve_config_path(const ExperimentConfig& cfg, const std::string& p) {
  const fs::path fp(p);
  if (fp.is_absolute() || cfg.config_dir.empty()) return p;
  return (fs::path(cfg.config_dir) / fp).string();
}

// ---------------------------------------------------------------------------
// Output collection

struct OutputTracker {
  fs::path dir;
  std::vector<std::pair<std::string, bool>> files;  // (relative path, checksummed)

  std::string path(const std::string& rel, bool checksum = true) {
    files.emplace_back(rel, checksum);
    return (dir / rel).string();
  }
};

SystemOperator build_operator(const ExperimentConfig& cfg, const PatternSet& patterns,
                              const std::vector<BlurKernel>& kernels) {
  SystemOperator op;
  op.geometry = cfg.geometry;
  op.patterns = patterns.patterns;
  op.kernels.reserve(patterns.patterns.size());
  for (std::size_t k = 0; k < patterns.patterns.size(); ++k)
    op.kernels.push_back(kernels[k % kernels.size()]);
  op.distortion = cfg.distortion;
  return op;
}

std::vector<BlurKernel> resolve_kernels(const ExperimentConfig& cfg) {
  std::vector<BlurKernel> kernels;
  for (const std::string& name : cfg.kernel_names)
    kernels.push_back(kernel_by_name(name, cfg.geometry));
  return kernels;
}

void write_quality_csv(const std::string& path, const QualityReport& q,
                       const std::string& flag) {
  std::ostringstream out;
  out << "field,value\n";
  out << "mse," << format_g17(q.mse) << "\n";
  out << "relative_error," << format_g17(q.relative_error) << "\n";
  out << "psnr_db," << format_g17(q.psnr_db) << "\n";
  out << "ssim," << format_g17(q.ssim) << "\n";
  out << "flag," << flag << "\n";
  write_text_file(path, out.str());
}

void write_mtf_csv(const std::string& path, const MTFCurve& curve) {
  std::ostringstream out;
  out << "radius,frequency,contrast\n";
  for (std::size_t i = 0; i < curve.radii.size(); ++i)
    out << format_g17(curve.radii[i]) << "," << format_g17(curve.frequencies[i]) << ","
        << format_g17(curve.contrasts[i]) << "\n";
  write_text_file(path, out.str());
}

bool structurally_in_focus(const std::vector<BlurKernel>& kernels) {
  for (const BlurKernel& k : kernels)
    if (k.side() != 1) return false;
  return true;
}

// Tunes delta by MSE against truth (sweep when no fixed delta is configured)
// and returns the reconstruction at the chosen delta.
ReconResult reconstruct_tuned(const ExperimentConfig& cfg, const SystemOperator& op,
                              const std::vector<ImageGrid>& ys, const ImageGrid& truth,
                              std::vector<std::pair<double, double>>* sweep_curve) {
  if (cfg.solver.fixed_delta > 0.0) {
    TikhonovConfig tik;
    tik.delta = cfg.solver.fixed_delta;
    tik.solver = cfg.solver.kind;
    tik.cg_tol = cfg.solver.cg_tol;
    tik.cg_max_iter = cfg.solver.cg_max_iter;
    return solve(op, ys, tik);
  }
  const std::vector<double> grid = default_delta_grid(op, cfg.solver.grid_points);
  const DeltaSweepResult sweep = sweep_delta(op, ys, truth, grid);
  if (sweep_curve) *sweep_curve = sweep.per_delta_mse;
  TikhonovConfig tik;
  tik.delta = sweep.best_delta;
  tik.solver = cfg.solver.kind;
  tik.cg_tol = cfg.solver.cg_tol;
  tik.cg_max_iter = cfg.solver.cg_max_iter;
  return solve(op, ys, tik);
}

// ---------------------------------------------------------------------------
// Experiment kinds

void run_spectrum(const ExperimentConfig& cfg, OutputTracker& out) {
  const PatternSet patterns =
      generate_patterns(cfg.geometry, cfg.pattern_count, cfg.scheme, cfg.pattern_seed);
  std::vector<PlotSeries> series;
  std::ostringstream summary;
  summary << "kernel,lambda1,condition_number,effective_rank,superres_factor\n";
  for (const std::string& name : cfg.kernel_names) {
    SystemOperator op = build_operator(cfg, patterns, {kernel_by_name(name, cfg.geometry)});
    const SpectrumReport report = spectrum(gram(op));
    write_spectrum_csv(out.path("spectrum_" + name + ".csv"), report);

    const double factor = effective_superres_factor(report, cfg.geometry, cfg.spectrum_tau);
    summary << name << "," << format_g17(report.eigenvalues.front()) << ","
            << format_g17(report.condition_number) << ","
            << report.effective_rank(cfg.spectrum_tau) << "," << format_g17(factor) << "\n";

    PlotSeries s;
    s.label = name;
    for (std::size_t i = 0; i < report.normalized.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1));
      s.y.push_back(report.normalized[i]);
    }
    series.push_back(std::move(s));
  }
  write_text_file(out.path("spectrum_summary.csv"), summary.str());
  PlotOptions opts;
  opts.title = "Normalized eigenvalue spectra";
  opts.x_label = "eigenvalue index";
  opts.y_label = "lambda / lambda1";
  opts.log_y = true;
  write_svg_plot(out.path("spectrum.svg", /*checksum=*/false), series, opts);
}

void run_reconstruct(const ExperimentConfig& cfg, OutputTracker& out) {
  require(!cfg.scene_path.empty(), ErrorCode::ConfigInvalid, "scene: required for Reconstruct");
  const ImageGrid truth = load_scene(resolve_config_path(cfg, cfg.scene_path), cfg.geometry);
  const PatternSet patterns =
      generate_patterns(cfg.geometry, cfg.pattern_count, cfg.scheme, cfg.pattern_seed);
  const std::vector<BlurKernel> kernels = resolve_kernels(cfg);
  SystemOperator op = build_operator(cfg, patterns, kernels);

  const std::vector<ImageGrid> ys = simulate(op, truth, cfg.noise, cfg.noise_seed);
  std::vector<std::pair<double, double>> sweep_curve;
  const ReconResult result = reconstruct_tuned(cfg, op, ys, truth, &sweep_curve);
  const QualityReport q = quality(result.estimate, truth);

  write_pgm16(out.path("estimate.pgm"), result.estimate, 255.0);
  write_csv_image(out.path("estimate.csv"), result.estimate);
  write_pgm16(out.path("truth.pgm"), truth, 255.0);
  const std::string flag =
      structurally_in_focus(kernels) ? "no superresolution: gram rank <= N" : "";
  write_quality_csv(out.path("quality.csv"), q, flag);

  std::ostringstream info;
  info << "field,value\n";
  info << "delta_used," << format_g17(result.delta_used) << "\n";
  info << "solver_iterations," << result.solver_iterations << "\n";
  info << "residual_norm," << format_g17(result.residual_norm) << "\n";
  info << "converged," << (result.converged ? 1 : 0) << "\n";
  write_text_file(out.path("solver.csv"), info.str());

  if (!sweep_curve.empty()) {
    write_pairs_csv(out.path("sweep.csv"), "delta,mse", sweep_curve);
    PlotSeries s;
    s.label = "mse";
    for (const auto& [d, m] : sweep_curve) {
      s.x.push_back(d);
      s.y.push_back(m);
    }
    PlotOptions opts;
    opts.title = "Regularization sweep";
    opts.x_label = "delta";
    opts.y_label = "mse";
    opts.log_x = true;
    opts.log_y = true;
    write_svg_plot(out.path("sweep.svg", /*checksum=*/false), {s}, opts);
  }
}

void run_sweep_k(const ExperimentConfig& cfg, OutputTracker& out) {
  require(!cfg.scene_path.empty(), ErrorCode::ConfigInvalid, "scene: required for SweepK");
  require(!cfg.k_values.empty(), ErrorCode::ConfigInvalid,
          "sweep_k.k_values: required for SweepK");
  const ImageGrid truth = load_scene(resolve_config_path(cfg, cfg.scene_path), cfg.geometry);
  const std::vector<BlurKernel> kernels = resolve_kernels(cfg);
  const int k_max = cfg.k_values.back();
  const PatternSet patterns =
      generate_patterns(cfg.geometry, k_max, cfg.scheme, cfg.pattern_seed);
  SystemOperator op_full = build_operator(cfg, patterns, kernels);
  const std::vector<ImageGrid> ys_full = simulate(op_full, truth, cfg.noise, cfg.noise_seed);

  std::ostringstream csv;
  csv << "K,ssim,mse,re,psnr\n";
  PlotSeries s;
  s.label = "ssim";
  for (int k : cfg.k_values) {
    SystemOperator op = op_full;
    op.patterns.assign(op_full.patterns.begin(), op_full.patterns.begin() + k);
    op.kernels.assign(op_full.kernels.begin(), op_full.kernels.begin() + k);
    const std::vector<ImageGrid> ys(ys_full.begin(), ys_full.begin() + k);
    const ReconResult result = reconstruct_tuned(cfg, op, ys, truth, nullptr);
    const QualityReport q = quality(result.estimate, truth);
    csv << k << "," << format_g17(q.ssim) << "," << format_g17(q.mse) << ","
        << format_g17(q.relative_error) << "," << format_g17(q.psnr_db) << "\n";
    s.x.push_back(k);
    s.y.push_back(q.ssim);
    std::fprintf(stderr, "sweep_k: K=%d ssim=%.4f\n", k, q.ssim);
  }
  write_text_file(out.path("sweep_k.csv"), csv.str());
  PlotOptions opts;
  opts.title = "SSIM vs measurement count";
  opts.x_label = "K";
  opts.y_label = "ssim";
  write_svg_plot(out.path("sweep_k.svg", /*checksum=*/false), {s}, opts);
}

void run_oned(const ExperimentConfig& cfg, OutputTracker& out) {
  std::vector<PlotSeries> series;
  for (const PatternModel model : {PatternModel::PlusMinusOne, PatternModel::ZeroOne}) {
    const char* tag = (model == PatternModel::PlusMinusOne) ? "plusminusone" : "zeroone";
    const SpectrumReport expected =
        spectrum(expected_gram_1d_taps(cfg.oned_length, cfg.oned_taps, model));
    write_spectrum_csv(out.path(std::string("expected_spectrum_") + tag + ".csv"), expected);
    PlotSeries s;
    s.label = std::string("expected ") + tag;
    for (std::size_t i = 0; i < expected.normalized.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1));
      s.y.push_back(expected.normalized[i]);
    }
    series.push_back(std::move(s));
  }

  std::ostringstream summary;
  summary << "seed,min_normalized,condition_number\n";
  for (std::uint64_t seed : cfg.oned_seeds) {
    const SpectrumReport rep = spectrum(empirical_gram_1d_taps(
        cfg.oned_length, cfg.oned_taps, cfg.oned_patterns, seed, PatternModel::PlusMinusOne));
    write_spectrum_csv(out.path("empirical_spectrum_seed" + std::to_string(seed) + ".csv"), rep);
    summary << seed << "," << format_g17(rep.normalized.back()) << ","
            << format_g17(rep.condition_number) << "\n";
    PlotSeries s;
    s.label = "empirical seed " + std::to_string(seed);
    for (std::size_t i = 0; i < rep.normalized.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1));
      s.y.push_back(rep.normalized[i]);
    }
    series.push_back(std::move(s));
  }
  write_text_file(out.path("empirical_summary.csv"), summary.str());

  // The printed conditioning formula with the configured taps plus the two
  // candidate optima it implies.
  if (cfg.oned_taps.size() == 3) {
    const double a = cfg.oned_taps[0];
    const double b = cfg.oned_taps[1];
    std::ostringstream ratios;
    ratios << "a,b,ratio\n";
    const auto emit = [&ratios](double aa, double bb) {
      ratios << format_g17(aa) << "," << format_g17(bb) << ","
             << format_g17(filter_condition_ratio({aa, bb})) << "\n";
    };
    emit(a, b);
    emit(a, 0.0);
    emit(a, -a);
    write_text_file(out.path("filter_ratio.csv"), ratios.str());
  }

  PlotOptions opts;
  opts.title = "1D normalized spectra";
  opts.x_label = "eigenvalue index";
  opts.y_label = "lambda / lambda1";
  opts.log_y = true;
  write_svg_plot(out.path("oned.svg", /*checksum=*/false), series, opts);
}

ImageGrid synthetic_scene(const Geometry& g) {
  // Smooth deterministic scene for round-trip demos when none is configured.
  ImageGrid img(g.scene_side, g.scene_side);
  const double freq = 2.0 * 3.14159265358979323846 / g.scene_side;
  for (int r = 0; r < g.scene_side; ++r)
    for (int c = 0; c < g.scene_side; ++c)
      img.at(r, c) = 127.5 * (1.0 + std::sin(freq * 3 * r) * std::cos(freq * 2 * c));
  return img;
}

void run_calibrate(const ExperimentConfig& cfg, OutputTracker& out) {
  const Geometry& g = cfg.geometry;
  const ImageGrid truth = cfg.scene_path.empty()
                              ? synthetic_scene(g)
                              : load_scene(resolve_config_path(cfg, cfg.scene_path), g);
  const PatternSet patterns =
      generate_patterns(g, cfg.pattern_count, cfg.scheme, cfg.pattern_seed);
  const std::vector<BlurKernel> kernels = resolve_kernels(cfg);

  // The true system carries the configured distortion; the analytic model
  // assumes none. Calibration probes the true system.
  SystemOperator op_true = build_operator(cfg, patterns, kernels);
  SystemOperator op_analytic = op_true;
  op_analytic.distortion.reset();

  // One weight matrix per configured kernel, matching the k % kernel_count
  // cycling of the calibrated forward model.
  const PatternSet probes = probe_schedule(g);
  const double calib_sigma = (cfg.calib_noise.kind == NoiseModel::Kind::None)
                                 ? 0.0
                                 : derived_noise_sigma(cfg.calib_noise, truth);
  const ImageGrid ones(g.scene_side, g.scene_side, 1.0);
  std::vector<std::vector<ImageGrid>> responses(kernels.size());
  for (std::size_t kk = 0; kk < kernels.size(); ++kk) {
    responses[kk].reserve(probes.patterns.size());
    SystemOperator probe_op = op_true;
    probe_op.kernels.assign(1, kernels[kk]);
    for (std::size_t i = 0; i < probes.patterns.size(); ++i) {
      probe_op.patterns.assign(1, probes.patterns[i]);
      ImageGrid mean_resp(g.sensor_side, g.sensor_side);
      const ImageGrid clean = forward(probe_op, ones)[0];
      for (int rep = 0; rep < cfg.calib_repeats; ++rep) {
        ImageGrid resp = clean;
        if (calib_sigma > 0.0) {
          CounterRng rng(cfg.calib_seed,
                         (kk * probes.patterns.size() + i) * cfg.calib_repeats + rep,
                         RngDomain::Calibration);
          for (double& v : resp.values) v += calib_sigma * rng.normal();
        }
        for (std::size_t m = 0; m < mean_resp.values.size(); ++m)
          mean_resp.values[m] += resp.values[m] / cfg.calib_repeats;
      }
      responses[kk].push_back(std::move(mean_resp));
    }
  }

  const CalibratedWeights weights = estimate_weights(responses, cfg.calib_threshold, g);
  save_weights(weights, (out.dir / "weights").string(), out.path("weights.txt"));
  for (int kk = 0; kk < weights.kernel_count(); ++kk)
    out.files.emplace_back("weights_k" + std::to_string(kk) + ".mtx", true);

  // Forward round trip on the truth scene.
  const std::vector<ImageGrid> y_true = forward(op_true, truth);
  const std::vector<ImageGrid> y_cal = forward_calibrated(weights, patterns, truth);
  double max_rel = 0.0;
  double scale = 0.0;
  for (const ImageGrid& y : y_true) scale = std::max(scale, max_value(y));
  for (std::size_t k = 0; k < y_true.size(); ++k)
    max_rel = std::max(max_rel, max_abs_difference(y_true[k], y_cal[k]));
  if (scale > 0.0) max_rel /= scale;

  // Reconstruction comparison on noisy data from the true system.
  const std::vector<ImageGrid> ys = simulate(op_true, truth, cfg.noise, cfg.noise_seed);
  SystemOperator op_cal = op_analytic;
  op_cal.weighting = weights;
  const ReconResult recon_analytic = reconstruct_tuned(cfg, op_analytic, ys, truth, nullptr);
  const ReconResult recon_cal = reconstruct_tuned(cfg, op_cal, ys, truth, nullptr);
  const QualityReport q_analytic = quality(recon_analytic.estimate, truth);
  const QualityReport q_cal = quality(recon_cal.estimate, truth);

  std::ostringstream report;
  report << "field,value\n";
  report << "forward_max_rel_error," << format_g17(max_rel) << "\n";
  report << "degenerate_columns," << weights.degenerate_columns << "\n";
  report << "analytic_ssim," << format_g17(q_analytic.ssim) << "\n";
  report << "analytic_mse," << format_g17(q_analytic.mse) << "\n";
  report << "calibrated_ssim," << format_g17(q_cal.ssim) << "\n";
  report << "calibrated_mse," << format_g17(q_cal.mse) << "\n";
  write_text_file(out.path("roundtrip.csv"), report.str());
  write_pgm16(out.path("recon_analytic.pgm"), recon_analytic.estimate, 255.0);
  write_pgm16(out.path("recon_calibrated.pgm"), recon_cal.estimate, 255.0);
}

void run_mtf(const ExperimentConfig& cfg, OutputTracker& out) {
  const Geometry& g = cfg.geometry;
  const ImageGrid truth = render_fan_target(g.scene_side, cfg.mtf_spokes);
  const PatternSet patterns =
      generate_patterns(g, cfg.pattern_count, cfg.scheme, cfg.pattern_seed);
  const std::vector<BlurKernel> kernels = resolve_kernels(cfg);
  SystemOperator op = build_operator(cfg, patterns, kernels);

  const std::vector<ImageGrid> ys = simulate(op, truth, cfg.noise, cfg.noise_seed);
  const ReconResult result = reconstruct_tuned(cfg, op, ys, truth, nullptr);

  const ImageGrid lowres =
      bicubic_resize(block_mean_downscale(truth, g.upscale_c), g.scene_side, g.scene_side);

  std::vector<double> fractions = cfg.mtf_radius_fractions;
  if (fractions.empty())
    fractions = {0.10, 0.13, 0.16, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
  std::vector<double> radii;
  for (double f : fractions) radii.push_back(f * g.scene_side);
  const std::pair<double, double> center{0.5 * (g.scene_side - 1), 0.5 * (g.scene_side - 1)};

  const MTFCurve curve_truth = mtf_fan(truth, center, radii, cfg.mtf_spokes);
  const MTFCurve curve_lowres = mtf_fan(lowres, center, radii, cfg.mtf_spokes);
  const MTFCurve curve_recon = mtf_fan(result.estimate, center, radii, cfg.mtf_spokes);

  write_pgm16(out.path("fan_target.pgm"), truth, 255.0);
  write_pgm16(out.path("recon.pgm"), result.estimate, 255.0);
  write_pgm16(out.path("lowres.pgm"), lowres, 255.0);
  write_mtf_csv(out.path("mtf_truth.csv"), curve_truth);
  write_mtf_csv(out.path("mtf_lowres.csv"), curve_lowres);
  write_mtf_csv(out.path("mtf_recon.csv"), curve_recon);

  const auto to_series = [](const MTFCurve& c, const std::string& label) {
    PlotSeries s;
    s.label = label;
    s.x = c.frequencies;
    s.y = c.contrasts;
    return s;
  };
  PlotOptions opts;
  opts.title = "Fan-target contrast";
  opts.x_label = "frequency (lp/px)";
  opts.y_label = "contrast";
  write_svg_plot(out.path("mtf.svg", /*checksum=*/false),
                 {to_series(curve_truth, "truth"), to_series(curve_lowres, "lowres"),
                  to_series(curve_recon, "reconstruction")},
                 opts);
}

void write_manifest(const ExperimentConfig& cfg, OutputTracker& out) {
  json manifest;
  manifest["schema"] = 1;
  manifest["tool"] = "maskblur";
  manifest["version"] = kVersion;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  manifest["config"] = cfg.raw;
  json outputs = json::array();
  for (const auto& [rel, checked] : out.files) {
    json entry;
    entry["path"] = rel;
    entry["checked"] = checked;
    if (checked) entry["sha256"] = sha256_file((out.dir / rel).string());
    outputs.push_back(entry);
  }
  manifest["outputs"] = outputs;
  write_text_file((out.dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace

std::string resolve_output_dir(const std::string& configured) {
  const char* root = std::getenv("MASKBLUR_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0') return configured;
  return (fs::path(root) / fs::path(configured).relative_path()).string();
}

int run_experiment(const std::string& config_path) {
  try {
    const ExperimentConfig cfg = parse_config(config_path);
    OutputTracker out;
    out.dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(out.dir);

    switch (cfg.kind) {
      case ExperimentKind::Spectrum: run_spectrum(cfg, out); break;
      case ExperimentKind::Reconstruct: run_reconstruct(cfg, out); break;
      case ExperimentKind::SweepK: run_sweep_k(cfg, out); break;
      case ExperimentKind::OneD: run_oned(cfg, out); break;
      case ExperimentKind::Calibrate: run_calibrate(cfg, out); break;
      case ExperimentKind::MTF: run_mtf(cfg, out); break;
    }
    write_manifest(cfg, out);
    std::fprintf(stderr, "run: wrote %zu outputs to %s\n", out.files.size(),
                 out.dir.string().c_str());
    return kExitOk;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == ErrorCode::ConfigInvalid) return kExitConfigError;
    if (e.code() == ErrorCode::ChecksumMismatch) return kExitChecksumError;
    return kExitNumericError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumericError;
  }
}

int verify_manifest(const std::string& manifest_path) {
  try {
    json manifest;
    try {
      manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::exception& e) {
      // A manifest that cannot be read or parsed means the outputs cannot be
      // vouched for, which is a verification failure.
      fail(ErrorCode::ChecksumMismatch, manifest_path + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::ChecksumMismatch, std::string(e.what()));
    }
    const fs::path dir = fs::path(manifest_path).parent_path();
    int mismatches = 0;
    for (const json& entry : manifest.at("outputs")) {
      if (!entry.value("checked", false)) continue;
      const std::string rel = entry.at("path").get<std::string>();
      const std::string want = entry.at("sha256").get<std::string>();
      const fs::path full = dir / rel;
      std::string got;
      try {
        got = sha256_file(full.string());
      } catch (const Error&) {
        std::fprintf(stderr, "verify: %s: missing\n", rel.c_str());
        ++mismatches;
        continue;
      }
      if (got != want) {
        std::fprintf(stderr, "verify: %s: checksum mismatch\n", rel.c_str());
        ++mismatches;
      }
    }
    if (mismatches > 0) {
      std::fprintf(stderr, "verify: %d file(s) failed\n", mismatches);
      return kExitChecksumError;
    }
    return kExitOk;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == ErrorCode::ConfigInvalid) return kExitConfigError;
    if (e.code() == ErrorCode::ChecksumMismatch) return kExitChecksumError;
    return kExitNumericError;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s: malformed manifest: %s\n", manifest_path.c_str(), e.what());
    return kExitChecksumError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumericError;
  }
}

int dump_patterns(const std::string& config_path) {
  try {
    const ExperimentConfig cfg = parse_config(config_path);
    const fs::path dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(dir);
    const PatternSet set =
        generate_patterns(cfg.geometry, cfg.pattern_count, cfg.scheme, cfg.pattern_seed);
    write_pattern_file((dir / "patterns.srfp").string(), set);
    write_pattern_csv((dir / "patterns.csv").string(), set);
    std::fprintf(stderr, "patterns: wrote %d patterns to %s\n", set.count(),
                 dir.string().c_str());
    return kExitOk;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return (e.code() == ErrorCode::ConfigInvalid) ? kExitConfigError : kExitNumericError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumericError;
  }
}

}  // namespace maskblur
