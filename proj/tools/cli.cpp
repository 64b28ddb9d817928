#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitpose/checkpoint.hpp"
#include "orbitpose/compatibility.hpp"
#include "orbitpose/dataset.hpp"
#include "orbitpose/errors.hpp"
#include "orbitpose/eval.hpp"
#include "orbitpose/vae.hpp"
#include "orbitpose/volume_io.hpp"

#ifndef ORBITPOSE_VERSION
#define ORBITPOSE_VERSION "unknown"
#endif

namespace orbitpose::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr double kRadToDeg = 180.0 / kPi;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + p.string());
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

void write_manifest(const fs::path& path, const std::string& subcommand, const Json& config,
                    const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "orbitpose";
  m["version"] = ORBITPOSE_VERSION;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["outputs"] = outputs;
  write_text(path, m.dump(2) + "\n");
}

Json hyper_json(const VaeHyperparams& h) {
  return Json{{"k", h.k},
              {"encoder_hidden", h.encoder_hidden},
              {"decoder_hidden", h.decoder_hidden},
              {"lr", h.lr},
              {"batch_size", h.batch_size},
              {"epochs", h.epochs},
              {"restarts", h.restarts},
              {"beta", h.beta},
              {"seed", h.seed}};
}

Json data_json(const DatasetSettings& s) {
  return Json{{"count", s.count},           {"width", s.width}, {"splat_sigma", s.splat_sigma},
              {"noise_sigma", s.noise_sigma}, {"seed", s.seed},   {"val_fraction", s.val_fraction}};
}

void add_hyper_options(CLI::App& cmd, VaeHyperparams& h) {
  cmd.add_option("--k", h.k, "Irrep frequencies K")->capture_default_str();
  cmd.add_option("--encoder-hidden", h.encoder_hidden, "Encoder hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd.add_option("--decoder-hidden", h.decoder_hidden, "Decoder hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd.add_option("--lr", h.lr, "Adam learning rate")->capture_default_str();
  cmd.add_option("--batch", h.batch_size, "Minibatch size")->capture_default_str();
  cmd.add_option("--epochs", h.epochs, "Epochs per restart")->capture_default_str();
  cmd.add_option("--restarts", h.restarts, "Independent restarts")->capture_default_str();
  cmd.add_option("--beta", h.beta, "KL weight")->capture_default_str();
}

void add_data_options(CLI::App& cmd, DatasetSettings& s) {
  cmd.add_option("--count", s.count, "Number of samples")->capture_default_str();
  cmd.add_option("--width", s.width, "Image width W")->capture_default_str();
  cmd.add_option("--splat-sigma", s.splat_sigma, "Gaussian splat width (negative: 5% of radius)")
      ->capture_default_str();
  cmd.add_option("--noise", s.noise_sigma, "Pixel noise standard deviation")->capture_default_str();
  cmd.add_option("--val-fraction", s.val_fraction, "Validation fraction")->capture_default_str();
}

// ---------------------------------------------------------------- gen-volume

struct GenVolumeOptions {
  int n = 3;
  std::uint64_t seed = 1;
  double radius = 1.0;
  int max_attempts = 100;
  std::string preset;
  std::string out;
};

PointVolume preset_volume(const std::string& name) {
  const double s = std::sqrt(3.0) / 2.0;
  if (name == "triangle") return PointVolume::planar({{1.0, 0.0}, {-0.5, s}, {-0.5, -s}}, {1, 1, 1}, 1.0);
  if (name == "antipodal") return PointVolume::planar({{1.0, 0.0}, {-1.0, 0.0}}, {1, 1}, 1.0);
  if (name == "mirror-triangle") {
    return PointVolume::planar({{0.9, 0.0}, {-0.2, 0.6}, {-0.2, -0.6}}, {1, 1, 1}, 1.0);
  }
  if (name == "circle12") {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 12; ++k) pts.emplace_back(std::cos(kTwoPi * k / 12), std::sin(kTwoPi * k / 12));
    return PointVolume::planar(pts, std::vector<double>(12, 1.0), 1.0);
  }
  if (name == "pinwheel") {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 3; ++k) pts.emplace_back(std::cos(kTwoPi * k / 3), std::sin(kTwoPi * k / 3));
    for (int k = 0; k < 3; ++k) {
      pts.emplace_back(0.5 * std::cos(kTwoPi * k / 3 + 0.4), 0.5 * std::sin(kTwoPi * k / 3 + 0.4));
    }
    return PointVolume::planar(pts, std::vector<double>(6, 1.0), 1.0);
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

int gen_volume(const GenVolumeOptions& o, std::ostream& out) {
  const PointVolume v =
      o.preset.empty() ? random_compatible_volume(o.n, o.seed, o.radius, o.max_attempts) : preset_volume(o.preset);
  save_volume(o.out, v);
  write_manifest(with_suffix(o.out, ".manifest.json"), "gen-volume",
                 Json{{"n", o.n},
                      {"seed", o.seed},
                      {"radius", o.radius},
                      {"max_attempts", o.max_attempts},
                      {"preset", o.preset},
                      {"out", o.out}},
                 {o.out});
  out << "wrote " << o.out << " (" << v.size() << " points)\n";
  return kExitOk;
}

// -------------------------------------------------------------- check-volume

struct CheckVolumeOptions {
  std::string volume;
  int grid = 720;
  double tol = 1e-6;
  int probes = 16;
  bool algebraic = false;
  bool splat = false;
  std::string out;
};

struct VolumeCheck {
  CompatibilityVerdict injectivity;
  CompatibilityVerdict star;
  bool compatible = false;
};

VolumeCheck run_volume_check(const PointVolume& v, const CheckSettings& settings, bool algebraic) {
  VolumeCheck c;
  c.injectivity = algebraic ? check_injectivity_algebraic(v) : check_injectivity(v, settings);
  if (*c.injectivity.satisfies_injectivity) {
    c.star = c.injectivity;
  } else {
    c.star = check_star(v, settings);
  }
  c.compatible = c.star.compatible();
  return c;
}

std::string format_check(const PointVolume& v, const VolumeCheck& c, bool algebraic) {
  std::ostringstream s;
  s << "points=" << v.size() << '\n';
  s << "method=" << (algebraic ? "algebraic" : "grid") << '\n';
  s << "resolution=" << c.injectivity.resolution << '\n';
  s << "injectivity=" << (*c.injectivity.satisfies_injectivity ? "true" : "false") << '\n';
  if (algebraic && c.injectivity.permutation_witness) {
    const auto& w = *c.injectivity.permutation_witness;
    s << "witness_permutation=";
    for (std::size_t i = 0; i < w.permutation.size(); ++i) s << (i ? "," : "") << w.permutation[i];
    s << '\n';
    s << "witness_theta1_deg=" << fixed(w.theta1 * kRadToDeg, 6) << '\n';
    s << "witness_theta2_deg=" << fixed(w.theta2 * kRadToDeg, 6) << '\n';
    s << "witness_is_symmetry=" << (w.is_symmetry ? "true" : "false") << '\n';
  } else if (!c.injectivity.coincidences.empty()) {
    const auto& w = c.injectivity.coincidences.front();
    s << "coincidences=" << c.injectivity.coincidences.size() << '\n';
    s << "witness_theta1_deg=" << fixed(w.theta1 * kRadToDeg, 6) << '\n';
    s << "witness_theta2_deg=" << fixed(w.theta2 * kRadToDeg, 6) << '\n';
  }
  s << "star=" << (c.compatible ? "true" : "false") << '\n';
  s << "star_violations=" << c.star.star_violations.size() << '\n';
  if (!c.star.star_violations.empty()) {
    const auto& sv = c.star.star_violations.front();
    s << "violation_theta1_deg=" << fixed(sv.pair.theta1 * kRadToDeg, 6) << '\n';
    s << "violation_theta2_deg=" << fixed(sv.pair.theta2 * kRadToDeg, 6) << '\n';
    s << "violation_theta3_deg=" << fixed(sv.theta3 * kRadToDeg, 6) << '\n';
    s << "violation_deviation=" << format_double(sv.deviation) << '\n';
  }
  s << "verdict=" << (c.compatible ? "compatible" : "incompatible") << '\n';
  return s.str();
}

CheckSettings check_settings(const PointVolume& v, int grid, double tol, int probes, bool splat) {
  CheckSettings s = splat ? CheckSettings::splatted(v.domain_radius(), grid) : CheckSettings::exact(grid);
  s.tol = tol;
  s.probe_count = probes;
  return s;
}

int check_volume(const CheckVolumeOptions& o, std::ostream& out) {
  const PointVolume v = load_volume(o.volume);
  const auto settings = check_settings(v, o.grid, o.tol, o.probes, o.splat);
  const VolumeCheck c = run_volume_check(v, settings, o.algebraic);
  const std::string report = format_check(v, c, o.algebraic);
  out << report;
  const fs::path stem = o.out.empty() ? with_suffix(o.volume, ".check") : fs::path(o.out);
  write_text(with_suffix(stem, ".txt"), report);
  write_manifest(with_suffix(stem, ".manifest.json"), "check-volume",
                 Json{{"volume", o.volume},
                      {"grid", o.grid},
                      {"tol", o.tol},
                      {"probes", o.probes},
                      {"algebraic", o.algebraic},
                      {"splat", o.splat},
                      {"out", stem.string()}},
                 {with_suffix(stem, ".txt").string()});
  return c.compatible ? kExitOk : kExitNegative;
}

// --------------------------------------------------------------- gen-dataset

struct GenDatasetOptions {
  std::string volume;
  DatasetSettings settings;
  std::string out;
};

int gen_dataset(const GenDatasetOptions& o, std::ostream& out) {
  const Dataset d = generate_dataset(load_volume(o.volume), o.settings);
  ensure_parent(o.out);
  save_dataset(d, o.out);
  Json config = data_json(o.settings);
  config["volume"] = o.volume;
  config["out"] = o.out;
  write_manifest(with_suffix(o.out, ".manifest.json"), "gen-dataset", config,
                 {dataset_csv_path(o.out).string(), dataset_meta_path(o.out).string()});
  out << "wrote " << d.size() << " samples to " << dataset_csv_path(o.out).string() << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- train

struct TrainOptions {
  std::string dataset;
  VaeHyperparams hyper;
  std::string out;
  std::string history;
  bool search = false;
};

void write_history(std::ostream& out, const TrainResult& result) {
  out << "restart,epoch,train_loss,val_loss,val_bce,val_kl\n";
  for (const auto& r : result.restarts) {
    const auto row = [&](const EpochRecord& e, bool initial) {
      out << e.restart << ',' << e.epoch << ',' << (initial ? "" : format_double(e.train_loss)) << ','
          << format_double(e.val_loss) << ',' << format_double(e.val_bce) << ',' << format_double(e.val_kl)
          << '\n';
    };
    row(r.initial, true);
    for (const auto& e : r.epochs) row(e, false);
  }
}

struct Trained {
  TrainResult result;
  VaeHyperparams hyper;
};

Trained train_model(const Dataset& d, const VaeHyperparams& hyper, bool search) {
  if (!search) return {train(d, hyper), hyper};
  SearchResult s = search_architectures(d, hyper);
  return {std::move(s.best), s.best_hyper};
}

int train_command(const TrainOptions& o, std::ostream& out) {
  const Dataset d = load_dataset(o.dataset);
  const Trained t = train_model(d, o.hyper, o.search);
  ensure_parent(o.out);
  save_checkpoint(t.result.model, o.out);
  std::vector<std::string> outputs{o.out};
  if (o.history.empty()) {
    write_history(out, t.result);
  } else {
    std::ostringstream h;
    write_history(h, t.result);
    write_text(o.history, h.str());
    outputs.push_back(o.history);
  }
  Json config = hyper_json(o.hyper);
  config["dataset"] = o.dataset;
  config["out"] = o.out;
  config["history"] = o.history;
  config["search"] = o.search;
  Json result{{"selected_restart", t.result.selected_restart},
              {"selected_hyper", hyper_json(t.hyper)},
              {"final_val_loss", t.result.restarts[static_cast<std::size_t>(t.result.selected_restart)].final_val_loss}};
  config["result"] = result;
  write_manifest(with_suffix(o.out, ".manifest.json"), "train", config, outputs);
  if (!o.history.empty()) {
    out << "selected restart " << t.result.selected_restart << ", final validation loss "
        << fixed(result["final_val_loss"].get<double>(), 6) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------- eval

struct EvalOptions {
  std::string model;
  std::string dataset;
  std::string out;
  double max_error_deg = kDefaultMaxErrorDeg;
  std::string split = "all";
  int fold_grid = 360;
  bool no_svg = false;
};

PoseReport evaluate_model(const VaeModel& model, const Dataset& d, const std::string& split, int fold_grid) {
  std::vector<PosePair> pairs;
  if (split == "all") {
    pairs = infer_poses(model, d);
  } else if (split == "train") {
    pairs = infer_poses(model, d, Split::train);
  } else if (split == "validation") {
    pairs = infer_poses(model, d, Split::validation);
  } else {
    throw InvalidArgument("unknown split '" + split + "'");
  }
  return evaluate_poses(pairs, fold_grid);
}

std::vector<std::string> write_eval_outputs(const PoseReport& report, const fs::path& stem, double max_error_deg,
                                            bool svg, std::string* text) {
  std::ostringstream s;
  write_report(s, report, max_error_deg);
  write_text(with_suffix(stem, ".txt"), s.str());
  const PlotFiles files = emit_plots(report, stem, svg);
  if (text) *text = s.str();
  std::vector<std::string> outputs{with_suffix(stem, ".txt").string(), files.latent_csv.string(),
                                   files.poses_csv.string()};
  if (svg) {
    outputs.push_back(files.latent_svg.string());
    outputs.push_back(files.poses_svg.string());
  }
  return outputs;
}

int eval_command(const EvalOptions& o, std::ostream& out) {
  const VaeModel model = load_checkpoint(o.model);
  const Dataset d = load_dataset(o.dataset);
  const PoseReport report = evaluate_model(model, d, o.split, o.fold_grid);
  ensure_parent(o.out);
  std::string text;
  const auto outputs = write_eval_outputs(report, o.out, o.max_error_deg, !o.no_svg, &text);
  out << text;
  write_manifest(with_suffix(o.out, ".manifest.json"), "eval",
                 Json{{"model", o.model},
                      {"dataset", o.dataset},
                      {"out", o.out},
                      {"max_error_deg", o.max_error_deg},
                      {"split", o.split},
                      {"fold_grid", o.fold_grid},
                      {"svg", !o.no_svg}},
                 outputs);
  return report.passed(o.max_error_deg) ? kExitOk : kExitNegative;
}

// ------------------------------------------------------------ reproduce-fig3

struct ReproduceOptions {
  std::uint64_t seed = 1;
  std::uint64_t volume_seed = 7;
  std::string out = "fig3";
  DatasetSettings data;
  VaeHyperparams hyper;
  double max_error_deg = kDefaultMaxErrorDeg;
  bool no_svg = false;
};

struct Experiment {
  std::string name;
  PointVolume volume;
  bool expect_compatible;
};

struct ExperimentOutcome {
  std::string name;
  bool compatible = false;
  PoseReport report;
  std::size_t coincidence_pairs = 0;
  double coincidence_max_deviation = 0.0;
  int selected_restart = 0;
};

/// Largest |wrap(est(theta1) - est(theta2))| over the grid coincidence pairs.
double coincidence_deviation(const VaeModel& model, const PointVolume& v, const RasterSettings& raster,
                             const std::vector<CoincidencePair>& pairs) {
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double a = encode(model, rasterize(project_at(v, p.theta1), raster)).mu;
    const double b = encode(model, rasterize(project_at(v, p.theta2), raster)).mu;
    worst = std::max(worst, std::abs(wrap_angle(a - b)));
  }
  return worst;
}

ExperimentOutcome run_experiment(const Experiment& e, const ReproduceOptions& o, std::vector<std::string>& outputs,
                                 std::ostream& log) {
  const fs::path dir = fs::path(o.out) / e.name;
  fs::create_directories(dir);
  auto rel = [&](const fs::path& p) { return fs::path(e.name) / p.lexically_relative(dir); };

  save_volume(dir / "volume.txt", e.volume);
  outputs.push_back(rel(dir / "volume.txt").string());

  const auto settings = CheckSettings::exact();
  const VolumeCheck check = run_volume_check(e.volume, settings, true);
  write_text(dir / "check.txt", format_check(e.volume, check, true));
  outputs.push_back(rel(dir / "check.txt").string());
  if (check.compatible != e.expect_compatible) {
    throw IncompatibleVolume(e.name + " volume: expected " + (e.expect_compatible ? "compatible" : "incompatible") +
                             " verdict, got the opposite");
  }
  log << e.name << ": volume verdict " << (check.compatible ? "compatible" : "incompatible") << '\n';

  DatasetSettings data = o.data;
  data.seed = o.seed;
  const Dataset d = generate_dataset(e.volume, data);
  save_dataset(d, dir / "dataset");
  outputs.push_back(rel(dataset_csv_path(dir / "dataset")).string());
  outputs.push_back(rel(dataset_meta_path(dir / "dataset")).string());

  VaeHyperparams hyper = o.hyper;
  hyper.seed = o.seed;
  log << e.name << ": training " << hyper.restarts << " restarts x " << hyper.epochs << " epochs\n";
  const TrainResult trained = train(d, hyper);
  save_checkpoint(trained.model, dir / "model.ckpt");
  outputs.push_back(rel(dir / "model.ckpt").string());
  {
    std::ostringstream h;
    write_history(h, trained);
    write_text(dir / "history.csv", h.str());
    outputs.push_back(rel(dir / "history.csv").string());
  }

  ExperimentOutcome r;
  r.name = e.name;
  r.compatible = check.compatible;
  r.selected_restart = trained.selected_restart;
  r.report = evaluate_poses(infer_poses(trained.model, d));
  for (const auto& f : write_eval_outputs(r.report, dir / "report", o.max_error_deg, !o.no_svg, nullptr)) {
    outputs.push_back(rel(f).string());
  }
  const auto pairs = check_injectivity(e.volume, settings).coincidences;
  r.coincidence_pairs = pairs.size();
  r.coincidence_max_deviation = coincidence_deviation(trained.model, e.volume, d.raster, pairs);
  log << e.name << ": median error " << fixed(r.report.median_error * kRadToDeg, 2) << " deg, fold score "
      << fixed(r.report.fold_score * kRadToDeg, 2) << " deg\n";
  return r;
}

std::string format_summary(const std::vector<ExperimentOutcome>& results, double max_error_deg) {
  std::ostringstream s;
  s << "experiment,volume_verdict,selected_restart,g,median_error_deg,mean_error_deg,fold_score_deg,spearman,"
       "circular_correlation,coincidence_pairs,coincidence_max_deviation,verdict\n";
  for (const auto& r : results) {
    s << r.name << ',' << (r.compatible ? "compatible" : "incompatible") << ',' << r.selected_restart << ','
      << r.report.g << ',' << fixed(r.report.median_error * kRadToDeg, 6) << ','
      << fixed(r.report.mean_error * kRadToDeg, 6) << ',' << fixed(r.report.fold_score * kRadToDeg, 6) << ','
      << fixed(r.report.spearman, 6) << ',' << fixed(r.report.circular_correlation, 6) << ','
      << r.coincidence_pairs << ',' << format_double(r.coincidence_max_deviation) << ','
      << (r.report.passed(max_error_deg) ? "pass" : "fail") << '\n';
  }
  for (const auto& r : results) {
    s << "\n[" << r.name << "]\n";
    std::ostringstream rep;
    write_report(rep, r.report, max_error_deg);
    s << rep.str();
  }
  return s.str();
}

int reproduce_fig3(const ReproduceOptions& o, std::ostream& out, std::ostream& log) {
  fs::create_directories(o.out);
  const std::vector<Experiment> experiments{
      {"compatible", random_compatible_volume(3, o.volume_seed), true},
      {"incompatible", PointVolume::planar({{0.9, 0.0}, {-0.2, 0.6}, {-0.2, -0.6}}, {1, 1, 1}, 1.0), false},
  };
  std::vector<std::string> outputs;
  std::vector<ExperimentOutcome> results;
  for (const auto& e : experiments) results.push_back(run_experiment(e, o, outputs, log));

  const std::string summary = format_summary(results, o.max_error_deg);
  write_text(fs::path(o.out) / "summary.txt", summary);
  outputs.push_back("summary.txt");
  Json config{{"seed", o.seed},
              {"volume_seed", o.volume_seed},
              {"out", o.out},
              {"dataset", data_json(o.data)},
              {"hyper", hyper_json(o.hyper)},
              {"max_error_deg", o.max_error_deg},
              {"svg", !o.no_svg}};
  config["dataset"]["seed"] = o.seed;
  config["hyper"]["seed"] = o.seed;
  write_manifest(fs::path(o.out) / "manifest.json", "reproduce-fig3", config, outputs);
  out << summary;

  const bool as_expected = results[0].report.passed(o.max_error_deg) && !results[1].report.passed(o.max_error_deg);
  return as_expected ? kExitOk : kExitNegative;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose inference on projected point volumes", "orbitpose"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ORBITPOSE_VERSION);

  GenVolumeOptions gv;
  auto* gen_vol = app.add_subcommand("gen-volume", "Construct a compatible random planar volume");
  gen_vol->add_option("--n", gv.n, "Number of unit point masses")->capture_default_str();
  gen_vol->add_option("--seed", gv.seed, "Random seed")->capture_default_str();
  gen_vol->add_option("--radius", gv.radius, "Domain radius")->capture_default_str();
  gen_vol->add_option("--max-attempts", gv.max_attempts, "Rejection-sampling attempts")->capture_default_str();
  gen_vol->add_option("--preset", gv.preset, "Fixed volume instead of a random one")
      ->check(CLI::IsMember({"triangle", "antipodal", "mirror-triangle", "circle12", "pinwheel"}));
  gen_vol->add_option("--out", gv.out, "Output volume file")->required();

  CheckVolumeOptions cv;
  auto* check_vol = app.add_subcommand("check-volume", "Decide whether SO(2) acts well on the projected images");
  check_vol->add_option("--volume", cv.volume, "Volume file")->required();
  check_vol->add_option("--grid", cv.grid, "Grid size")->capture_default_str();
  check_vol->add_option("--tol", cv.tol, "Coincidence tolerance")->capture_default_str();
  check_vol->add_option("--probes", cv.probes, "Rotation probes for the star condition")->capture_default_str();
  check_vol->add_flag("--algebraic", cv.algebraic, "Use the permutation solver for injectivity");
  check_vol->add_flag("--splat", cv.splat, "Compare rendered images instead of exact projections");
  check_vol->add_option("--out", cv.out, "Report stem (default: <volume>.check)");

  GenDatasetOptions gd;
  auto* gen_data = app.add_subcommand("gen-dataset", "Generate (pose, image) samples from a volume");
  gen_data->add_option("--volume", gd.volume, "Volume file")->required();
  add_data_options(*gen_data, gd.settings);
  gen_data->add_option("--seed", gd.settings.seed, "Random seed")->capture_default_str();
  gen_data->add_option("--out", gd.out, "Output stem")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train the pose VAE");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset stem")->required();
  add_hyper_options(*train_cmd, tr.hyper);
  train_cmd->add_option("--seed", tr.hyper.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Output checkpoint")->required();
  train_cmd->add_option("--history", tr.history, "Write the loss history CSV here instead of stdout");
  train_cmd->add_flag("--search", tr.search, "Search encoder/decoder depth and width");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Infer poses and report alignment quality");
  eval_cmd->add_option("--model", ev.model, "Checkpoint")->required();
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset stem")->required();
  eval_cmd->add_option("--out", ev.out, "Report stem")->required();
  eval_cmd->add_option("--max-error-deg", ev.max_error_deg, "Pass threshold on the median error")
      ->capture_default_str();
  eval_cmd->add_option("--split", ev.split, "Samples to evaluate")
      ->check(CLI::IsMember({"all", "train", "validation"}))
      ->capture_default_str();
  eval_cmd->add_option("--fold-grid", ev.fold_grid, "Fold axes scanned")->capture_default_str();
  eval_cmd->add_flag("--no-svg", ev.no_svg, "Skip SVG plots");

  ReproduceOptions rp;
  auto* repro = app.add_subcommand("reproduce-fig3", "Compatible vs. incompatible volume pose experiment");
  repro->add_option("--seed", rp.seed, "Dataset and training seed")->capture_default_str();
  repro->add_option("--volume-seed", rp.volume_seed, "Seed of the compatible volume")->capture_default_str();
  repro->add_option("--out", rp.out, "Output directory")->capture_default_str();
  add_data_options(*repro, rp.data);
  add_hyper_options(*repro, rp.hyper);
  repro->add_option("--max-error-deg", rp.max_error_deg, "Pass threshold on the median error")
      ->capture_default_str();
  repro->add_flag("--no-svg", rp.no_svg, "Skip SVG plots");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << ORBITPOSE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitError;
  }

  try {
    if (*gen_vol) return gen_volume(gv, out);
    if (*check_vol) return check_volume(cv, out);
    if (*gen_data) return gen_dataset(gd, out);
    if (*train_cmd) return train_command(tr, out);
    if (*eval_cmd) return eval_command(ev, out);
    if (*repro) return reproduce_fig3(rp, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace orbitpose::cli
