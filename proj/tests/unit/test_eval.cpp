#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "orbitpose/circular.hpp"
#include "orbitpose/compatibility.hpp"
#include "orbitpose/dataset.hpp"
#include "orbitpose/errors.hpp"
#include "orbitpose/eval.hpp"
#include "orbitpose/vae.hpp"
#include "volumes.hpp"

using namespace orbitpose;
using namespace orbitpose::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = kPi / 180.0;

std::vector<PosePair> uniform_pairs(double (*map)(double), int n = 2000) {
  std::vector<PosePair> out;
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * (k + 0.5) / n;
    out.push_back({t, canonical_angle(map(t))});
  }
  return out;
}

double identity_map(double t) { return t; }
double reflect_map(double t) { return -t + 1.0; }
double fold_pi(double t) { return std::abs(wrap_angle(t - kPi)); }
double fold_zero(double t) { return std::abs(wrap_angle(t)); }
double fold_zero_double(double t) { return 2.0 * std::abs(wrap_angle(t)); }
double constant_map(double) { return 2.0; }

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("circular statistics") {
  CHECK(circular_mean({0.1, 6.2, 0.3, 5.9}) == doctest::Approx(-0.015901266930763502).epsilon(1e-12));
  CHECK(circular_mean({0.0, kPi}) == 0.0);
  CHECK(mean_resultant_length({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(mean_resultant_length({0.0, kPi}) < 1e-15);

  CHECK(spearman({0.3, 1.2, 1.2, -0.4, 2.5, 0.9, 3.1, 0.0}, {1.0, 0.5, 2.0, -1.0, 2.2, 0.5, 4.0, 0.1}) ==
        doctest::Approx(0.89759036144578308).epsilon(1e-12));
  CHECK(spearman({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 1, 1}, {3, 2, 1}) == 0.0);
  CHECK_THROWS_AS(spearman({1.0}, {1.0}), InsufficientData);
  CHECK_THROWS_AS(spearman({1.0, 2.0}, {1.0}), InvalidArgument);
  CHECK(ranks({3.0, 1.0, 3.0, 2.0}) == std::vector<double>{3.5, 1.0, 3.5, 2.0});

  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), InsufficientData);

  std::vector<double> a;
  std::vector<double> b;
  for (int k = 0; k < 50; ++k) {
    a.push_back(0.1 * k);
    b.push_back(0.1 * k + 0.7);
  }
  CHECK(circular_correlation(a, b) == doctest::Approx(1.0));
  CHECK(circular_correlation(a, std::vector<double>(50, 1.0)) == 0.0);
}

TEST_CASE("align_poses examples") {
  const auto id = align_poses(uniform_pairs(identity_map));
  CHECK(id.g == 1);
  CHECK(std::abs(id.c) < 1e-12);
  CHECK(id.median_error < 1e-12);

  const auto refl = align_poses(uniform_pairs(reflect_map));
  CHECK(refl.g == -1);
  CHECK(refl.c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(refl.median_error < 1e-12);

  const auto fpi = align_poses(uniform_pairs(fold_pi));
  CHECK(fpi.g == 1);
  CHECK(fpi.median_error / kDeg == doctest::Approx(0.09).epsilon(1e-6));
  CHECK(fpi.mean_error / kDeg == doctest::Approx(45.0).epsilon(1e-6));

  // Both reflection classes explain half of a unit-slope fold exactly, so g is
  // a rounding-level tie here and only the errors are checked.
  const auto fzero = align_poses(uniform_pairs(fold_zero));
  CHECK(fzero.median_error / kDeg == doctest::Approx(0.09).epsilon(1e-6));

  const auto fdouble = align_poses(uniform_pairs(fold_zero_double));
  CHECK(fdouble.median_error / kDeg == doctest::Approx(54.0).epsilon(1e-6));
  CHECK(fdouble.mean_error / kDeg == doctest::Approx(59.99994).epsilon(1e-6));
  CHECK_FALSE(fdouble.passed());

  CHECK(id.passed());
  CHECK(id.rows.size() == 2000);
  CHECK_THROWS_AS(align_poses({{0.1, 0.2}}), InsufficientData);
}

TEST_CASE("align_poses invariances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<PosePair> pairs;
  for (int i = 0; i < 500; ++i) {
    const double t = u(rng);
    pairs.push_back({t, canonical_angle(t + 0.4 + noise(rng))});
  }
  const auto base = align_poses(pairs);
  for (double shift : {0.3, 2.0, -1.1}) {
    auto moved = pairs;
    for (auto& p : moved) p.theta_est = canonical_angle(p.theta_est + shift);
    const auto r = align_poses(moved);
    CHECK(std::abs(r.median_error - base.median_error) < 1e-12);
    CHECK(std::abs(wrap_angle(r.c - base.c - shift)) < 1e-12);
  }
  auto reflected = pairs;
  for (auto& p : reflected) p.theta_est = canonical_angle(-p.theta_est);
  const auto r = align_poses(reflected);
  CHECK(r.g == -base.g);
  CHECK(std::abs(r.median_error - base.median_error) < 1e-12);
}

TEST_CASE("fold_score examples") {
  CHECK(fold_score(uniform_pairs(identity_map, 720)) <= 1e-12);
  CHECK(fold_score(uniform_pairs(reflect_map, 720)) <= 1e-12);
  CHECK(std::abs(fold_score(uniform_pairs(constant_map, 720))) < 1e-9);
  const auto fit = fit_fold(uniform_pairs(fold_pi, 720));
  // A unit-slope line explains half of a unit-slope fold, so the median-based
  // margin is positive but small; the folded family fits exactly.
  CHECK(fit.score > 0.0);
  CHECK(fit.folded.median_error < 1e-6);
  CHECK(fit.score == doctest::Approx(fit.one_to_one.median_error));
  // |wrap(t - pi)| = pi - |wrap(t)|, so the axes pi and 0 are equivalent.
  CHECK(std::abs(std::sin(fit.folded.axis)) < 2 * kTwoPi / 360);
  CHECK(fold_score(uniform_pairs(fold_zero_double, 720)) > 0.25);
  CHECK_THROWS_AS(fold_score({{0.1, 0.2}, {0.3, 0.4}}), InsufficientData);
}

TEST_CASE("evaluate_poses fills every field") {
  const auto r = evaluate_poses(uniform_pairs(identity_map, 400));
  CHECK(r.spearman == doctest::Approx(1.0));
  CHECK(r.circular_correlation == doctest::Approx(1.0));
  CHECK(r.fold_score == r.fold.score);
  for (const auto& row : r.rows) CHECK(std::abs(aligned_estimate(r, row) - row.theta_true) < 1e-9);

  std::ostringstream out;
  write_report(out, r);
  const std::string text = out.str();
  CHECK(text.find("samples=400") != std::string::npos);
  CHECK(text.find("verdict=pass") != std::string::npos);
}

TEST_CASE("infer_poses") {
  DatasetSettings s;
  s.count = 1;
  s.width = 16;
  s.val_fraction = 0.0;
  VaeHyperparams h;
  h.encoder_hidden = {8};
  h.decoder_hidden = {8};
  const auto m = make_model(16, h, 3);
  const auto one = generate_dataset(seeded_n3(), s);
  const auto p = infer_poses(m, one);
  REQUIRE(p.size() == 1);
  CHECK(p[0].theta_true == one.samples[0].theta_true);
  CHECK(std::isfinite(p[0].theta_est));

  s.count = 300;
  s.val_fraction = 0.1;
  const auto many = generate_dataset(seeded_n3(), s);
  const auto a = infer_poses(m, many);
  const auto b = infer_poses(m, many);
  REQUIRE(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].theta_est == b[i].theta_est);
  CHECK(infer_poses(m, many, Split::validation).size() == 30);

  s.width = 32;
  CHECK_THROWS_AS(infer_poses(m, generate_dataset(seeded_n3(), s)), InvalidArgument);
}

TEST_CASE("coincident poses collapse under any deterministic encoder") {
  const auto v = mirror_x_triangle();
  const auto pairs = check_injectivity(v, CheckSettings::exact()).coincidences;
  REQUIRE(pairs.size() > 100);
  VaeHyperparams h;
  const auto m = make_model(64, h, 11);
  const auto raster = RasterSettings::for_radius(v.domain_radius(), 64);
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double a = encode(m, rasterize(project_at(v, p.theta1), raster)).mu;
    const double b = encode(m, rasterize(project_at(v, p.theta2), raster)).mu;
    worst = std::max(worst, std::abs(wrap_angle(a - b)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("emit_plots") {
  const auto dir = fs::temp_directory_path() / "orbitpose_test_plots";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto r = evaluate_poses(uniform_pairs(fold_pi, 250));
  const auto files = emit_plots(r, dir / "run");
  CHECK(count_lines(files.latent_csv) == 251);
  CHECK(count_lines(files.poses_csv) == 251);
  CHECK(fs::exists(files.latent_svg));
  CHECK(fs::exists(files.poses_svg));

  std::ifstream in(files.latent_csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "cos_est,sin_est,theta_true");
  while (std::getline(in, line)) {
    double c = 0.0;
    double s = 0.0;
    CHECK(std::sscanf(line.c_str(), "%lf,%lf", &c, &s) == 2);
    CHECK(std::abs(std::hypot(c, s) - 1.0) < 1e-12);
  }

  const auto csv_only = emit_plots(r, dir / "plain", false);
  CHECK_FALSE(fs::exists(csv_only.latent_svg));
  CHECK_THROWS_AS(emit_plots(PoseReport{}, dir / "empty"), InvalidArgument);
  fs::remove_all(dir);
}
