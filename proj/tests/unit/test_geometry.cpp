#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "orbitpose/errors.hpp"
#include "orbitpose/geometry.hpp"
#include "orbitpose/volume_io.hpp"

using namespace orbitpose;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

PointVolume random_planar_volume(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::uniform_real_distribution<double> m(0.5, 2.0);
  std::vector<std::pair<double, double>> pts;
  std::vector<double> masses;
  for (int i = 0; i < n; ++i) {
    pts.emplace_back(u(rng), u(rng));
    masses.push_back(m(rng));
  }
  return PointVolume::planar(pts, masses, 1.0);
}

double max_point_diff(const PointVolume& a, const PointVolume& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a.points()[i] - b.points()[i]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("rotation_from_angle builds canonical planar rotations") {
  CHECK(max_abs_diff(rotation_from_angle(0.0).matrix(), Eigen::MatrixXd::Identity(2, 2)) == 0.0);

  Eigen::MatrixXd quarter(2, 2);
  quarter << 0, -1, 1, 0;
  CHECK(max_abs_diff(rotation_from_angle(kPi / 2).matrix(), quarter) < 1e-15);

  CHECK(rotation_from_angle(5 * kPi / 2).planar_angle() == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(rotation_from_angle(-kPi / 2).planar_angle() == doctest::Approx(3 * kPi / 2).epsilon(1e-14));
  CHECK(rotation_from_angle(kTwoPi).planar_angle() == 0.0);

  CHECK_THROWS_AS(rotation_from_angle(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
  CHECK_THROWS_AS(rotation_from_angle(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST_CASE("rotations are orthonormal with unit determinant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double t = u(rng);
    const Rotation r = rotation_from_angle(t);
    const Eigen::MatrixXd& m = r.matrix();
    CHECK(max_abs_diff(m.transpose() * m, Eigen::MatrixXd::Identity(2, 2)) < 1e-12);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
    const double a = r.planar_angle();
    CHECK(a >= 0.0);
    CHECK(a < kTwoPi);
    Eigen::MatrixXd expect(2, 2);
    expect << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    CHECK(max_abs_diff(m, expect) < 1e-12);
  }
}

TEST_CASE("from_matrix validates and recovers planar angles") {
  Eigen::MatrixXd reflection(2, 2);
  reflection << 1, 0, 0, -1;
  CHECK_THROWS_AS(Rotation::from_matrix(reflection), InvalidArgument);
  Eigen::MatrixXd skew(2, 2);
  skew << 1, 0.1, 0, 1;
  CHECK_THROWS_AS(Rotation::from_matrix(skew), InvalidArgument);

  const Rotation r = Rotation::from_matrix(rotation_from_angle(1.25).matrix());
  CHECK(r.planar_angle() == doctest::Approx(1.25).epsilon(1e-14));

  const Rotation r3 = Rotation::identity(3);
  CHECK(r3.dim() == 3);
  CHECK_FALSE(r3.angle().has_value());
  CHECK_THROWS_AS(r3.planar_angle(), UnsupportedDimension);
}

TEST_CASE("compose adds planar angles") {
  const Rotation r = compose(rotation_from_angle(kPi / 2), rotation_from_angle(kPi));
  CHECK(r.planar_angle() == doctest::Approx(3 * kPi / 2).epsilon(1e-14));

  const Rotation a = rotation_from_angle(0.8);
  CHECK(max_abs_diff(compose(a, Rotation::identity(2)).matrix(), a.matrix()) < 1e-15);
  CHECK(max_abs_diff(compose(a, a.inverse()).matrix(), Eigen::MatrixXd::Identity(2, 2)) < 1e-15);

  CHECK_THROWS_AS(compose(a, Rotation::identity(3)), InvalidArgument);
}

TEST_CASE("apply_rotation moves point masses") {
  const auto v = PointVolume::planar({{1.0, 0.0}}, {1.0}, 1.0);
  const auto moved = apply_rotation(rotation_from_angle(kPi / 2), v);
  CHECK(std::abs(moved.points()[0](0)) < 1e-15);
  CHECK(moved.points()[0](1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(moved.masses()[0] == 1.0);

  std::mt19937_64 rng(3);
  const auto w = random_planar_volume(rng, 5);
  CHECK(apply_rotation(Rotation::identity(2), w) == w);

  const auto two = PointVolume::planar({{1.0, 0.0}, {0.0, 2.0}}, {1.0, 1.0}, 2.0);
  const auto q = rotation_from_angle(kPi / 2);
  const auto twice = apply_rotation(q, apply_rotation(q, two));
  const auto once = apply_rotation(rotation_from_angle(kPi), two);
  CHECK(max_point_diff(twice, once) < 1e-12);

  CHECK_THROWS_AS(apply_rotation(Rotation::identity(3), two), InvalidArgument);
}

TEST_CASE("rotation action on volumes satisfies identity and compatibility") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  std::uniform_int_distribution<int> count(1, 6);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto v = random_planar_volume(rng, count(rng));
    const auto r1 = rotation_from_angle(ang(rng));
    const auto r2 = rotation_from_angle(ang(rng));
    CHECK(apply_rotation(Rotation::identity(2), v) == v);
    const auto lhs = apply_rotation(r1, apply_rotation(r2, v));
    const auto rhs = apply_rotation(compose(r1, r2), v);
    worst = std::max(worst, max_point_diff(lhs, rhs));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("project drops the last coordinate") {
  const auto p = project(PointVolume::planar({{0.5, 0.3}}, {1.0}, 1.0));
  REQUIRE(p.positions.size() == 1);
  CHECK(p.dim == 1);
  CHECK(p.positions[0](0) == 0.5);
  CHECK(p.masses[0] == 1.0);

  const auto q = project(PointVolume::planar({{0.0, 1.0}, {0.0, -1.0}}, {1.0, 1.0}, 1.0));
  CHECK(q.positions[0](0) == 0.0);
  CHECK(q.positions[1](0) == 0.0);
  CHECK(q.total_mass() == 2.0);
}

TEST_CASE("projection of a rotated point follows r cos(phi + theta)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rad(0.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int i = 0; i < 100; ++i) {
    const double r = rad(rng);
    const double phi = ang(rng);
    const double theta = ang(rng);
    const auto v = PointVolume::planar({{r * std::cos(phi), r * std::sin(phi)}}, {1.0}, 1.0);
    const auto p = project_at(v, theta);
    CHECK(std::abs(p.positions[0](0) - r * std::cos(phi + theta)) < 1e-12);
  }
}

TEST_CASE("projection conserves total mass exactly") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto v = random_planar_volume(rng, 1 + i % 7);
    CHECK(project(v).total_mass() == v.total_mass());
  }
}

TEST_CASE("rasterize bins and splats") {
  ProjectedMasses centre{1, {Eigen::VectorXd::Zero(1)}, {1.0}};
  const auto img = rasterize(centre, 3, 0.0, 1.0);
  CHECK(img.pixels() == std::vector<double>{0.0, 1.0, 0.0});

  ProjectedMasses pair{1, {Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 0.5)}, {1.0, 1.0}};
  const auto sym = rasterize(pair, 64, 0.05, 1.0);
  for (int j = 0; j < 64; ++j) {
    CHECK(std::abs(sym.pixels()[static_cast<std::size_t>(j)] - sym.pixels()[static_cast<std::size_t>(63 - j)]) < 1e-9);
  }
  double peak = 0.0;
  for (double p : sym.pixels()) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    peak = std::max(peak, p);
  }
  CHECK(peak == 1.0);

  ProjectedMasses outside{1, {Eigen::VectorXd::Constant(1, 1.5)}, {1.0}};
  CHECK_THROWS_AS(rasterize(outside, 64, 0.05, 1.0), OutOfDomain);
  CHECK_THROWS_AS(rasterize(centre, 1, 0.05, 1.0), InvalidArgument);
  CHECK_THROWS_AS(rasterize(centre, 8, -1.0, 1.0), InvalidArgument);
}

TEST_CASE("rasterize is invariant to uniform mass scaling") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto v = random_planar_volume(rng, 4);
    auto p = project(v);
    const auto base = rasterize(p, 64, 0.05, 1.0);
    for (double lambda : {0.5, 2.0, 10.0}) {
      auto scaled = p;
      for (double& m : scaled.masses) m *= lambda;
      const auto img = rasterize(scaled, 64, 0.05, 1.0);
      for (int j = 0; j < 64; ++j) {
        CHECK(std::abs(img.pixels()[static_cast<std::size_t>(j)] - base.pixels()[static_cast<std::size_t>(j)]) < 1e-12);
      }
    }
  }
}

TEST_CASE("image_distance is an RMS difference") {
  const Image1D a({0.2, 0.4, 0.9}, 1.0);
  CHECK(image_distance(a, a) == 0.0);
  CHECK(image_distance(Image1D({0.0, 0.0}, 1.0), Image1D({1.0, 1.0}, 1.0)) == 1.0);
  CHECK_THROWS_AS(image_distance(a, Image1D({0.0, 0.0}, 1.0)), InvalidArgument);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(16);
    std::vector<double> y(16);
    for (int j = 0; j < 16; ++j) {
      x[static_cast<std::size_t>(j)] = u(rng);
      y[static_cast<std::size_t>(j)] = u(rng);
    }
    const Image1D ix(x, 1.0);
    const Image1D iy(y, 1.0);
    CHECK(image_distance(ix, iy) == image_distance(iy, ix));
  }
}

TEST_CASE("Image1D and PointVolume enforce their invariants") {
  CHECK_THROWS_AS(Image1D({0.5}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Image1D({0.5, 1.5}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PointVolume::planar({}, {}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PointVolume::planar({{0.1, 0.1}}, {0.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PointVolume::planar({{0.1, 0.1}}, {-1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PointVolume::planar({{2.0, 0.0}}, {1.0}, 1.0), OutOfDomain);
  const Image1D img({0.0, 1.0, 0.5, 0.25}, 2.0);
  CHECK(img.pixel_center(0) == doctest::Approx(-1.5));
  CHECK(img.pixel_center(3) == doctest::Approx(1.5));
}

TEST_CASE("angle helpers") {
  CHECK(canonical_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(circular_distance(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
}

TEST_CASE("volume text format round-trips bit-exactly") {
  std::mt19937_64 rng(21);
  const auto v = random_planar_volume(rng, 6);
  std::stringstream ss;
  write_volume(ss, v);
  const auto back = read_volume(ss);
  CHECK(back == v);

  std::vector<Eigen::VectorXd> pts{Eigen::Vector3d(0.1, -0.2, 0.3)};
  const PointVolume v3(3, pts, {2.5}, 1.0);
  std::stringstream s3;
  write_volume(s3, v3);
  CHECK(read_volume(s3) == v3);
}

TEST_CASE("volume parse errors carry line numbers") {
  std::istringstream bad_header("dim=2 radius=x\n0 0 1\n");
  try {
    read_volume(bad_header, "bad");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  std::istringstream bad_row("# comment\ndim=2 radius=1\n0.1 0.2 1\n0.3 zz 1\n");
  try {
    read_volume(bad_row, "bad");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }

  std::istringstream short_row("dim=2 radius=1\n0.1 1\n");
  CHECK_THROWS_AS(read_volume(short_row, "short"), ParseError);

  std::istringstream outside("dim=2 radius=1\n3 0 1\n");
  CHECK_THROWS_AS(read_volume(outside, "outside"), ParseError);
}
