#include "orbitpose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "orbitpose/errors.hpp"

namespace orbitpose {

namespace {

constexpr double kOrthoTol = 1e-12;
constexpr double kDomainSlack = 1e-12;

Eigen::MatrixXd planar_matrix(double theta) {
  Eigen::MatrixXd m(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m << c, -s, s, c;
  return m;
}

}  // namespace

double canonical_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw InvalidArgument("angle must be finite");
  }
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_angle(double theta) {
  double r = canonical_angle(theta);
  if (r > kPi) r -= kTwoPi;
  return r;
}

double circular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

Rotation Rotation::identity(int dim) {
  if (dim < 1) throw InvalidArgument("rotation dimension must be positive");
  std::optional<double> angle;
  if (dim == 2) angle = 0.0;
  return Rotation(Eigen::MatrixXd::Identity(dim, dim), angle);
}

Rotation Rotation::from_angle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("rotation angle must be finite");
  const double canon = canonical_angle(theta);
  return Rotation(planar_matrix(canon), canon);
}

Rotation Rotation::from_matrix(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw InvalidArgument("rotation matrix must be square");
  }
  if (!matrix.allFinite()) throw InvalidArgument("rotation matrix must be finite");
  const auto n = matrix.rows();
  const Eigen::MatrixXd gram = matrix.transpose() * matrix;
  if ((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > kOrthoTol) {
    throw InvalidArgument("rotation matrix is not orthonormal");
  }
  if (std::abs(matrix.determinant() - 1.0) > kOrthoTol) {
    throw InvalidArgument("rotation matrix must have determinant +1");
  }
  if (n == 2) return from_angle(std::atan2(matrix(1, 0), matrix(0, 0)));
  return Rotation(matrix, std::nullopt);
}

double Rotation::planar_angle() const {
  if (!angle_) {
    throw UnsupportedDimension("planar angle requested for a rotation of dimension " +
                               std::to_string(dim()));
  }
  return *angle_;
}

Rotation Rotation::inverse() const {
  if (angle_) return from_angle(-*angle_);
  return Rotation(matrix_.transpose(), std::nullopt);
}

Rotation rotation_from_angle(double theta) { return Rotation::from_angle(theta); }

Rotation compose(const Rotation& r1, const Rotation& r2) {
  if (r1.dim() != r2.dim()) {
    throw InvalidArgument("cannot compose rotations of dimension " + std::to_string(r1.dim()) +
                          " and " + std::to_string(r2.dim()));
  }
  if (r1.angle() && r2.angle()) return Rotation::from_angle(*r1.angle() + *r2.angle());
  return Rotation::from_matrix(r1.matrix() * r2.matrix());
}

PointVolume::PointVolume(int dim, std::vector<Eigen::VectorXd> points, std::vector<double> masses,
                         double domain_radius)
    : dim_(dim),
      points_(std::move(points)),
      masses_(std::move(masses)),
      domain_radius_(domain_radius) {
  if (dim_ < 1) throw InvalidArgument("volume dimension must be positive");
  if (points_.empty()) throw InvalidArgument("volume needs at least one point");
  if (points_.size() != masses_.size()) {
    throw InvalidArgument("volume has " + std::to_string(points_.size()) + " points but " +
                          std::to_string(masses_.size()) + " masses");
  }
  if (!(domain_radius_ > 0.0) || !std::isfinite(domain_radius_)) {
    throw InvalidArgument("domain radius must be positive and finite");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != dim_) {
      throw InvalidArgument("point " + std::to_string(i) + " has wrong dimension");
    }
    if (!points_[i].allFinite()) throw InvalidArgument("point " + std::to_string(i) + " not finite");
    if (!(masses_[i] > 0.0) || !std::isfinite(masses_[i])) {
      throw InvalidArgument("mass " + std::to_string(i) + " must be positive and finite");
    }
    if (points_[i].norm() > domain_radius_ * (1.0 + kDomainSlack)) {
      throw OutOfDomain("point " + std::to_string(i) + " lies outside the domain ball");
    }
  }
}

PointVolume PointVolume::planar(const std::vector<std::pair<double, double>>& points,
                                const std::vector<double>& masses, double domain_radius) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(points.size());
  for (const auto& [x, y] : points) {
    Eigen::VectorXd p(2);
    p << x, y;
    pts.push_back(std::move(p));
  }
  return PointVolume(2, std::move(pts), masses, domain_radius);
}

double PointVolume::total_mass() const {
  double total = 0.0;
  for (double m : masses_) total += m;
  return total;
}

bool operator==(const PointVolume& a, const PointVolume& b) {
  if (a.dim_ != b.dim_ || a.domain_radius_ != b.domain_radius_ || a.masses_ != b.masses_ ||
      a.points_.size() != b.points_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.points_.size(); ++i) {
    if (a.points_[i] != b.points_[i]) return false;
  }
  return true;
}

double ProjectedMasses::total_mass() const {
  double total = 0.0;
  for (double m : masses) total += m;
  return total;
}

Image1D::Image1D(std::vector<double> pixels, double domain_radius)
    : pixels_(std::move(pixels)), domain_radius_(domain_radius) {
  if (pixels_.size() < 2) throw InvalidArgument("image width must be at least 2");
  if (!(domain_radius_ > 0.0)) throw InvalidArgument("image domain radius must be positive");
  for (std::size_t j = 0; j < pixels_.size(); ++j) {
    const double p = pixels_[j];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("pixel " + std::to_string(j) + " outside [0, 1]");
    }
  }
}

double Image1D::pixel_center(int j) const {
  const double w = static_cast<double>(width());
  return -domain_radius_ + 2.0 * domain_radius_ * (static_cast<double>(j) + 0.5) / w;
}

RasterSettings RasterSettings::for_radius(double radius, int width) {
  return RasterSettings{width, 0.05 * radius, radius};
}

PointVolume apply_rotation(const Rotation& r, const PointVolume& v) {
  if (r.dim() != v.dim()) {
    throw InvalidArgument("rotation dimension " + std::to_string(r.dim()) +
                          " does not match volume dimension " + std::to_string(v.dim()));
  }
  std::vector<Eigen::VectorXd> moved;
  moved.reserve(v.size());
  for (const auto& p : v.points()) moved.emplace_back(r.matrix() * p);
  return PointVolume(v.dim(), std::move(moved), v.masses(), v.domain_radius());
}

ProjectedMasses project(const PointVolume& v) {
  if (v.dim() < 2) throw UnsupportedDimension("projection needs a volume of dimension >= 2");
  ProjectedMasses out;
  out.dim = v.dim() - 1;
  out.positions.reserve(v.size());
  for (const auto& p : v.points()) out.positions.emplace_back(p.head(v.dim() - 1));
  out.masses = v.masses();
  return out;
}

ProjectedMasses project_at(const PointVolume& v, double theta) {
  return project(apply_rotation(Rotation::from_angle(theta), v));
}

Image1D rasterize(const ProjectedMasses& p, int width, double splat_sigma, double domain_radius) {
  if (width < 2) throw InvalidArgument("raster width must be at least 2");
  if (!(splat_sigma >= 0.0) || !std::isfinite(splat_sigma)) {
    throw InvalidArgument("splat sigma must be nonnegative");
  }
  if (!(domain_radius > 0.0)) throw InvalidArgument("domain radius must be positive");
  if (p.dim != 1) throw UnsupportedDimension("rasterize renders 1D projections only");
  if (p.positions.empty() || p.positions.size() != p.masses.size()) {
    throw InvalidArgument("projection needs matching, nonempty positions and masses");
  }

  const double w = static_cast<double>(width);
  std::vector<double> signal(static_cast<std::size_t>(width), 0.0);
  for (std::size_t i = 0; i < p.positions.size(); ++i) {
    const double x = p.positions[i](0);
    if (!(std::abs(x) <= domain_radius * (1.0 + kDomainSlack))) {
      throw OutOfDomain("projected mass at " + std::to_string(x) + " lies outside [-" +
                        std::to_string(domain_radius) + ", " + std::to_string(domain_radius) + "]");
    }
    if (splat_sigma == 0.0) {
      auto j = static_cast<long>(std::floor((x + domain_radius) * w / (2.0 * domain_radius)));
      j = std::clamp<long>(j, 0, width - 1);
      signal[static_cast<std::size_t>(j)] += p.masses[i];
    } else {
      const double inv = 1.0 / (2.0 * splat_sigma * splat_sigma);
      for (int j = 0; j < width; ++j) {
        const double c = -domain_radius + 2.0 * domain_radius * (j + 0.5) / w;
        const double d = x - c;
        signal[static_cast<std::size_t>(j)] += p.masses[i] * std::exp(-d * d * inv);
      }
    }
  }
  const double peak = *std::max_element(signal.begin(), signal.end());
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw NumericError("rasterized signal has no positive maximum (splat sigma too small?)");
  }
  for (double& s : signal) s = std::min(s / peak, 1.0);
  return Image1D(std::move(signal), domain_radius);
}

Image1D rasterize(const ProjectedMasses& p, const RasterSettings& settings) {
  return rasterize(p, settings.width, settings.splat_sigma, settings.domain_radius);
}

double image_distance(const Image1D& a, const Image1D& b) {
  if (a.width() != b.width()) {
    throw InvalidArgument("image widths differ: " + std::to_string(a.width()) + " vs " +
                          std::to_string(b.width()));
  }
  double acc = 0.0;
  for (int j = 0; j < a.width(); ++j) {
    const double d = a.pixels()[static_cast<std::size_t>(j)] - b.pixels()[static_cast<std::size_t>(j)];
    acc += d * d;
  }
  return std::sqrt(acc / a.width());
}

}  // namespace orbitpose
