#pragma once

// Rotations, point-mass volumes, the axis projection and 1D rasterization.
//
// A volume is a finite sum of weighted Dirac masses inside a ball of radius
// `domain_radius`. Rotating a volume carries each mass forward by the
// rotation matrix; projecting drops the last coordinate. For d = 2 the
// projection is a set of weighted positions on a line, which `rasterize`
// turns into a max-normalized Image1D.

#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace orbitpose {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle to [0, 2π). Values that would round to 2π map to 0.
double canonical_angle(double theta);

/// Maps any finite angle to (-π, π].
double wrap_angle(double theta);

/// Shortest arc length between two angles, in [0, π].
double circular_distance(double a, double b);

/// An element of SO(d). For d = 2 the canonical angle in [0, 2π) is kept
/// alongside the matrix and is the source of truth for composition.
class Rotation {
 public:
  static Rotation identity(int dim);
  static Rotation from_angle(double theta);
  /// Validates orthonormality and det = +1 within 1e-12.
  static Rotation from_matrix(const Eigen::MatrixXd& matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  std::optional<double> angle() const { return angle_; }
  /// Canonical angle; throws UnsupportedDimension unless d = 2.
  double planar_angle() const;

  Rotation inverse() const;

 private:
  Rotation(Eigen::MatrixXd matrix, std::optional<double> angle)
      : matrix_(std::move(matrix)), angle_(angle) {}

  Eigen::MatrixXd matrix_;
  std::optional<double> angle_;
};

Rotation rotation_from_angle(double theta);
Rotation compose(const Rotation& r1, const Rotation& r2);

/// Weighted point masses X_i with masses m_i inside the ball of radius
/// domain_radius. Invariants are checked on construction.
class PointVolume {
 public:
  PointVolume(int dim, std::vector<Eigen::VectorXd> points, std::vector<double> masses,
              double domain_radius);

  /// Convenience constructor for planar volumes.
  static PointVolume planar(const std::vector<std::pair<double, double>>& points,
                            const std::vector<double>& masses, double domain_radius);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  double domain_radius() const { return domain_radius_; }
  double total_mass() const;

  friend bool operator==(const PointVolume& a, const PointVolume& b);

 private:
  int dim_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> masses_;
  double domain_radius_;
};

/// Exact (pre-raster) projection: positions in R^{d-1} with the source masses.
struct ProjectedMasses {
  int dim = 1;
  std::vector<Eigen::VectorXd> positions;
  std::vector<double> masses;

  double total_mass() const;
};

/// Max-normalized 1D image. Pixel j covers
/// [-r + 2rj/W, -r + 2r(j+1)/W) with r = domain_radius.
class Image1D {
 public:
  Image1D(std::vector<double> pixels, double domain_radius);

  int width() const { return static_cast<int>(pixels_.size()); }
  const std::vector<double>& pixels() const { return pixels_; }
  double domain_radius() const { return domain_radius_; }
  double pixel_center(int j) const;

  friend bool operator==(const Image1D&, const Image1D&) = default;

 private:
  std::vector<double> pixels_;
  double domain_radius_;
};

/// Rendering parameters shared by every module that turns projections into
/// images. `splat_sigma == 0` selects nearest-pixel binning.
struct RasterSettings {
  int width = 64;
  double splat_sigma = 0.05;
  double domain_radius = 1.0;

  /// Default kernel width is 5% of the domain radius.
  static RasterSettings for_radius(double radius, int width = 64);
};

PointVolume apply_rotation(const Rotation& r, const PointVolume& v);
ProjectedMasses project(const PointVolume& v);

/// Gaussian splat (or nearest-pixel binning when splat_sigma is 0) at pixel
/// centers, divided by the maximum so pixels lie in [0, 1].
Image1D rasterize(const ProjectedMasses& p, int width, double splat_sigma, double domain_radius);
Image1D rasterize(const ProjectedMasses& p, const RasterSettings& settings);

/// Root-mean-square pixel difference.
double image_distance(const Image1D& a, const Image1D& b);

/// project(apply_rotation(rotation_from_angle(theta), v)) for planar volumes.
ProjectedMasses project_at(const PointVolume& v, double theta);

}  // namespace orbitpose
