#pragma once

// Deciding whether SO(2) acts well on the projected images of a volume.
//
// Two conditions are checked for a planar point volume V:
//   star        P[R1 V] = P[R2 V]  implies  P[R3 R1 V] = P[R3 R2 V] for all R3.
//               Necessary and sufficient for rho(R, I) = P[R R_I V] to be a
//               group action on the image set.
//   injectivity P[R1 V] = P[R2 V]  implies  R1 = R2. Sufficient for star.
//
// Grid checks compare projections at `grid_size` uniformly spaced angles and
// are claims at that resolution only. The algebraic check enumerates the
// permutations sigma of S_n and solves r_i cos(phi_i + t1) =
// r_sigma(i) cos(phi_sigma(i) + t2) for (t1, t2) directly.

#include <cstdint>
#include <optional>
#include <vector>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

/// How two projections are compared. `splat_sigma == 0` selects the exact
/// multiset path; otherwise images are rendered and compared by RMS.
struct CheckSettings {
  int grid_size = 720;
  int width = 64;
  double splat_sigma = 0.0;
  double tol = 1e-6;
  int probe_count = 16;

  /// Exact multiset comparison, tolerance 1e-6.
  static CheckSettings exact(int grid_size = 720);
  /// Gaussian splat of 5% of the domain radius, tolerance 1e-3.
  static CheckSettings splatted(double domain_radius, int grid_size = 720);

  RasterSettings raster_for(const PointVolume& v) const;
};

struct AlgebraicSettings {
  int angular_resolution = 4096;
  double residual_tol = 1e-9;
  double polish_tol = 1e-12;
  /// Witness angles closer than this are treated as the same rotation.
  double distinct_tol = 1e-6;
};

struct CoincidencePair {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double image_rms = 0.0;
};

struct StarViolation {
  CoincidencePair pair;
  double theta3 = 0.0;
  double deviation = 0.0;
};

struct PermutationWitness {
  std::vector<int> permutation;
  double theta1 = 0.0;
  double theta2 = 0.0;
  /// True when rotating V by theta1 - theta2 maps it onto itself, i.e. the
  /// coincidence comes from a nontrivial stabilizer rather than the projection.
  bool is_symmetry = false;
  double max_residual = 0.0;
};

/// Outcome of one or more checks. A condition that was not evaluated stays
/// empty. Whenever injectivity holds, star is also set (vacuously true).
struct CompatibilityVerdict {
  std::optional<bool> satisfies_star;
  std::optional<bool> satisfies_injectivity;
  std::vector<CoincidencePair> coincidences;
  std::vector<StarViolation> star_violations;
  std::optional<PermutationWitness> permutation_witness;
  std::vector<PermutationWitness> all_witnesses;
  /// Grid size (grid checks) or sweep resolution (algebraic check) at which
  /// the verdict was established.
  int resolution = 0;
  bool algebraic = false;

  bool compatible() const { return satisfies_star.value_or(false); }
};

/// Exact path: masses are grouped into classes (equal within 1e-9 relative),
/// positions are sorted inside each class and matched in order; returns the
/// RMS position difference, or +inf if the mass classes differ. Raster path:
/// RMS pixel difference of the rendered images.
double projection_distance(const ProjectedMasses& a, const ProjectedMasses& b,
                           const RasterSettings& raster);

std::vector<CoincidencePair> find_coincidences(const PointVolume& v, const CheckSettings& settings);

CompatibilityVerdict check_injectivity(const PointVolume& v, const CheckSettings& settings);

CompatibilityVerdict check_injectivity_algebraic(const PointVolume& v,
                                                 const AlgebraicSettings& settings = {});

CompatibilityVerdict check_star(const PointVolume& v, const CheckSettings& settings);

/// All rotation angles theta in [0, 2pi) with P[R_theta V] equal to `image`
/// (exact multiset comparison within `tol`), sorted ascending. A volume whose
/// points all sit at the origin returns {0}.
std::vector<double> preimage_angles(const PointVolume& v, const ProjectedMasses& image,
                                    double tol = 1e-9);

/// rho(theta, I) = P[R_theta R_I V], with R_I the smallest preimage angle of I.
ProjectedMasses act_on_image(const PointVolume& v, double theta, const ProjectedMasses& image);

struct GroupActionSettings {
  int sample_count = 100;
  std::uint64_t seed = 1;
  CheckSettings check = CheckSettings::exact();
  /// Tolerance on the worst image deviation.
  double tol = 1e-9;
  /// When set, the volume must pass check_star first. Turning it off lets
  /// tests observe the multi-valued action on incompatible volumes.
  bool enforce_precondition = true;
};

struct GroupActionReport {
  bool passed = false;
  int samples = 0;
  double worst_identity_deviation = 0.0;
  double worst_compatibility_deviation = 0.0;
  double worst_deviation = 0.0;
};

GroupActionReport verify_group_action(const PointVolume& v, const GroupActionSettings& settings = {});

/// Samples n unit masses uniformly in the ball until the algebraic check
/// accepts the volume. Deterministic in (n, seed).
PointVolume random_compatible_volume(int n, std::uint64_t seed, double domain_radius = 1.0,
                                     int max_attempts = 100,
                                     const AlgebraicSettings& settings = {});

}  // namespace orbitpose
