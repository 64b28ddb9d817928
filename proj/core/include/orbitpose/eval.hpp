#pragma once

// Pose-inference quality: alignment of estimated to true poses up to a
// global offset and a reflection, and detection of two-to-one folding.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "orbitpose/dataset.hpp"
#include "orbitpose/vae.hpp"

namespace orbitpose {

inline constexpr double kDefaultMaxErrorDeg = 15.0;

struct PosePair {
  double theta_true = 0.0;
  double theta_est = 0.0;
};

struct PoseRow {
  double theta_true = 0.0;
  double theta_est = 0.0;
  /// wrap(theta_est - g * theta_true - c), in (-pi, pi].
  double residual = 0.0;
};

/// Best fit of theta_est ~ s * x + c on the circle, where x is theta_true
/// (one-to-one family) or |wrap(theta_true - axis)| (folded family).
struct CircularLineFit {
  double slope = 0.0;
  double offset = 0.0;
  double axis = 0.0;
  double median_error = 0.0;
};

struct FoldFit {
  double score = 0.0;
  CircularLineFit folded;
  CircularLineFit one_to_one;
};

struct PoseReport {
  int g = 1;
  double c = 0.0;
  double median_error = 0.0;
  double mean_error = 0.0;
  double fold_score = 0.0;
  FoldFit fold;
  /// Spearman correlation of theta_true against the aligned estimate
  /// unwrapped around theta_true.
  double spearman = 0.0;
  /// Circular correlation of theta_true against the aligned estimate.
  double circular_correlation = 0.0;
  std::vector<PoseRow> rows;

  bool passed(double max_error_deg = kDefaultMaxErrorDeg) const;
};

/// theta_est = encode(image).mu for every sample (or every sample of one split).
std::vector<PosePair> infer_poses(const VaeModel& model, const Dataset& dataset);
std::vector<PosePair> infer_poses(const VaeModel& model, const Dataset& dataset, Split split);

/// For g in {+1, -1}: c_g = circular mean of wrap(est - g true); errors are
/// |wrap(est - g true - c_g)|. Keeps the g with the smaller median error
/// (ties go to +1). Leaves the fold and correlation fields at zero.
PoseReport align_poses(const std::vector<PosePair>& pairs);

/// Folded-minus-one-to-one margin: (best one-to-one median error) - (best
/// folded median error), each family fitted by iterated circular least
/// squares; the folded family scans `grid_size` axes.
FoldFit fit_fold(const std::vector<PosePair>& pairs, int grid_size = 360);
double fold_score(const std::vector<PosePair>& pairs, int grid_size = 360);

/// align_poses plus fold_score and both correlations.
PoseReport evaluate_poses(const std::vector<PosePair>& pairs, int grid_size = 360);

/// g * (theta_est - c), unwrapped to lie within pi of theta_true.
double aligned_estimate(const PoseReport& report, const PoseRow& row);

void write_report(std::ostream& out, const PoseReport& report, double max_error_deg = kDefaultMaxErrorDeg);

struct PlotFiles {
  std::filesystem::path latent_csv;
  std::filesystem::path poses_csv;
  std::filesystem::path latent_svg;
  std::filesystem::path poses_svg;
};

/// Writes `<stem>_latent.csv` (cos theta_est, sin theta_est, theta_true),
/// `<stem>_poses.csv` (theta_true, theta_est, aligned, residual) and, when
/// `svg` is set, matching SVG scatter plots.
PlotFiles emit_plots(const PoseReport& report, const std::filesystem::path& stem, bool svg = true);

}  // namespace orbitpose
