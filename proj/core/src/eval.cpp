#include "orbitpose/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "orbitpose/circular.hpp"
#include "orbitpose/errors.hpp"

namespace orbitpose {

namespace {

constexpr int kFitIterations = 6;
const double kInitialSlopes[] = {-2.0, -1.0, 0.0, 1.0, 2.0};

double deg(double rad) { return rad * 180.0 / kPi; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct LineResult {
  double slope;
  double offset;
  double median_error;
};

double line_offset(const std::vector<double>& x, const std::vector<double>& y, double slope,
                   std::vector<double>& scratch) {
  scratch.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = y[i] - slope * x[i];
  return circular_mean(scratch);
}

double line_median_error(const std::vector<double>& x, const std::vector<double>& y, double slope, double offset,
                         std::vector<double>& scratch) {
  scratch.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = std::abs(wrap_angle(y[i] - slope * x[i] - offset));
  return median(scratch);
}

// Iterated circular least squares from each initial slope: the offset is the
// circular mean of y - s x, the estimates are unwrapped around the current
// line, and (s, c) are refitted by ordinary least squares.
LineResult fit_circular_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);

  std::vector<double> scratch;
  LineResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double s0 : kInitialSlopes) {
    double s = s0;
    double c = line_offset(x, y, s, scratch);
    for (int it = 0; it < kFitIterations && sxx > 0.0; ++it) {
      double mu = 0.0;
      scratch.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double line = s * x[i] + c;
        scratch[i] = line + wrap_angle(y[i] - line);
        mu += scratch[i];
      }
      mu /= n;
      double sxu = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) sxu += (x[i] - mx) * (scratch[i] - mu);
      s = sxu / sxx;
      c = line_offset(x, y, s, scratch);
    }
    const double err = line_median_error(x, y, s, c, scratch);
    if (err < best.median_error) best = {s, c, err};
  }
  return best;
}

std::vector<double> aligned_values(const PoseReport& report) {
  std::vector<double> out;
  out.reserve(report.rows.size());
  for (const auto& r : report.rows) out.push_back(aligned_estimate(report, r));
  return out;
}

std::string svg_header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string hue_for(double theta) { return fmt("%.1f", deg(canonical_angle(theta))); }

void open_or_throw(std::ofstream& out, const std::filesystem::path& p) {
  out.open(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
}

void close_or_throw(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw IoError("failed writing " + p.string());
}

}  // namespace

bool PoseReport::passed(double max_error_deg) const { return deg(median_error) <= max_error_deg; }

std::vector<PosePair> infer_poses(const VaeModel& model, const Dataset& dataset) {
  if (dataset.raster.width != model.width) {
    throw InvalidArgument("dataset width " + std::to_string(dataset.raster.width) + " does not match model width " +
                          std::to_string(model.width));
  }
  std::vector<PosePair> out;
  out.reserve(dataset.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t end = std::min(dataset.size(), start + kChunk);
    std::vector<const Image1D*> images;
    for (std::size_t i = start; i < end; ++i) images.push_back(&dataset.samples[i].image);
    const auto enc = encode_batch(model, images);
    for (std::size_t i = start; i < end; ++i) out.push_back({dataset.samples[i].theta_true, enc[i - start].mu});
  }
  return out;
}

std::vector<PosePair> infer_poses(const VaeModel& model, const Dataset& dataset, Split split) {
  const auto all = infer_poses(model, dataset);
  std::vector<PosePair> out;
  for (auto i : dataset.indices(split)) out.push_back(all[i]);
  return out;
}

PoseReport align_poses(const std::vector<PosePair>& pairs) {
  if (pairs.size() < 2) throw InsufficientData("alignment needs at least 2 pose pairs");
  PoseReport best;
  best.median_error = std::numeric_limits<double>::infinity();
  std::vector<double> diffs(pairs.size());
  for (int g : {1, -1}) {
    for (std::size_t i = 0; i < pairs.size(); ++i) diffs[i] = wrap_angle(pairs[i].theta_est - g * pairs[i].theta_true);
    const double c = circular_mean(diffs);
    PoseReport r;
    r.g = g;
    r.c = c;
    std::vector<double> errs(pairs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double res = wrap_angle(pairs[i].theta_est - g * pairs[i].theta_true - c);
      r.rows.push_back({pairs[i].theta_true, pairs[i].theta_est, res});
      errs[i] = std::abs(res);
      sum += errs[i];
    }
    r.median_error = median(errs);
    r.mean_error = sum / static_cast<double>(pairs.size());
    if (r.median_error < best.median_error) best = std::move(r);
  }
  return best;
}

FoldFit fit_fold(const std::vector<PosePair>& pairs, int grid_size) {
  if (pairs.size() < 8) throw InsufficientData("fold fitting needs at least 8 pose pairs");
  if (grid_size < 1) throw InvalidArgument("fold axis grid must be positive");
  std::vector<double> x(pairs.size());
  std::vector<double> y(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x[i] = canonical_angle(pairs[i].theta_true);
    y[i] = pairs[i].theta_est;
  }

  FoldFit fit;
  // One-to-one family: free-slope circular lines in theta_true, plus the two
  // unit-slope alignments.
  const LineResult direct = fit_circular_line(x, y);
  fit.one_to_one = {direct.slope, direct.offset, 0.0, direct.median_error};
  const PoseReport aligned = align_poses(pairs);
  if (aligned.median_error < fit.one_to_one.median_error) {
    fit.one_to_one = {static_cast<double>(aligned.g), aligned.c, 0.0, aligned.median_error};
  }

  fit.folded.median_error = std::numeric_limits<double>::infinity();
  std::vector<double> folded_x(pairs.size());
  for (int k = 0; k < grid_size; ++k) {
    const double axis = kTwoPi * k / grid_size;
    for (std::size_t i = 0; i < x.size(); ++i) folded_x[i] = std::abs(wrap_angle(x[i] - axis));
    const LineResult r = fit_circular_line(folded_x, y);
    if (r.median_error < fit.folded.median_error) fit.folded = {r.slope, r.offset, axis, r.median_error};
  }
  fit.score = fit.one_to_one.median_error - fit.folded.median_error;
  return fit;
}

double fold_score(const std::vector<PosePair>& pairs, int grid_size) { return fit_fold(pairs, grid_size).score; }

double aligned_estimate(const PoseReport& report, const PoseRow& row) {
  return row.theta_true + report.g * row.residual;
}

PoseReport evaluate_poses(const std::vector<PosePair>& pairs, int grid_size) {
  PoseReport r = align_poses(pairs);
  r.fold = fit_fold(pairs, grid_size);
  r.fold_score = r.fold.score;
  std::vector<double> truth;
  truth.reserve(r.rows.size());
  for (const auto& row : r.rows) truth.push_back(canonical_angle(row.theta_true));
  const auto aligned = aligned_values(r);
  r.spearman = spearman(truth, aligned);
  r.circular_correlation = circular_correlation(truth, aligned);
  return r;
}

void write_report(std::ostream& out, const PoseReport& r, double max_error_deg) {
  out << "samples=" << r.rows.size() << '\n';
  out << "g=" << r.g << '\n';
  out << "c_rad=" << fmt("%.9f", r.c) << '\n';
  out << "median_error_deg=" << fmt("%.6f", deg(r.median_error)) << '\n';
  out << "mean_error_deg=" << fmt("%.6f", deg(r.mean_error)) << '\n';
  out << "fold_score_deg=" << fmt("%.6f", deg(r.fold_score)) << '\n';
  out << "fold_axis_deg=" << fmt("%.3f", deg(r.fold.folded.axis)) << '\n';
  out << "fold_slope=" << fmt("%.6f", r.fold.folded.slope) << '\n';
  out << "fold_median_error_deg=" << fmt("%.6f", deg(r.fold.folded.median_error)) << '\n';
  out << "one_to_one_slope=" << fmt("%.6f", r.fold.one_to_one.slope) << '\n';
  out << "one_to_one_median_error_deg=" << fmt("%.6f", deg(r.fold.one_to_one.median_error)) << '\n';
  out << "spearman=" << fmt("%.6f", r.spearman) << '\n';
  out << "circular_correlation=" << fmt("%.6f", r.circular_correlation) << '\n';
  out << "max_error_deg=" << fmt("%.3f", max_error_deg) << '\n';
  out << "verdict=" << (r.passed(max_error_deg) ? "pass" : "fail") << '\n';
}

PlotFiles emit_plots(const PoseReport& report, const std::filesystem::path& stem, bool svg) {
  if (report.rows.empty()) throw InvalidArgument("report has no rows to plot");
  const std::string base = stem.string();
  PlotFiles files{base + "_latent.csv", base + "_poses.csv", {}, {}};
  const auto aligned = aligned_values(report);

  {
    std::ofstream out;
    open_or_throw(out, files.latent_csv);
    out << "cos_est,sin_est,theta_true\n";
    for (const auto& r : report.rows) {
      out << fmt("%.17g", std::cos(r.theta_est)) << ',' << fmt("%.17g", std::sin(r.theta_est)) << ','
          << fmt("%.17g", r.theta_true) << '\n';
    }
    close_or_throw(out, files.latent_csv);
  }
  {
    std::ofstream out;
    open_or_throw(out, files.poses_csv);
    out << "theta_true,theta_est,aligned_est,residual\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& r = report.rows[i];
      out << fmt("%.17g", r.theta_true) << ',' << fmt("%.17g", r.theta_est) << ',' << fmt("%.17g", aligned[i]) << ','
          << fmt("%.17g", r.residual) << '\n';
    }
    close_or_throw(out, files.poses_csv);
  }
  if (!svg) return files;

  files.latent_svg = base + "_latent.svg";
  files.poses_svg = base + "_poses.svg";
  {
    std::ofstream out;
    open_or_throw(out, files.latent_svg);
    out << svg_header(320, 320);
    out << "<circle cx=\"160\" cy=\"160\" r=\"120\" fill=\"none\" stroke=\"#999\"/>\n";
    for (const auto& r : report.rows) {
      out << "<circle cx=\"" << fmt("%.2f", 160.0 + 120.0 * std::cos(r.theta_est)) << "\" cy=\""
          << fmt("%.2f", 160.0 - 120.0 * std::sin(r.theta_est)) << "\" r=\"2\" fill=\"hsl(" << hue_for(r.theta_true)
          << ",80%,45%)\"/>\n";
    }
    out << "<text x=\"8\" y=\"16\" font-size=\"12\">latent angle, colored by true pose</text>\n</svg>\n";
    close_or_throw(out, files.latent_svg);
  }
  {
    std::ofstream out;
    open_or_throw(out, files.poses_svg);
    out << svg_header(400, 400);
    out << "<rect x=\"40\" y=\"20\" width=\"340\" height=\"340\" fill=\"none\" stroke=\"#999\"/>\n";
    for (const auto& r : report.rows) {
      const double tx = canonical_angle(r.theta_true) / kTwoPi;
      const double ty = canonical_angle(r.theta_est) / kTwoPi;
      out << "<circle cx=\"" << fmt("%.2f", 40.0 + 340.0 * tx) << "\" cy=\"" << fmt("%.2f", 360.0 - 340.0 * ty)
          << "\" r=\"1.5\" fill=\"#1f5fa8\"/>\n";
    }
    out << "<text x=\"150\" y=\"392\" font-size=\"12\">true pose [0, 360)</text>\n";
    out << "<text x=\"12\" y=\"200\" font-size=\"12\" transform=\"rotate(-90 12 200)\">estimated pose [0, "
           "360)</text>\n</svg>\n";
    close_or_throw(out, files.poses_svg);
  }
  return files;
}

}  // namespace orbitpose
