#pragma once

// Synthetic (pose, image) data: a planar volume rotated by uniformly drawn
// angles, projected and rasterized.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

struct PoseSample {
  double theta_true = 0.0;
  Image1D image;
};

enum class Split { train, validation };

struct DatasetSettings {
  int count = 2000;
  int width = 64;
  /// Negative selects the default kernel of 5% of the domain radius.
  double splat_sigma = -1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  double val_fraction = 0.1;
};

struct Dataset {
  PointVolume volume;
  std::vector<PoseSample> samples;
  RasterSettings raster;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double val_fraction = 0.0;
  /// The last ceil(count * val_fraction) samples are validation.
  std::vector<Split> split;

  std::size_t size() const { return samples.size(); }
  std::vector<std::size_t> indices(Split which) const;
};

Dataset generate_dataset(const PointVolume& v, const DatasetSettings& settings);

/// Writes `<stem>.csv` (header `theta,x0,...`, one row per sample) and the
/// `<stem>.meta` sidecar (key=value lines followed by the embedded volume).
void save_dataset(const Dataset& d, const std::filesystem::path& stem);
Dataset load_dataset(const std::filesystem::path& stem);

std::filesystem::path dataset_csv_path(const std::filesystem::path& stem);
std::filesystem::path dataset_meta_path(const std::filesystem::path& stem);

/// One-sample Kolmogorov-Smirnov statistic of angles against Uniform[0, 2pi).
double ks_uniform_statistic(std::vector<double> thetas);

}  // namespace orbitpose
