#include "orbitpose/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "orbitpose/errors.hpp"
#include "orbitpose/volume_io.hpp"

namespace orbitpose {

namespace {

std::vector<Split> make_split(std::size_t count, double val_fraction) {
  const auto n_val = static_cast<std::size_t>(std::ceil(static_cast<double>(count) * val_fraction));
  std::vector<Split> split(count, Split::train);
  for (std::size_t i = count - std::min(n_val, count); i < count; ++i) split[i] = Split::validation;
  return split;
}

}  // namespace

std::vector<std::size_t> Dataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

Dataset generate_dataset(const PointVolume& v, const DatasetSettings& s) {
  if (v.dim() != 2) throw UnsupportedDimension("datasets are generated from planar volumes");
  if (s.count < 1) throw InvalidArgument("sample count must be at least 1");
  if (s.width < 2) throw InvalidArgument("image width must be at least 2");
  if (!(s.val_fraction >= 0.0 && s.val_fraction < 1.0)) {
    throw InvalidArgument("validation fraction must lie in [0, 1)");
  }
  if (!(s.noise_sigma >= 0.0) || !std::isfinite(s.noise_sigma)) {
    throw InvalidArgument("noise sigma must be nonnegative");
  }
  RasterSettings raster = RasterSettings::for_radius(v.domain_radius(), s.width);
  if (s.splat_sigma >= 0.0) raster.splat_sigma = s.splat_sigma;

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<PoseSample> samples;
  samples.reserve(static_cast<std::size_t>(s.count));
  for (int k = 0; k < s.count; ++k) {
    const double theta = canonical_angle(angle(rng));
    Image1D clean = rasterize(project_at(v, theta), raster);
    if (s.noise_sigma > 0.0) {
      std::vector<double> px = clean.pixels();
      for (double& p : px) p = std::clamp(p + s.noise_sigma * noise(rng), 0.0, 1.0);
      samples.push_back({theta, Image1D(std::move(px), raster.domain_radius)});
    } else {
      samples.push_back({theta, std::move(clean)});
    }
  }
  Dataset d{v, std::move(samples), raster, s.noise_sigma, s.seed, s.val_fraction, {}};
  d.split = make_split(d.samples.size(), s.val_fraction);
  return d;
}

std::filesystem::path dataset_csv_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".csv";
  return p;
}

std::filesystem::path dataset_meta_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".meta";
  return p;
}

void save_dataset(const Dataset& d, const std::filesystem::path& stem) {
  {
    std::ofstream os(dataset_csv_path(stem));
    if (!os) throw IoError("cannot open " + dataset_csv_path(stem).string() + " for writing");
    os << "theta";
    for (int j = 0; j < d.raster.width; ++j) os << ",x" << j;
    os << '\n';
    for (const auto& s : d.samples) {
      os << format_double(s.theta_true);
      for (double p : s.image.pixels()) os << ',' << format_double(p);
      os << '\n';
    }
    if (!os) throw IoError("failed writing " + dataset_csv_path(stem).string());
  }
  std::ofstream ms(dataset_meta_path(stem));
  if (!ms) throw IoError("cannot open " + dataset_meta_path(stem).string() + " for writing");
  ms << "format=orbitpose-dataset-1\n"
     << "count=" << d.samples.size() << '\n'
     << "seed=" << d.seed << '\n'
     << "width=" << d.raster.width << '\n'
     << "splat_sigma=" << format_double(d.raster.splat_sigma) << '\n'
     << "noise_sigma=" << format_double(d.noise_sigma) << '\n'
     << "domain_radius=" << format_double(d.raster.domain_radius) << '\n'
     << "val_fraction=" << format_double(d.val_fraction) << '\n'
     << "volume:\n";
  write_volume(ms, d.volume);
  if (!ms) throw IoError("failed writing " + dataset_meta_path(stem).string());
}

Dataset load_dataset(const std::filesystem::path& stem) {
  const auto meta_path = dataset_meta_path(stem);
  const auto csv_path = dataset_csv_path(stem);
  std::ifstream ms(meta_path);
  if (!ms) throw IoError("cannot open " + meta_path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  bool volume_follows = false;
  while (std::getline(ms, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "volume:") {
      volume_follows = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(meta_path.string(), lineno, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!volume_follows) throw ParseError(meta_path.string(), lineno, "missing 'volume:' section");
  PointVolume volume = read_volume(ms, meta_path.string() + " (volume section)");

  auto number = [&](const std::string& key) {
    auto it = kv.find(key);
    double x = 0.0;
    if (it == kv.end() || !parse_double(it->second, x)) {
      throw ParseError(meta_path.string(), 0, "missing or malformed key '" + key + "'");
    }
    return x;
  };
  const auto count = static_cast<std::size_t>(number("count"));
  const int width = static_cast<int>(number("width"));
  RasterSettings raster{width, number("splat_sigma"), number("domain_radius")};
  const double noise_sigma = number("noise_sigma");
  const double val_fraction = number("val_fraction");
  std::uint64_t seed = 0;
  {
    auto it = kv.find("seed");
    if (it == kv.end()) throw ParseError(meta_path.string(), 0, "missing key 'seed'");
    std::istringstream ss(it->second);
    if (!(ss >> seed)) throw ParseError(meta_path.string(), 0, "malformed seed");
  }

  std::ifstream cs(csv_path);
  if (!cs) throw IoError("cannot open " + csv_path.string());
  lineno = 0;
  if (!std::getline(cs, line)) throw ParseError(csv_path.string(), 1, "missing header");
  ++lineno;
  {
    std::string expected = "theta";
    for (int j = 0; j < width; ++j) expected += ",x" + std::to_string(j);
    if (line != expected) throw ParseError(csv_path.string(), lineno, "unexpected header");
  }
  std::vector<PoseSample> samples;
  samples.reserve(count);
  while (std::getline(cs, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto token = std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                         : comma - start);
      double x = 0.0;
      if (!parse_double(token, x)) {
        throw ParseError(csv_path.string(), lineno, "bad number '" + std::string(token) + "'");
      }
      fields.push_back(x);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != static_cast<std::size_t>(width) + 1) {
      throw ParseError(csv_path.string(), lineno,
                       "expected " + std::to_string(width + 1) + " fields, found " + std::to_string(fields.size()));
    }
    try {
      samples.push_back({fields[0], Image1D(std::vector<double>(fields.begin() + 1, fields.end()),
                                            raster.domain_radius)});
    } catch (const InvalidArgument& e) {
      throw ParseError(csv_path.string(), lineno, e.what());
    }
  }
  if (samples.size() != count) {
    throw ParseError(csv_path.string(), lineno + 1,
                     "expected " + std::to_string(count) + " samples, found " + std::to_string(samples.size()));
  }
  Dataset d{std::move(volume), std::move(samples), raster, noise_sigma, seed, val_fraction, {}};
  d.split = make_split(d.samples.size(), val_fraction);
  return d;
}

double ks_uniform_statistic(std::vector<double> thetas) {
  if (thetas.empty()) throw InsufficientData("KS statistic needs at least one angle");
  std::sort(thetas.begin(), thetas.end());
  const double n = static_cast<double>(thetas.size());
  double d = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double f = canonical_angle(thetas[i]) / kTwoPi;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace orbitpose
