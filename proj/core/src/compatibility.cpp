#include "orbitpose/compatibility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "orbitpose/errors.hpp"

namespace orbitpose {

namespace {

constexpr double kMassRelTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool masses_equal(double a, double b) {
  return std::abs(a - b) <= kMassRelTol * std::max(std::abs(a), std::abs(b));
}

// Cluster ids for masses: equal (within tolerance) masses share an id, ids
// increase with mass.
std::vector<int> mass_classes(const std::vector<double>& masses) {
  std::vector<double> reps(masses);
  std::sort(reps.begin(), reps.end());
  std::vector<double> uniq;
  for (double m : reps) {
    if (uniq.empty() || !masses_equal(uniq.back(), m)) uniq.push_back(m);
  }
  std::vector<int> ids;
  ids.reserve(masses.size());
  for (double m : masses) {
    int id = 0;
    for (std::size_t c = 0; c < uniq.size(); ++c) {
      if (masses_equal(uniq[c], m)) {
        id = static_cast<int>(c);
        break;
      }
    }
    ids.push_back(id);
  }
  return ids;
}

void require_planar(const PointVolume& v, const char* what) {
  if (v.dim() != 2) {
    throw UnsupportedDimension(std::string(what) + " supports planar (d = 2) volumes only, got d = " +
                               std::to_string(v.dim()));
  }
}

void validate(const CheckSettings& s) {
  if (s.grid_size < 8) throw InvalidArgument("grid size must be at least 8");
  if (s.width < 2) throw InvalidArgument("raster width must be at least 2");
  if (!(s.splat_sigma >= 0.0)) throw InvalidArgument("splat sigma must be nonnegative");
  if (!(s.tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
}

struct Polar {
  std::vector<double> r;
  std::vector<double> phi;
};

Polar to_polar(const PointVolume& v) {
  Polar p;
  for (const auto& x : v.points()) {
    p.r.push_back(std::hypot(x(0), x(1)));
    p.phi.push_back(std::atan2(x(1), x(0)));
  }
  return p;
}

// Projection of a planar volume at angle theta, rendered into whatever form
// the comparison path needs.
class ProjectionSignatures {
 public:
  ProjectionSignatures(const PointVolume& v, const CheckSettings& s)
      : volume_(v), raster_(s.raster_for(v)), exact_(s.splat_sigma == 0.0), classes_(mass_classes(v.masses())) {}

  struct Signature {
    std::vector<double> keyed;  // exact path: positions ordered by (class, x)
    std::vector<double> pixels;  // raster path
  };

  Signature at(double theta) const {
    Signature sig;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const auto& pts = volume_.points();
    if (exact_) {
      std::vector<std::pair<int, double>> items;
      items.reserve(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        items.emplace_back(classes_[i], c * pts[i](0) - s * pts[i](1));
      }
      std::sort(items.begin(), items.end());
      sig.keyed.reserve(items.size());
      for (const auto& it : items) sig.keyed.push_back(it.second);
    } else {
      sig.pixels = rasterize(project_at(volume_, theta), raster_).pixels();
    }
    return sig;
  }

  double distance(const Signature& a, const Signature& b) const {
    const auto& va = exact_ ? a.keyed : a.pixels;
    const auto& vb = exact_ ? b.keyed : b.pixels;
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double d = va[i] - vb[i];
      acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(va.size()));
  }

 private:
  const PointVolume& volume_;
  RasterSettings raster_;
  bool exact_;
  std::vector<int> classes_;
};

double grid_angle(int k, int n) { return kTwoPi * static_cast<double>(k) / static_cast<double>(n); }

std::vector<CoincidencePair> separated(const std::vector<CoincidencePair>& pairs, int grid_size) {
  const double guard = 2.0 * kTwoPi / static_cast<double>(grid_size);
  std::vector<CoincidencePair> out;
  for (const auto& p : pairs) {
    if (circular_distance(p.theta1, p.theta2) > guard) out.push_back(p);
  }
  return out;
}

// Levenberg-Marquardt polish of the per-permutation system
//   e_i = r_i cos(phi_i + t1) - r_s(i) cos(phi_s(i) + t2).
double polish_pair(const Polar& pol, const std::vector<int>& sigma, double& t1, double& t2, double tol) {
  const std::size_t n = sigma.size();
  auto residuals = [&](double a, double b, std::vector<double>& e) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(sigma[i]);
      e[i] = pol.r[i] * std::cos(pol.phi[i] + a) - pol.r[si] * std::cos(pol.phi[si] + b);
      worst = std::max(worst, std::abs(e[i]));
    }
    return worst;
  };
  std::vector<double> e(n), trial(n);
  double worst = residuals(t1, t2, e);
  double lambda = 1e-3;
  for (int it = 0; it < 100 && worst > tol; ++it) {
    double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0, f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(sigma[i]);
      const double j1 = -pol.r[i] * std::sin(pol.phi[i] + t1);
      const double j2 = pol.r[si] * std::sin(pol.phi[si] + t2);
      a11 += j1 * j1;
      a12 += j1 * j2;
      a22 += j2 * j2;
      g1 += j1 * e[i];
      g2 += j2 * e[i];
      f += e[i] * e[i];
    }
    bool improved = false;
    for (int tries = 0; tries < 12 && !improved; ++tries) {
      const double b11 = a11 + lambda * std::max(a11, 1e-12);
      const double b22 = a22 + lambda * std::max(a22, 1e-12);
      const double det = b11 * b22 - a12 * a12;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double d1 = -(b22 * g1 - a12 * g2) / det;
      const double d2 = -(-a12 * g1 + b11 * g2) / det;
      const double n1 = t1 + d1;
      const double n2 = t2 + d2;
      const double w = residuals(n1, n2, trial);
      double ft = 0.0;
      for (double x : trial) ft += x * x;
      if (ft < f) {
        t1 = n1;
        t2 = n2;
        e.swap(trial);
        worst = w;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!improved) break;
  }
  return worst;
}

bool is_symmetry(const PointVolume& v, const std::vector<int>& sigma, double t1, double t2) {
  const Rotation delta = Rotation::from_angle(t1 - t2);
  const double scale = std::max(1.0, v.domain_radius());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const Eigen::VectorXd moved = delta.matrix() * v.points()[i];
    if ((moved - v.points()[static_cast<std::size_t>(sigma[i])]).norm() > 1e-7 * scale) return false;
  }
  return true;
}

}  // namespace

CheckSettings CheckSettings::exact(int grid_size) {
  CheckSettings s;
  s.grid_size = grid_size;
  s.splat_sigma = 0.0;
  s.tol = 1e-6;
  return s;
}

CheckSettings CheckSettings::splatted(double domain_radius, int grid_size) {
  CheckSettings s;
  s.grid_size = grid_size;
  s.splat_sigma = 0.05 * domain_radius;
  s.tol = 1e-3;
  return s;
}

RasterSettings CheckSettings::raster_for(const PointVolume& v) const {
  return RasterSettings{width, splat_sigma, v.domain_radius()};
}

double projection_distance(const ProjectedMasses& a, const ProjectedMasses& b, const RasterSettings& raster) {
  if (a.dim != 1 || b.dim != 1) throw UnsupportedDimension("projection comparison supports 1D projections only");
  if (raster.splat_sigma > 0.0) {
    return image_distance(rasterize(a, raster), rasterize(b, raster));
  }
  if (a.positions.size() != b.positions.size() || a.positions.empty()) return kInf;
  std::vector<double> all(a.masses);
  all.insert(all.end(), b.masses.begin(), b.masses.end());
  const auto ids = mass_classes(all);
  const std::size_t n = a.positions.size();
  std::vector<std::pair<int, double>> ka, kb;
  for (std::size_t i = 0; i < n; ++i) {
    ka.emplace_back(ids[i], a.positions[i](0));
    kb.emplace_back(ids[n + i], b.positions[i](0));
  }
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ka[i].first != kb[i].first) return kInf;
    const double d = ka[i].second - kb[i].second;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

std::vector<CoincidencePair> find_coincidences(const PointVolume& v, const CheckSettings& settings) {
  require_planar(v, "find_coincidences");
  validate(settings);
  const int n = settings.grid_size;
  ProjectionSignatures sigs(v, settings);
  std::vector<ProjectionSignatures::Signature> table;
  table.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) table.push_back(sigs.at(grid_angle(k, n)));

  struct Hit {
    int a, b;
    double d;
  };
  std::vector<Hit> hits;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double d = sigs.distance(table[static_cast<std::size_t>(a)], table[static_cast<std::size_t>(b)]);
      if (d <= settings.tol) hits.push_back({a, b, d});
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.d < y.d; });
  std::vector<CoincidencePair> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back({grid_angle(h.a, n), grid_angle(h.b, n), h.d});
  return out;
}

CompatibilityVerdict check_injectivity(const PointVolume& v, const CheckSettings& settings) {
  CompatibilityVerdict verdict;
  verdict.resolution = settings.grid_size;
  verdict.coincidences = separated(find_coincidences(v, settings), settings.grid_size);
  verdict.satisfies_injectivity = verdict.coincidences.empty();
  if (*verdict.satisfies_injectivity) verdict.satisfies_star = true;
  return verdict;
}

CompatibilityVerdict check_star(const PointVolume& v, const CheckSettings& settings) {
  if (settings.probe_count < 8) throw InvalidArgument("probe count must be at least 8");
  CompatibilityVerdict verdict = check_injectivity(v, settings);
  ProjectionSignatures sigs(v, settings);
  for (const auto& pair : verdict.coincidences) {
    for (int m = 0; m < settings.probe_count; ++m) {
      const double t3 = grid_angle(m, settings.probe_count);
      const double d = sigs.distance(sigs.at(t3 + pair.theta1), sigs.at(t3 + pair.theta2));
      if (d > settings.tol) verdict.star_violations.push_back({pair, t3, d});
    }
  }
  verdict.satisfies_star = verdict.star_violations.empty();
  return verdict;
}

CompatibilityVerdict check_injectivity_algebraic(const PointVolume& v, const AlgebraicSettings& settings) {
  require_planar(v, "check_injectivity_algebraic");
  const std::size_t n = v.size();
  if (n > 8) throw TooLarge("algebraic check enumerates S_n and supports n <= 8, got n = " + std::to_string(n));
  if (settings.angular_resolution < 8) throw InvalidArgument("angular resolution must be at least 8");

  CompatibilityVerdict verdict;
  verdict.algebraic = true;
  verdict.resolution = settings.angular_resolution;

  const Polar pol = to_polar(v);
  const auto q = static_cast<std::size_t>(std::max_element(pol.r.begin(), pol.r.end()) - pol.r.begin());
  const double rmax = pol.r[q];

  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);

  if (rmax == 0.0) {
    // Every rotation fixes a volume concentrated at the origin.
    PermutationWitness w{sigma, 0.0, kPi, true, 0.0};
    verdict.all_witnesses.push_back(w);
    verdict.permutation_witness = w;
    verdict.satisfies_injectivity = false;
    return verdict;
  }

  const auto N = static_cast<std::size_t>(settings.angular_resolution);
  std::vector<double> theta1(N);
  for (std::size_t k = 0; k < N; ++k) theta1[k] = grid_angle(static_cast<int>(k), static_cast<int>(N));

  // cos(phi_i + theta1_k)
  std::vector<std::vector<double>> c1(n, std::vector<double>(N));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < N; ++k) c1[i][k] = std::cos(pol.phi[i] + theta1[k]);

  // Pivot equation for sigma(p) = q solved for theta2 on both arccos branches.
  // t2[p][b][k] is NaN where infeasible; c2[p][b][k*n + m] = cos(phi_m + t2).
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::array<std::vector<double>, 2>> t2(n);
  std::vector<std::array<std::vector<double>, 2>> c2(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (int b = 0; b < 2; ++b) {
      auto& tt = t2[p][static_cast<std::size_t>(b)];
      auto& cc = c2[p][static_cast<std::size_t>(b)];
      tt.assign(N, nan);
      cc.assign(N * n, nan);
      for (std::size_t k = 0; k < N; ++k) {
        double t = pol.r[p] * c1[p][k] / rmax;
        if (std::abs(t) > 1.0 + 1e-12) continue;
        t = std::clamp(t, -1.0, 1.0);
        const double a = std::acos(t);
        const double th = (b == 0 ? a : -a) - pol.phi[q];
        tt[k] = th;
        for (std::size_t m = 0; m < n; ++m) cc[k * n + m] = std::cos(pol.phi[m] + th);
      }
    }
  }

  // Second equation used to locate candidates along each branch: the largest
  // remaining radius.
  std::vector<std::size_t> second(n, n);
  for (std::size_t p = 0; p < n; ++p) {
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != p && pol.r[i] > best) {
        best = pol.r[i];
        second[p] = i;
      }
    }
  }

  struct Candidate {
    std::size_t k;
    int b;
  };
  // candidates[p * n + m] for sigma(second[p]) = m
  std::vector<std::optional<std::vector<Candidate>>> memo(n * n);
  auto candidates_for = [&](std::size_t p, std::size_t m) -> const std::vector<Candidate>& {
    auto& slot = memo[p * n + m];
    if (slot) return *slot;
    std::vector<Candidate> out;
    const std::size_t j = second[p];
    for (int b = 0; b < 2; ++b) {
      const auto& tt = t2[p][static_cast<std::size_t>(b)];
      const auto& cc = c2[p][static_cast<std::size_t>(b)];
      std::vector<double> g(N, kInf);
      for (std::size_t k = 0; k < N; ++k) {
        if (std::isnan(tt[k])) continue;
        g[k] = j == n ? 0.0 : std::abs(pol.r[j] * c1[j][k] - pol.r[m] * cc[k * n + m]);
      }
      for (std::size_t k = 0; k < N; ++k) {
        if (!std::isfinite(g[k])) continue;
        const double prev = g[(k + N - 1) % N];
        const double next = g[(k + 1) % N];
        if (g[k] <= prev && g[k] <= next) out.push_back({k, b});
      }
    }
    slot = std::move(out);
    return *slot;
  };

  std::vector<int> inverse(n);
  const double prefilter = 0.25 * rmax;
  do {
    bool mass_ok = true;
    for (std::size_t i = 0; i < n && mass_ok; ++i) {
      mass_ok = masses_equal(v.masses()[i], v.masses()[static_cast<std::size_t>(sigma[i])]);
    }
    if (!mass_ok) continue;
    for (std::size_t i = 0; i < n; ++i) inverse[static_cast<std::size_t>(sigma[i])] = static_cast<int>(i);
    const auto p = static_cast<std::size_t>(inverse[q]);
    const std::size_t m = second[p] == n ? 0 : static_cast<std::size_t>(sigma[second[p]]);
    const auto& cands = candidates_for(p, m);

    for (const auto& cand : cands) {
      const auto bi = static_cast<std::size_t>(cand.b);
      const auto& cc = c2[p][bi];
      double worst = 0.0;
      for (std::size_t i = 0; i < n && worst <= prefilter; ++i) {
        const auto si = static_cast<std::size_t>(sigma[i]);
        worst = std::max(worst, std::abs(pol.r[i] * c1[i][cand.k] - pol.r[si] * cc[cand.k * n + si]));
      }
      if (worst > prefilter) continue;
      double a1 = theta1[cand.k];
      double a2 = t2[p][bi][cand.k];
      if (worst <= settings.residual_tol) {
        if (circular_distance(a1, a2) <= settings.distinct_tol) continue;
      }
      const double res = polish_pair(pol, sigma, a1, a2, settings.polish_tol);
      if (res > settings.residual_tol) continue;
      a1 = canonical_angle(a1);
      a2 = canonical_angle(a2);
      if (circular_distance(a1, a2) <= settings.distinct_tol) continue;
      PermutationWitness w{sigma, a1, a2, is_symmetry(v, sigma, a1, a2), res};
      verdict.all_witnesses.push_back(std::move(w));
      break;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));

  verdict.satisfies_injectivity = verdict.all_witnesses.empty();
  if (*verdict.satisfies_injectivity) {
    verdict.satisfies_star = true;
  } else {
    auto it = std::find_if(verdict.all_witnesses.begin(), verdict.all_witnesses.end(),
                           [](const PermutationWitness& w) { return w.is_symmetry; });
    verdict.permutation_witness = it != verdict.all_witnesses.end() ? *it : verdict.all_witnesses.front();
  }
  return verdict;
}

std::vector<double> preimage_angles(const PointVolume& v, const ProjectedMasses& image, double tol) {
  require_planar(v, "preimage_angles");
  if (image.dim != 1 || image.positions.size() != v.size()) {
    throw InvalidArgument("image does not have the shape of a projection of this volume");
  }
  const Polar pol = to_polar(v);
  const auto q = static_cast<std::size_t>(std::max_element(pol.r.begin(), pol.r.end()) - pol.r.begin());
  const double rmax = pol.r[q];
  const RasterSettings exact{2, 0.0, v.domain_radius()};
  if (rmax == 0.0) {
    if (projection_distance(project(v), image, exact) <= tol) return {0.0};
    return {};
  }

  // Gauss-Newton on the sorted matching between P[R_theta V] and the image.
  auto polish = [&](double theta) {
    std::vector<std::size_t> tgt(image.positions.size());
    std::iota(tgt.begin(), tgt.end(), 0);
    std::vector<double> all(v.masses());
    all.insert(all.end(), image.masses.begin(), image.masses.end());
    const auto ids = mass_classes(all);
    const std::size_t n = v.size();
    std::sort(tgt.begin(), tgt.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(ids[n + a], image.positions[a](0)) < std::pair(ids[n + b], image.positions[b](0));
    });
    for (int it = 0; it < 8; ++it) {
      std::vector<std::size_t> src(n);
      std::iota(src.begin(), src.end(), 0);
      std::vector<double> x(n), dx(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = pol.r[i] * std::cos(pol.phi[i] + theta);
        dx[i] = -pol.r[i] * std::sin(pol.phi[i] + theta);
      }
      std::sort(src.begin(), src.end(),
                [&](std::size_t a, std::size_t b) { return std::pair(ids[a], x[a]) < std::pair(ids[b], x[b]); });
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double e = x[src[k]] - image.positions[tgt[k]](0);
        num += e * dx[src[k]];
        den += dx[src[k]] * dx[src[k]];
      }
      if (!(den > 0.0)) break;
      const double step = -num / den;
      theta += step;
      if (std::abs(step) < 1e-15) break;
    }
    return theta;
  };

  std::vector<double> found;
  for (std::size_t k = 0; k < image.positions.size(); ++k) {
    if (!masses_equal(v.masses()[q], image.masses[k])) continue;
    const double t = image.positions[k](0) / rmax;
    if (std::abs(t) > 1.0 + 1e-9) continue;
    const double a = std::acos(std::clamp(t, -1.0, 1.0));
    for (double base : {a, -a}) {
      double theta = polish(base - pol.phi[q]);
      if (projection_distance(project_at(v, theta), image, exact) <= tol) {
        found.push_back(canonical_angle(theta));
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<double> out;
  for (double t : found) {
    if (out.empty() || t - out.back() > 1e-9) out.push_back(t);
  }
  if (out.size() > 1 && kTwoPi - out.back() + out.front() <= 1e-9) out.pop_back();
  return out;
}

ProjectedMasses act_on_image(const PointVolume& v, double theta, const ProjectedMasses& image) {
  const auto pre = preimage_angles(v, image);
  if (pre.empty()) throw InvalidArgument("image is not a projection of the volume");
  return project_at(v, theta + pre.front());
}

GroupActionReport verify_group_action(const PointVolume& v, const GroupActionSettings& settings) {
  require_planar(v, "verify_group_action");
  if (settings.sample_count < 1) throw InvalidArgument("sample count must be positive");
  if (settings.enforce_precondition) {
    const auto verdict = check_star(v, settings.check);
    if (!verdict.compatible()) {
      throw IncompatibleVolume("volume violates the star condition (" +
                               std::to_string(verdict.star_violations.size()) +
                               " violations); the image action is multi-valued");
    }
  }
  const RasterSettings raster = settings.check.raster_for(v);
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);

  GroupActionReport report;
  for (int s = 0; s < settings.sample_count; ++s) {
    const double ti = angle(rng);
    const double t1 = angle(rng);
    const double t2 = angle(rng);
    const ProjectedMasses image = project_at(v, ti);
    const double id_dev = projection_distance(act_on_image(v, 0.0, image), image, raster);
    const ProjectedMasses lhs = act_on_image(v, t2, act_on_image(v, t1, image));
    const ProjectedMasses rhs = act_on_image(v, t2 + t1, image);
    const double comp_dev = projection_distance(lhs, rhs, raster);
    report.worst_identity_deviation = std::max(report.worst_identity_deviation, id_dev);
    report.worst_compatibility_deviation = std::max(report.worst_compatibility_deviation, comp_dev);
    ++report.samples;
  }
  report.worst_deviation = std::max(report.worst_identity_deviation, report.worst_compatibility_deviation);
  report.passed = report.worst_deviation <= settings.tol;
  return report;
}

PointVolume random_compatible_volume(int n, std::uint64_t seed, double domain_radius, int max_attempts,
                                     const AlgebraicSettings& settings) {
  if (n < 1) throw InvalidArgument("volume needs at least one point");
  if (n > 8) throw TooLarge("compatible-volume construction supports n <= 8");
  if (!(domain_radius > 0.0)) throw InvalidArgument("domain radius must be positive");
  if (max_attempts < 1) throw InvalidArgument("max attempts must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-domain_radius, domain_radius);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::pair<double, double>> pts;
    while (static_cast<int>(pts.size()) < n) {
      const double x = coord(rng);
      const double y = coord(rng);
      if (std::hypot(x, y) <= domain_radius) pts.emplace_back(x, y);
    }
    PointVolume candidate = PointVolume::planar(pts, std::vector<double>(static_cast<std::size_t>(n), 1.0),
                                                domain_radius);
    if (check_injectivity_algebraic(candidate, settings).satisfies_injectivity.value_or(false)) {
      return candidate;
    }
  }
  throw ConstructionFailure("no injective volume with n = " + std::to_string(n) + " found in " +
                            std::to_string(max_attempts) + " attempts");
}

}  // namespace orbitpose
