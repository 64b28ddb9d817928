#include "orbitpose/circular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orbitpose/errors.hpp"

namespace orbitpose {

double circular_mean(const std::vector<double>& angles) {
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  if (std::hypot(s, c) <= 1e-12 * static_cast<double>(angles.size())) return 0.0;
  return std::atan2(s, c);
}

double mean_resultant_length(const std::vector<double>& angles) {
  if (angles.empty()) return 0.0;
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::min(1.0, std::hypot(s, c) / static_cast<double>(angles.size()));
}

double circular_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("circular_correlation: samples differ in length");
  const double ma = circular_mean(a);
  const double mb = circular_mean(b);
  double num = 0.0;
  double da = 0.0;
  double db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double sa = std::sin(a[i] - ma);
    const double sb = std::sin(b[i] - mb);
    num += sa * sb;
    da += sa * sa;
    db += sb * sb;
  }
  const double floor = 1e-24 * static_cast<double>(a.size());
  if (da <= floor || db <= floor) return 0.0;
  return num / std::sqrt(da * db);
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: samples differ in length");
  if (x.size() < 2) throw InsufficientData("spearman needs at least 2 pairs");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double num = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mean) * (ry[i] - mean);
    dx += (rx[i] - mean) * (rx[i] - mean);
    dy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

double median(std::vector<double> x) {
  if (x.empty()) throw InsufficientData("median of an empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<long>(mid), x.end());
  const double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  const double lo = *std::max_element(x.begin(), x.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace orbitpose
