#pragma once

#include <vector>

namespace orbitpose {

/// atan2 of the mean unit vector, in (-pi, pi]. Zero for an empty input or a
/// vanishing resultant.
double circular_mean(const std::vector<double>& angles);

/// Length of the mean unit vector, in [0, 1].
double mean_resultant_length(const std::vector<double>& angles);

/// Circular correlation coefficient of two paired angle samples
/// (sum sin(a - mean a) sin(b - mean b), normalized). Zero when either
/// sample has no spread.
double circular_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// Fractional ranks (1-based, ties receive their average rank).
std::vector<double> ranks(const std::vector<double>& x);

/// Spearman rank correlation. Zero when either sample is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> x);

}  // namespace orbitpose
