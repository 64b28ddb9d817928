#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

/// `%.17g`: enough digits for an exact double round-trip.
std::string format_double(double value);

/// Strict decimal parse; the whole token must be consumed.
bool parse_double(std::string_view token, double& out);

/// Text format:
///   dim=<d> radius=<r>
///   x_1 ... x_d mass        (one line per point)
/// Blank lines and lines starting with '#' are ignored on read.
void write_volume(std::ostream& os, const PointVolume& v);
PointVolume read_volume(std::istream& is, const std::string& source_name = "<volume>");

void save_volume(const std::filesystem::path& path, const PointVolume& v);
PointVolume load_volume(const std::filesystem::path& path);

}  // namespace orbitpose
