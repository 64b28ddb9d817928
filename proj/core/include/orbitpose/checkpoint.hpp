#pragma once

// Plain-text model checkpoints. Scalar keys come first in lexicographic
// order as `key=value` lines, followed by one `tensor <name> <rows> <cols>`
// header per parameter tensor and a line of its values, all numbers at 17
// significant digits.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "orbitpose/vae.hpp"

namespace orbitpose {

void write_checkpoint(std::ostream& out, const VaeModel& model);
VaeModel read_checkpoint(std::istream& in, const std::string& source_name = "<stream>");

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace orbitpose
