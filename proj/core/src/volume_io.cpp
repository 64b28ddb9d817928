#include "orbitpose/volume_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "orbitpose/errors.hpp"

namespace orbitpose {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void write_volume(std::ostream& os, const PointVolume& v) {
  os << "dim=" << v.dim() << " radius=" << format_double(v.domain_radius()) << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v.points()[i];
    for (int k = 0; k < v.dim(); ++k) os << format_double(p(k)) << ' ';
    os << format_double(v.masses()[i]) << '\n';
  }
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool is_skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace

PointVolume read_volume(std::istream& is, const std::string& source_name) {
  std::string line;
  std::size_t lineno = 0;
  int dim = 0;
  double radius = 0.0;
  bool have_header = false;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> masses;

  while (std::getline(is, line)) {
    ++lineno;
    if (is_skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (!have_header) {
      if (tokens.size() != 2 || tokens[0].rfind("dim=", 0) != 0 || tokens[1].rfind("radius=", 0) != 0) {
        throw ParseError(source_name, lineno, "expected header 'dim=<d> radius=<r>'");
      }
      double d = 0.0;
      if (!parse_double(std::string_view(tokens[0]).substr(4), d) || d < 2 || d != static_cast<int>(d)) {
        throw ParseError(source_name, lineno, "dimension must be an integer >= 2");
      }
      dim = static_cast<int>(d);
      if (!parse_double(std::string_view(tokens[1]).substr(7), radius) || !(radius > 0.0)) {
        throw ParseError(source_name, lineno, "radius must be a positive number");
      }
      have_header = true;
      continue;
    }
    if (tokens.size() != static_cast<std::size_t>(dim + 1)) {
      throw ParseError(source_name, lineno,
                       "expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(tokens.size()));
    }
    Eigen::VectorXd p(dim);
    for (int k = 0; k < dim; ++k) {
      double x = 0.0;
      if (!parse_double(tokens[static_cast<std::size_t>(k)], x)) {
        throw ParseError(source_name, lineno, "bad coordinate '" + tokens[static_cast<std::size_t>(k)] + "'");
      }
      p(k) = x;
    }
    double m = 0.0;
    if (!parse_double(tokens.back(), m)) {
      throw ParseError(source_name, lineno, "bad mass '" + tokens.back() + "'");
    }
    points.push_back(std::move(p));
    masses.push_back(m);
  }
  if (!have_header) throw ParseError(source_name, lineno, "missing header line");
  if (points.empty()) throw ParseError(source_name, lineno, "volume has no points");
  try {
    return PointVolume(dim, std::move(points), std::move(masses), radius);
  } catch (const Error& e) {
    throw ParseError(source_name, 0, e.what());
  }
}

void save_volume(const std::filesystem::path& path, const PointVolume& v) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_volume(os, v);
  if (!os) throw IoError("failed writing " + path.string());
}

PointVolume load_volume(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_volume(is, path.string());
}

}  // namespace orbitpose
