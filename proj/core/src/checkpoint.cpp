#include "orbitpose/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "orbitpose/errors.hpp"
#include "orbitpose/volume_io.hpp"

namespace orbitpose {

namespace {

constexpr const char* kFormat = "orbitpose-vae-1";

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s.empty() ? "-" : s;
}

std::vector<std::pair<std::string, ad::Var>> named_tensors(const VaeModel& m) {
  std::vector<std::pair<std::string, ad::Var>> out;
  out.emplace_back("content", m.content);
  const auto dec = m.decoder.parameters();
  for (std::size_t i = 0; i < dec.size(); ++i) {
    out.emplace_back("decoder." + std::to_string(i / 2) + (i % 2 ? ".bias" : ".weight"), dec[i]);
  }
  const auto enc = m.encoder.parameters();
  for (std::size_t i = 0; i < enc.size(); ++i) {
    out.emplace_back("encoder." + std::to_string(i / 2) + (i % 2 ? ".bias" : ".weight"), enc[i]);
  }
  return out;
}

}  // namespace

void write_checkpoint(std::ostream& out, const VaeModel& m) {
  std::map<std::string, std::string> keys;
  keys["batch_size"] = std::to_string(m.hyper.batch_size);
  keys["beta"] = format_double(m.hyper.beta);
  keys["decoder_hidden"] = join_ints(m.hyper.decoder_hidden);
  keys["encoder_hidden"] = join_ints(m.hyper.encoder_hidden);
  keys["epochs"] = std::to_string(m.hyper.epochs);
  keys["format"] = kFormat;
  keys["k"] = std::to_string(m.hyper.k);
  keys["lr"] = format_double(m.hyper.lr);
  keys["model_seed"] = std::to_string(m.seed);
  keys["restarts"] = std::to_string(m.hyper.restarts);
  keys["seed"] = std::to_string(m.hyper.seed);
  keys["width"] = std::to_string(m.width);
  for (const auto& [k, v] : keys) out << k << '=' << v << '\n';
  for (const auto& [name, var] : named_tensors(m)) {
    const auto& t = var->value;
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out << ' ';
      out << format_double(t[i]);
    }
    out << '\n';
  }
}

VaeModel read_checkpoint(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> keys;
  std::map<std::string, std::pair<ad::Tensor, std::size_t>> tensors;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream hs(line.substr(7));
      std::string name;
      int rows = -1;
      int cols = -1;
      if (!(hs >> name >> rows >> cols) || rows < 0 || cols < 0) {
        throw ParseError(source, lineno, "malformed tensor header");
      }
      const std::size_t header_line = lineno;
      if (!std::getline(in, line)) throw ParseError(source, lineno, "missing values for tensor " + name);
      ++lineno;
      std::istringstream vs(line);
      std::vector<double> values;
      std::string tok;
      while (vs >> tok) {
        double x = 0.0;
        if (!parse_double(tok, x)) throw ParseError(source, lineno, "bad number '" + tok + "'");
        values.push_back(x);
      }
      if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ParseError(source, lineno,
                         "tensor " + name + " expects " + std::to_string(rows * cols) + " values, got " +
                             std::to_string(values.size()));
      }
      tensors[name] = {ad::Tensor(rows, cols, std::move(values)), header_line};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected key=value");
    keys[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto get = [&](const std::string& k) -> const std::string& {
    auto it = keys.find(k);
    if (it == keys.end()) throw ParseError(source, 0, "missing key '" + k + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& k) {
    try {
      return std::stoi(get(k));
    } catch (const std::logic_error&) {
      throw ParseError(source, 0, "key '" + k + "' is not an integer");
    }
  };
  auto get_u64 = [&](const std::string& k) {
    try {
      return static_cast<std::uint64_t>(std::stoull(get(k)));
    } catch (const std::logic_error&) {
      throw ParseError(source, 0, "key '" + k + "' is not an unsigned integer");
    }
  };
  auto get_double = [&](const std::string& k) {
    double x = 0.0;
    if (!parse_double(get(k), x)) throw ParseError(source, 0, "key '" + k + "' is not a number");
    return x;
  };
  auto get_ints = [&](const std::string& k) {
    std::vector<int> out;
    const std::string& v = get(k);
    if (v == "-") return out;
    std::istringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::logic_error&) {
        throw ParseError(source, 0, "key '" + k + "' has a bad entry");
      }
    }
    return out;
  };

  if (get("format") != kFormat) throw ParseError(source, 0, "unknown checkpoint format '" + get("format") + "'");
  VaeHyperparams h;
  h.batch_size = get_int("batch_size");
  h.beta = get_double("beta");
  h.decoder_hidden = get_ints("decoder_hidden");
  h.encoder_hidden = get_ints("encoder_hidden");
  h.epochs = get_int("epochs");
  h.k = get_int("k");
  h.lr = get_double("lr");
  h.restarts = get_int("restarts");
  h.seed = get_u64("seed");

  VaeModel m = make_model(get_int("width"), h, get_u64("model_seed"));
  for (const auto& [name, var] : named_tensors(m)) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ParseError(source, 0, "missing tensor '" + name + "'");
    if (!it->second.first.same_shape(var->value)) {
      throw ParseError(source, it->second.second,
                       "tensor " + name + " has shape " + it->second.first.shape_string() + ", expected " +
                           var->value.shape_string());
    }
    var->value = it->second.first;
    tensors.erase(it);
  }
  if (!tensors.empty()) {
    throw ParseError(source, tensors.begin()->second.second, "unexpected tensor '" + tensors.begin()->first + "'");
  }
  return m;
}

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

VaeModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace orbitpose
