#include "candlenet/nnet/serialize.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace candlenet::nnet {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string layer_line(const LayerSpec& s) {
  std::string out = "layer " + std::string(to_string(s.kind));
  switch (s.kind) {
    case LayerKind::dense: out += " " + std::to_string(s.units); break;
    case LayerKind::conv: out += " " + std::to_string(s.filters) + " " + std::to_string(s.width); break;
    case LayerKind::dropout: out += " " + format_double(s.rate); break;
    default: break;
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw FormatError("model file line " + std::to_string(line) + ": " + what);
}

}  // namespace

void save_model(std::ostream& out, const Network& net, const ModelMeta& meta) {
  out << "candlenet-model " << kModelFormatVersion << '\n';
  out << "input";
  for (auto d : net.input_shape()) out << ' ' << d;
  out << '\n';
  for (const auto& s : net.specs()) out << layer_line(s) << '\n';
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ParameterError("model metadata key/value not serializable: '" + k + "'");
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  const auto params = net.parameters();
  const auto labels = net.parameter_labels();
  for (std::size_t k = 0; k < params.size(); ++k) {
    out << "param " << labels[k] << ' ' << params[k]->value.size();
    for (double v : params[k]->value.values()) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
}

void save_model(const std::string& path, const Network& net, const ModelMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path);
  save_model(out, net, meta);
  if (!out) throw DataError("failed writing model file " + path);
}

ModelFile load_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](bool required) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    if (required) malformed(lineno, "unexpected end of file");
    return false;
  };

  next(true);
  {
    std::istringstream is(line);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "candlenet-model") malformed(lineno, "not a model file");
    if (version != kModelFormatVersion) {
      throw FormatError("model format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kModelFormatVersion) + ")");
    }
  }

  Shape input;
  std::vector<LayerSpec> specs;
  ModelMeta meta;
  std::vector<std::pair<std::string, std::vector<double>>> values;
  bool ended = false;
  while (next(false)) {
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (tag == "input") {
      std::size_t d;
      while (is >> d) input.push_back(d);
    } else if (tag == "layer") {
      std::string kind;
      is >> kind;
      LayerSpec s;
      try {
        s.kind = parse_layer_kind(kind);
      } catch (const Error& e) {
        malformed(lineno, e.what());
      }
      bool ok = true;
      if (s.kind == LayerKind::dense) ok = static_cast<bool>(is >> s.units);
      if (s.kind == LayerKind::conv) ok = static_cast<bool>(is >> s.filters >> s.width);
      if (s.kind == LayerKind::dropout) ok = static_cast<bool>(is >> s.rate);
      if (!ok) malformed(lineno, "bad layer arguments");
      specs.push_back(s);
    } else if (tag == "meta") {
      std::string key, value;
      is >> key;
      std::getline(is >> std::ws, value);
      meta[key] = value;
    } else if (tag == "param") {
      std::string label;
      std::size_t count = 0;
      if (!(is >> label >> count)) malformed(lineno, "bad param header");
      std::vector<double> v(count);
      for (auto& x : v) {
        std::string tok;
        if (!(is >> tok)) malformed(lineno, "short param list for " + label);
        char* endp = nullptr;
        x = std::strtod(tok.c_str(), &endp);
        if (endp == tok.c_str() || *endp != '\0') malformed(lineno, "bad number '" + tok + "'");
      }
      values.emplace_back(label, std::move(v));
    } else if (tag == "end") {
      ended = true;
      break;
    } else {
      malformed(lineno, "unknown record '" + tag + "'");
    }
  }
  if (!ended) malformed(lineno, "missing end marker");
  if (input.empty() || specs.empty()) malformed(lineno, "missing input or layers");

  ModelFile out{Network(input, specs, 0), std::move(meta)};
  const auto params = out.network.parameters();
  const auto labels = out.network.parameter_labels();
  if (values.size() != params.size()) malformed(lineno, "parameter count does not match layers");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (values[k].first != labels[k] || values[k].second.size() != params[k]->value.size()) {
      malformed(lineno, "parameter " + values[k].first + " does not match " + labels[k]);
    }
    std::copy(values[k].second.begin(), values[k].second.end(), params[k]->value.data());
  }
  return out;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path);
  return load_model(in);
}

}  // namespace candlenet::nnet
