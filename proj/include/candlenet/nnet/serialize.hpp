#pragma once

#include "candlenet/nnet/network.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace candlenet::nnet {

inline constexpr int kModelFormatVersion = 1;

// Free-form training metadata stored with a model (kind, seeds, config,
// data digest). Keys and values must not contain newlines; keys no spaces.
using ModelMeta = std::map<std::string, std::string>;

struct ModelFile {
  Network network;
  ModelMeta meta;
};

// Line-oriented text format:
//   candlenet-model <version>
//   input <dims...>
//   layer <kind> [args]        one per layer
//   meta <key> <value>
//   param <label> <count> <values...>
//   end
// Values are printed with 17 significant digits so a load restores the exact
// doubles.
void save_model(std::ostream& out, const Network& net, const ModelMeta& meta);
void save_model(const std::string& path, const Network& net, const ModelMeta& meta);

// Throws FormatError on a version mismatch or malformed content.
ModelFile load_model(std::istream& in);
ModelFile load_model(const std::string& path);

}  // namespace candlenet::nnet
