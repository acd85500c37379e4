#pragma once

#include <filesystem>
#include <string>

#include "gresnet/model.hpp"
#include "gresnet/optimizer.hpp"

namespace gresnet {

/// Everything a checkpoint file carries besides the raw parameter payload.
struct Checkpoint {
  Network net;
  std::string init_scheme = "he_uniform";
  std::string rng_algorithm;
  AdamNesterovConfig optimizer;
};

/// Single self-describing binary file: magic + format version + a JSON
/// header (config, init scheme, optimizer hyperparameters, node kinds,
/// active flags, array names and shapes) + every persistent array as raw
/// little-endian 64-bit reals in declaration order. Save followed by load
/// reproduces the network bitwise.
void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const AdamNesterovConfig& optimizer,
                     const std::string& init_scheme = "he_uniform");

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gresnet
