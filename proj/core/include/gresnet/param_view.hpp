#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gresnet {

/// Gate scalars get their own decay channel, so the optimizer needs to tell
/// them apart from ordinary tensors.
enum class ParamKind { tensor, gate };

/// Non-owning view of one learnable (or state) array inside a Network.
struct ParamView {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
  std::vector<std::size_t> shape;
  ParamKind kind = ParamKind::tensor;
};

/// Non-owning view of a gradient array, aligned index-for-index with the
/// ParamView list it was derived against.
struct GradView {
  const double* data = nullptr;
  std::size_t size = 0;
};

}  // namespace gresnet
