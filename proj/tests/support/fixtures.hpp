#pragma once

#include <cstdint>
#include <filesystem>

#include "gresnet/data.hpp"

namespace testsupport {

/// Random dataset with byte-quantized pixels in [0,1] and labels in
/// [0, classes), matching what an IDX file pair would load to.
gresnet::Dataset make_dataset(std::size_t n, std::size_t image_rows, std::size_t image_cols,
                              int classes, std::uint64_t seed);

/// Writes a small synthetic MNIST-shaped (28x28, 10 classes) train/test pair
/// into dir under the canonical file names.
void write_mnist_dir(const std::filesystem::path& dir, std::size_t n_train, std::size_t n_test,
                     std::uint64_t seed = 7);

}  // namespace testsupport
