#include "support/fixtures.hpp"

#include "gresnet/rng.hpp"

namespace testsupport {

gresnet::Dataset make_dataset(std::size_t n, std::size_t image_rows, std::size_t image_cols,
                              int classes, std::uint64_t seed) {
  gresnet::Rng rng(seed);
  gresnet::Dataset ds;
  ds.image_rows = image_rows;
  ds.image_cols = image_cols;
  ds.images = gresnet::Matrix(n, image_rows * image_cols);
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    ds.images.data()[i] = static_cast<double>(rng.below(256)) / 255.0;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ds.labels[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return ds;
}

void write_mnist_dir(const std::filesystem::path& dir, std::size_t n_train, std::size_t n_test,
                     std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const gresnet::Dataset train = make_dataset(n_train, 28, 28, 10, seed);
  const gresnet::Dataset test = make_dataset(n_test, 28, 28, 10, seed + 1);
  save_idx(train, dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  save_idx(test, dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
}

}  // namespace testsupport
