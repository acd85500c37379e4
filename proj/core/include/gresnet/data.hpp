#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gresnet/matrix.hpp"
#include "gresnet/rng.hpp"

namespace gresnet {

/// An image-classification split: one flattened image per row, pixels scaled
/// to [0, 1], labels as class indices.
struct Dataset {
  Matrix images{0, 0};  // n x (image_rows * image_cols)
  std::vector<int> labels;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;
  std::string split;  // "train", "test" or empty for ad-hoc files

  std::size_t size() const { return labels.size(); }
};

/// Reads an IDX image file (magic 0x00000803) and its label file (magic
/// 0x00000801), big-endian headers, one byte per pixel/label. Pixels are
/// divided by 255. Throws on a wrong magic, a truncated file, or an
/// image/label count mismatch.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

/// Writes the dataset back out in IDX format. Loading a file pair and saving
/// it again reproduces the original bytes exactly.
void save_idx(const Dataset& ds, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

struct MnistSplits {
  Dataset train;
  Dataset test;
};

/// Loads the four canonical MNIST files from dir by their standard names
/// (train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
/// t10k-labels-idx1-ubyte).
MnistSplits load_mnist_split(const std::filesystem::path& dir);

/// One epoch's batches: a fixed (optionally rng-shuffled) permutation of the
/// dataset cut into batch_size pieces, final partial batch included. Every
/// sample appears exactly once per epoch.
class BatchSequence {
 public:
  BatchSequence(const Dataset& ds, std::size_t batch_size, Rng& rng, bool shuffle);

  std::size_t batch_count() const;
  std::size_t batch_size(std::size_t i) const;

  /// Materializes batch i as (images, labels).
  std::pair<Matrix, std::vector<int>> batch(std::size_t i) const;

  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
};

}  // namespace gresnet
