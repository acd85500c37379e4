#include "gresnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gresnet {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::filesystem::path& path,
                          const char* what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw std::runtime_error(path.string() + ": truncated while reading " + what);
  return (std::uint32_t{buf[0]} << 24) | (std::uint32_t{buf[1]} << 16) |
         (std::uint32_t{buf[2]} << 8) | std::uint32_t{buf[3]};
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void expect_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s: bad magic 0x%08x, expected 0x%08x",
                  path.string().c_str(), got, want);
    throw std::runtime_error(buf);
  }
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t count,
                                        const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(count);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count)))
    throw std::runtime_error(path.string() + ": truncated payload, expected " +
                             std::to_string(count) + " bytes");
  return bytes;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  std::ifstream img = open_input(images_path);
  expect_magic(read_u32_be(img, images_path, "magic"), kImagesMagic, images_path);
  const std::uint32_t n_images = read_u32_be(img, images_path, "image count");
  const std::uint32_t rows = read_u32_be(img, images_path, "row count");
  const std::uint32_t cols = read_u32_be(img, images_path, "column count");
  if (rows == 0 || cols == 0)
    throw std::runtime_error(images_path.string() + ": zero image dimensions");

  std::ifstream lab = open_input(labels_path);
  expect_magic(read_u32_be(lab, labels_path, "magic"), kLabelsMagic, labels_path);
  const std::uint32_t n_labels = read_u32_be(lab, labels_path, "label count");
  if (n_images != n_labels)
    throw std::runtime_error("image/label count mismatch: " + std::to_string(n_images) +
                             " images in " + images_path.string() + " vs " +
                             std::to_string(n_labels) + " labels in " + labels_path.string());

  const std::size_t pixels = std::size_t{rows} * cols;
  const auto image_bytes = read_payload(img, std::size_t{n_images} * pixels, images_path);
  const auto label_bytes = read_payload(lab, n_labels, labels_path);

  Dataset ds;
  ds.image_rows = rows;
  ds.image_cols = cols;
  ds.images = Matrix(n_images, pixels);
  double* out = ds.images.data();
  for (std::size_t i = 0; i < image_bytes.size(); ++i)
    out[i] = static_cast<double>(image_bytes[i]) / 255.0;
  ds.labels.assign(label_bytes.begin(), label_bytes.end());
  return ds;
}

void save_idx(const Dataset& ds, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
  if (ds.images.rows() != ds.labels.size())
    throw std::invalid_argument("save_idx: image/label count mismatch");
  if (ds.image_rows * ds.image_cols != ds.images.cols())
    throw std::invalid_argument("save_idx: image dimensions do not match matrix width");

  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot write " + images_path.string());
  write_u32_be(img, kImagesMagic);
  write_u32_be(img, static_cast<std::uint32_t>(ds.images.rows()));
  write_u32_be(img, static_cast<std::uint32_t>(ds.image_rows));
  write_u32_be(img, static_cast<std::uint32_t>(ds.image_cols));
  std::vector<unsigned char> bytes(ds.images.size());
  const double* px = ds.images.data();
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(px[i] * 255.0));
  img.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!img) throw std::runtime_error("write failed for " + images_path.string());

  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot write " + labels_path.string());
  write_u32_be(lab, kLabelsMagic);
  write_u32_be(lab, static_cast<std::uint32_t>(ds.labels.size()));
  std::vector<unsigned char> lbytes(ds.labels.size());
  for (std::size_t i = 0; i < lbytes.size(); ++i)
    lbytes[i] = static_cast<unsigned char>(ds.labels[i]);
  lab.write(reinterpret_cast<const char*>(lbytes.data()),
            static_cast<std::streamsize>(lbytes.size()));
  if (!lab) throw std::runtime_error("write failed for " + labels_path.string());
}

MnistSplits load_mnist_split(const std::filesystem::path& dir) {
  MnistSplits s;
  s.train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  s.train.split = "train";
  s.test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  s.test.split = "test";
  return s;
}

BatchSequence::BatchSequence(const Dataset& ds, std::size_t batch_size, Rng& rng, bool shuffle)
    : ds_(&ds), batch_size_(batch_size) {
  if (ds.size() == 0) throw std::invalid_argument("BatchSequence: empty dataset");
  if (batch_size == 0) throw std::invalid_argument("BatchSequence: batch_size must be positive");
  order_.resize(ds.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (shuffle) rng.shuffle(order_);
}

std::size_t BatchSequence::batch_count() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::size_t BatchSequence::batch_size(std::size_t i) const {
  if (i >= batch_count()) throw std::out_of_range("BatchSequence: batch index out of range");
  return std::min(batch_size_, order_.size() - i * batch_size_);
}

std::pair<Matrix, std::vector<int>> BatchSequence::batch(std::size_t i) const {
  const std::size_t n = batch_size(i);
  const std::size_t start = i * batch_size_;
  Matrix images(n, ds_->images.cols());
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order_[start + r];
    std::copy_n(ds_->images.row(src), ds_->images.cols(), images.row(r));
    labels[r] = ds_->labels[src];
  }
  return {std::move(images), std::move(labels)};
}

}  // namespace gresnet
