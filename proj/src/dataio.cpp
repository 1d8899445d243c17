#include "noisycover/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

namespace noisycover {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::string& what) {
  if (buf.size() < offset + 4) throw IdxError("truncated header in " + what);
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

Dataset Dataset::subset(std::span<const std::int64_t> idx, std::string new_name) const {
  Dataset out;
  out.images.resize(static_cast<Eigen::Index>(idx.size()), images.cols());
  out.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.images.row(static_cast<Eigen::Index>(r)) = images.row(idx[r]);
    out.labels.push_back(labels[static_cast<std::size_t>(idx[r])]);
  }
  out.num_classes = num_classes;
  out.name = std::move(new_name);
  return out;
}

Dataset Dataset::replicate(int n) const {
  if (n < 1) throw std::invalid_argument("replication count must be >= 1");
  Dataset out;
  out.images.resize(images.rows() * n, images.cols());
  for (int c = 0; c < n; ++c) out.images.middleRows(c * images.rows(), images.rows()) = images;
  for (int c = 0; c < n; ++c) out.labels.insert(out.labels.end(), labels.begin(), labels.end());
  out.num_classes = num_classes;
  out.name = name + "^" + std::to_string(n);
  return out;
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  const std::string img_name = images_path.filename().string();
  const std::string lab_name = labels_path.filename().string();

  if (read_be32(img, 0, img_name) != kImageMagic) throw IdxError("bad magic in " + img_name);
  if (read_be32(lab, 0, lab_name) != kLabelMagic) throw IdxError("bad magic in " + lab_name);
  const std::uint32_t count = read_be32(img, 4, img_name);
  const std::uint32_t rows = read_be32(img, 8, img_name);
  const std::uint32_t cols = read_be32(img, 12, img_name);
  const std::uint32_t label_count = read_be32(lab, 4, lab_name);
  if (count != label_count) {
    throw IdxError("count mismatch: " + std::to_string(count) + " images vs " +
                   std::to_string(label_count) + " labels");
  }
  if (count == 0) throw IdxError("empty IDX file " + img_name);
  const std::size_t dim = std::size_t{rows} * cols;
  if (img.size() < 16 + dim * count) throw IdxError("truncated image data in " + img_name);
  if (lab.size() < 8 + std::size_t{count}) throw IdxError("truncated label data in " + lab_name);

  Dataset data;
  data.name = img_name;
  data.images.resize(count, static_cast<Eigen::Index>(dim));
  const unsigned char* px = img.data() + 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      data.images(i, static_cast<Eigen::Index>(j)) = px[i * dim + j] / 255.0;
    }
  }
  data.labels.assign(lab.begin() + 8, lab.begin() + 8 + count);
  data.num_classes = std::max(2, *std::max_element(data.labels.begin(), data.labels.end()) + 1);
  return data;
}

void write_idx(const Dataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int rows, int cols) {
  if (static_cast<Eigen::Index>(rows) * cols != data.images.cols()) {
    throw IdxError("rows*cols does not match the dataset dimension");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IdxError("cannot open IDX output files");
  const auto count = static_cast<std::uint32_t>(data.size());
  write_be32(img, kImageMagic);
  write_be32(img, count);
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  std::vector<char> row(static_cast<std::size_t>(data.images.cols()));
  for (std::int64_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.images.cols(); ++j) {
      const double v = std::clamp(data.images(i, j), 0.0, 1.0);
      row[static_cast<std::size_t>(j)] = static_cast<char>(std::lround(v * 255.0));
    }
    img.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  write_be32(lab, kLabelMagic);
  write_be32(lab, count);
  for (int y : data.labels) lab.put(static_cast<char>(y));
}

MnistFiles load_mnist_dir(const std::filesystem::path& dir) {
  MnistFiles files;
  files.train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  files.test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  files.train.name = "mnist-train";
  files.test.name = "mnist-test";
  files.train.num_classes = files.test.num_classes =
      std::max(files.train.num_classes, files.test.num_classes);
  return files;
}

TrainValSplit split(const Dataset& data, std::int64_t n_train, std::int64_t n_val,
                    std::uint64_t seed) {
  if (n_train < 1 || n_val < 0) throw std::invalid_argument("split sizes must be positive");
  if (n_train + n_val > data.size()) {
    throw std::invalid_argument("split needs " + std::to_string(n_train + n_val) +
                                " examples but the dataset has " +
                                std::to_string(data.size()));
  }
  std::vector<std::int64_t> perm(static_cast<std::size_t>(data.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::span<const std::int64_t> all(perm);
  TrainValSplit out;
  out.train = data.subset(all.first(static_cast<std::size_t>(n_train)), data.name + "-train");
  out.validation = data.subset(all.last(static_cast<std::size_t>(n_val)), data.name + "-val");
  return out;
}

double input_frobenius(const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("input_frobenius of an empty dataset");
  return std::sqrt(data.images.squaredNorm() / static_cast<double>(data.size()));
}

}  // namespace noisycover
