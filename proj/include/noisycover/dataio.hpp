#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace noisycover {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m examples of dimension d, pixels in [0,1], labels in [0, num_classes).
struct Dataset {
  RowMatrix images;
  std::vector<int> labels;
  int num_classes = 10;
  std::string name;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  int dim() const { return static_cast<int>(images.cols()); }
  std::span<const double> row(std::int64_t i) const {
    return {images.data() + i * images.cols(),
            static_cast<std::size_t>(images.cols())};
  }

  /// Rows listed in idx, in that order.
  Dataset subset(std::span<const std::int64_t> idx, std::string new_name) const;
  /// n back-to-back copies (S^n).
  Dataset replicate(int n) const;
};

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are divided by 255. num_classes is max label + 1, at least 2.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

/// Inverse of load_idx; pixels are written as round(255 x).
void write_idx(const Dataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int rows, int cols);

struct MnistFiles {
  Dataset train;
  Dataset test;
};

/// Loads train-images-idx3-ubyte & co. from a directory. Both splits share
/// the larger class count.
MnistFiles load_mnist_dir(const std::filesystem::path& dir);

struct TrainValSplit {
  Dataset train;
  Dataset validation;
};

/// Seeded permutation of the training file; the first n_train rows become the
/// training set and the last n_val rows the validation set.
TrainValSplit split(const Dataset& data, std::int64_t n_train,
                    std::int64_t n_val, std::uint64_t seed);

/// sqrt((1/m) sum x_ij^2), the normalized Frobenius norm of the input matrix.
double input_frobenius(const Dataset& data);

}  // namespace noisycover
