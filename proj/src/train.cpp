#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisycover/dataio.hpp"
#include "noisycover/mlp.hpp"

namespace noisycover {

namespace {

struct BatchPass {
  double loss_sum = 0.0;
  int errors = 0;
  std::vector<Matrix> grads;  // gradient of the mean loss over the batch
};

/// Forward + backward over a batch. When `noise` is non-null, N(0, sigma^2)
/// from it is added after every activation and treated as a constant.
BatchPass backprop(const ParamSet& params, const RowMatrix& x,
                   std::span<const int> labels, double sigma,
                   std::normal_distribution<double>* noise, Rng* rng) {
  const int depth = params.depth();
  const auto rows = x.rows();
  std::vector<Matrix> inputs(depth);   // layer input (noisy activations)
  std::vector<Matrix> clean(depth);    // clean activations, for phi'
  Matrix a = x;
  for (int l = 0; l < depth; ++l) {
    inputs[l] = std::move(a);
    Matrix act = (inputs[l] * params.weights[l]).unaryExpr(
        [](double v) { return activation(v); });
    a = act;
    if (noise != nullptr && sigma > 0.0) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) += (*noise)(*rng);
      }
    }
    clean[l] = std::move(act);
  }

  BatchPass pass;
  const auto k = a.cols();
  Matrix delta(rows, k);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double top = a.row(r).maxCoeff();
    Eigen::RowVectorXd e = (a.row(r).array() - top).exp().matrix();
    const double z = e.sum();
    const int y = labels[r];
    pass.loss_sum += -(a(r, y) - top - std::log(z));
    delta.row(r) = e / z;
    delta(r, y) -= 1.0;
    int best = 0;
    for (Eigen::Index j = 1; j < k; ++j) {
      if (a(r, j) > a(r, best)) best = static_cast<int>(j);
    }
    pass.errors += best != y ? 1 : 0;
  }
  delta /= static_cast<double>(rows);

  pass.grads.resize(depth);
  for (int l = depth - 1; l >= 0; --l) {
    delta.array() *= clean[l].unaryExpr([](double v) {
      return activation_grad_from_output(v);
    }).array();
    pass.grads[l] = inputs[l].transpose() * delta;
    if (l > 0) delta = delta * params.weights[l].transpose();
  }
  return pass;
}

}  // namespace

TrainResult train_sgd(ParamSet params, const Dataset& data, const TrainConfig& config,
                      double sigma) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("cannot train on an empty dataset");
  if (data.dim() != params.input_dim()) {
    throw std::invalid_argument("dataset dimension does not match the network input");
  }
  for (int y : data.labels) {
    if (y < 0 || y >= params.output_dim()) throw std::out_of_range("label out of range");
  }

  TrainResult result;
  Rng rng(config.seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  const bool noisy = config.noise_during_training && sigma > 0.0;

  std::vector<Matrix> velocity;
  for (const Matrix& w : params.weights) velocity.push_back(Matrix::Zero(w.rows(), w.cols()));

  std::vector<std::int64_t> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  RowMatrix xb;
  std::vector<int> yb;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::int64_t errors = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const auto rows = static_cast<Eigen::Index>(stop - start);
      xb.resize(rows, data.dim());
      yb.resize(static_cast<std::size_t>(rows));
      for (Eigen::Index r = 0; r < rows; ++r) {
        const std::int64_t i = order[start + r];
        xb.row(r) = data.images.row(i);
        yb[r] = data.labels[i];
      }
      BatchPass pass = backprop(params, xb, yb, sigma, noisy ? &noise : nullptr, &rng);
      if (!std::isfinite(pass.loss_sum)) {
        throw DivergenceError("training diverged: non-finite loss in epoch " +
                              std::to_string(epoch));
      }
      loss_sum += pass.loss_sum;
      errors += pass.errors;
      for (int l = 0; l < params.depth(); ++l) {
        velocity[l] = config.momentum * velocity[l] - config.learning_rate * pass.grads[l];
        params.weights[l] += velocity[l];
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_cross_entropy = loss_sum / static_cast<double>(data.size());
    stats.running_zero_one = static_cast<double>(errors) / static_cast<double>(data.size());
    result.history.push_back(stats);
    if (config.target_train_error >= 0.0 &&
        stats.running_zero_one <= config.target_train_error) {
      break;
    }
  }
  result.params = std::move(params);
  return result;
}

double cross_entropy(const ParamSet& params, const Dataset& data) {
  const BatchPass pass = backprop(params, data.images, data.labels, 0.0, nullptr, nullptr);
  return pass.loss_sum / static_cast<double>(data.size());
}

std::vector<Matrix> cross_entropy_gradient(const ParamSet& params, const Dataset& data) {
  return backprop(params, data.images, data.labels, 0.0, nullptr, nullptr).grads;
}

}  // namespace noisycover
