#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace noisycover {

struct Dataset;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Layer widths and the two scalars that define the noisy ramp-loss class.
struct NetworkArch {
  int input_dim = 0;
  std::vector<int> widths;  // p_1..p_T; the last one is the class count
  double sigma = 0.0;       // noise standard deviation
  double gamma = 0.1;       // ramp margin

  int depth() const { return static_cast<int>(widths.size()); }
  int num_classes() const { return widths.back(); }
  /// p_0 = input_dim, p_i = widths[i-1].
  int layer_dim(int i) const { return i == 0 ? input_dim : widths.at(i - 1); }

  /// Throws std::invalid_argument on T < 1, zero dims, gamma <= 0, sigma < 0.
  void validate() const;
};

/// W_1..W_T with W_i of shape p_{i-1} x p_i. Column j of W_i holds the
/// incoming weights of neuron j in layer i. No biases.
struct ParamSet {
  std::vector<Matrix> weights;

  int depth() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().rows()); }
  int output_dim() const { return static_cast<int>(weights.back().cols()); }

  /// Throws std::invalid_argument when shapes disagree with arch or any
  /// entry is non-finite.
  void check_against(const NetworkArch& arch) const;
  bool operator==(const ParamSet& other) const;
};

struct TrainConfig {
  double learning_rate = 0.3;
  double momentum = 0.9;
  int epochs = 50;
  int batch_size = 16;
  std::uint64_t seed = 1;
  int mc_samples_eval = 50;
  bool noise_during_training = true;
  /// Stop early once the running train 0-1 error of an epoch is at or below
  /// this value. Negative disables early stopping.
  double target_train_error = 0.005;

  void validate() const;
};

struct LossReport {
  double ramp_loss = 0.0;
  double zero_one_loss = 0.0;
  std::int64_t sample_count = 0;
};

struct EvalMode {
  enum class Kind { kDeterministic, kExpected };
  Kind kind = Kind::kDeterministic;
  int n_samples = 1;

  static EvalMode deterministic() { return {}; }
  static EvalMode expected(int n) { return {Kind::kExpected, n}; }
};

/// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], filled row-major per layer.
ParamSet init_params(const NetworkArch& arch, std::uint64_t seed);

/// Shifted sigmoid 1/(1+e^{-x}) - 1/2, evaluated as tanh(x/2)/2.
inline double activation(double x) { return 0.5 * std::tanh(0.5 * x); }

/// Derivative of activation expressed through its output a = activation(x).
inline double activation_grad_from_output(double a) { return 0.25 - a * a; }

Vector forward_deterministic(const ParamSet& params, std::span<const double> x);

/// Adds N(0, sigma^2) after every layer's activation, output layer included.
/// Draws p_1 + ... + p_T normals from a fresh std::normal_distribution in
/// layer order, so consumption of rng is fixed per call.
Vector forward_noisy(const ParamSet& params, std::span<const double> x,
                     double sigma, Rng& rng);

/// Mean of n_samples independent forward_noisy calls.
Vector expected_output(const ParamSet& params, std::span<const double> x,
                       double sigma, int n_samples, Rng& rng);

/// u[y] - max_{j != y} u[j].
double margin(std::span<const double> u, int y);

/// 0 for x <= -gamma, 1 + x/gamma on [-gamma, 0], 1 for x > 0.
double ramp(double x, double gamma);

/// 1{argmax u != y}, argmax ties resolved toward the lowest index.
int zero_one_loss(std::span<const double> u, int y);

int argmax_lowest(std::span<const double> u);

/// Stream for one example: every Monte-Carlo draw for example `index` comes
/// from this generator, so results do not depend on evaluation order.
Rng example_stream(std::uint64_t seed, std::uint64_t index);

/// Mean ramp loss r_gamma(-M(h(x), y)) and 0-1 loss over the dataset.
/// Expected mode averages forward_noisy outputs drawn from
/// example_stream(seed, i).
LossReport evaluate(const ParamSet& params, const Dataset& data, double gamma,
                    EvalMode mode, double sigma, std::uint64_t seed);

/// Per-epoch record of a training run.
struct EpochStats {
  int epoch = 0;
  double mean_cross_entropy = 0.0;
  double running_zero_one = 0.0;  // on the noisy training forward passes
};

struct TrainResult {
  ParamSet params;
  std::vector<EpochStats> history;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Momentum SGD (v <- mu v - eta grad; W <- W + v) on softmax cross-entropy
/// of the noisy forward output. One noise realization per example per pass;
/// the noise is an additive constant for backprop.
TrainResult train_sgd(ParamSet params, const Dataset& data,
                      const TrainConfig& config, double sigma);

/// Mean softmax cross-entropy on deterministic outputs and its exact gradient
/// (used to check backprop against finite differences).
double cross_entropy(const ParamSet& params, const Dataset& data);
std::vector<Matrix> cross_entropy_gradient(const ParamSet& params,
                                           const Dataset& data);

}  // namespace noisycover
