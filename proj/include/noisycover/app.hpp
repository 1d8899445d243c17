#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisycover/bounds.hpp"
#include "noisycover/dataio.hpp"
#include "noisycover/genbound.hpp"
#include "noisycover/mlp.hpp"
#include "noisycover/verify.hpp"

namespace noisycover::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepMode { kAssumed, kReuse, kFresh };

struct SweepConfig {
  SweepMode mode = SweepMode::kAssumed;
  int workers = 1;
  std::vector<int> depths;           // hidden-layer counts
  std::vector<int> widths;           // hidden-layer widths
  std::vector<double> log10_sigmas;  // bound-only sigma axis
  std::vector<double> loss_sigmas;   // training sigma axis
  int base_width = 250;
  int base_depth = 3;
};

struct RunConfig {
  std::string mnist_dir = "/root/data/mnist";
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  NetworkArch arch{784, {250, 250, 250, 10}, 0.05, 0.1};
  TrainConfig train;
  std::int64_t n_train = 59000;
  std::int64_t n_val = 1000;
  std::optional<std::string> checkpoint;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::optional<double> ramp_loss;    // assumed empirical ramp loss
  std::optional<double> sample_size;  // m; defaults to n_train
  std::optional<double> epsilon;      // bounds command scale
  std::optional<double> self_test_ln_n;
  SweepConfig sweep;

  double m() const { return sample_size.value_or(static_cast<double>(n_train)); }
};

/// Validates every field; unknown keys at any level throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

struct MnistSplits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

MnistSplits load_splits(const RunConfig& c);

struct TrainedModel {
  ParamSet params;
  std::vector<EpochStats> history;
  LossReport train;
  LossReport validation;
  LossReport test;
  double x_frob = 0.0;
};

/// Trains from init_params(arch, seed) and evaluates every split in
/// expected-output mode (deterministic when sigma = 0).
TrainedModel train_model(const NetworkArch& arch, const RunConfig& c, const MnistSplits& data);

/// Losses and curve as JSON.
nlohmann::json metrics_json(const NetworkArch& arch, const RunConfig& c, const TrainedModel& t);

/// Checkpoint plus metrics under dir/<tag>; reused when both exist and
/// `reuse` is set, otherwise retrained and overwritten.
TrainedModel cached_model(const NetworkArch& arch, const RunConfig& c, const MnistSplits& data,
                          const std::filesystem::path& dir, bool reuse);

std::string model_tag(const NetworkArch& arch, const RunConfig& c);

struct NvacRow {
  std::string method;
  NetworkArch arch;
  std::optional<LogReal> sigma;  // empty for sigma = 0
  double m = 0.0;
  double ramp_loss = 0.0;
  double epsilon = 0.0;
  std::optional<double> log10_nvac;
  std::string status;  // "ok", "not_converged" or "error:<kind>"
};

inline constexpr const char* kNvacHeader =
    "method,depth,width,sigma,gamma,m,ramp_loss,epsilon,log10_nvac,status";

/// One row per method. Weight-dependent methods need quant from a checkpoint
/// (has_weights); otherwise they are tagged error:needs_checkpoint. Failures
/// never abort the table.
/// An empty sigma means a noiseless network, which only the ours bound rejects.
NvacRow nvac_row(Method method, const NetworkArch& arch, const ArchQuantifiers& quant,
                 bool has_weights, double m, double ramp_loss, std::optional<LogReal> sigma);

/// Empty for sigma = 0.
std::optional<LogReal> noise_level(double sigma);
NvacRow nvac_constant_row(double ln_n, double m, double ramp_loss);

std::string format_nvac_csv(const std::vector<NvacRow>& rows);

/// "ours < lipschitz < ..." over the ok rows, ascending log10 NVAC.
std::string ordering_summary(const std::vector<NvacRow>& rows);
/// True when the ok rows appear in exactly this ascending order.
bool ordering_holds(const std::vector<NvacRow>& rows, const std::vector<Method>& expected);

/// CSV file name -> contents, always all four files.
using SweepOutputs = std::map<std::string, std::string>;

inline constexpr const char* kDepthHeader = "depth,method,log10_nvac,status";
inline constexpr const char* kWidthHeader = "width,method,log10_nvac,status";
inline constexpr const char* kSigmaHeader = "log10_sigma,method,log10_nvac,status";
inline constexpr const char* kLossHeader =
    "sigma,train_zero_one,test_zero_one,train_ramp,test_ramp,status";

/// Figure datasets. Assumed mode needs no data (data may be null) and uses
/// ramp_loss (default 0.01); reuse and fresh modes train per architecture.
SweepOutputs run_sweep(const RunConfig& c, const MnistSplits* data);

int cmd_train(const RunConfig& c);
int cmd_eval(const RunConfig& c);
int cmd_bounds(const RunConfig& c);
int cmd_nvac(const RunConfig& c);
int cmd_sweep(const RunConfig& c);
int cmd_verify(const RunConfig& c, const VerifyOptions& options);

/// Shortest round-trip decimal for CSV cells.
std::string format_number(double x);

}  // namespace noisycover::app
