#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace noisycover {

struct CheckResult {
  std::string check;
  int trials = 0;
  double max_violation = 0.0;  // largest amount by which an inequality failed
  bool pass = true;
};

struct VerifyOptions {
  std::uint64_t seed = 2024;
  int trials = 1000;
  /// Test hook: replace the TV upper bound by a quarter of its value.
  bool inject_faulty_tv_bound = false;
};

/// Randomized checks of the analytic inequalities: Gaussian TV bound, DPI,
/// GMM smoothing, greedy-cover vs Lipschitz bound, cover monotonicity.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results);

/// [{check, trials, max_violation, pass}, ...]
nlohmann::json to_json(const std::vector<CheckResult>& results);

/// Empirical soundness fixture: greedy cover size of the ramp-loss class of a
/// d=2, p=(2,2) sigmoid net with incoming-weight l1 norms <= v_max, restricted
/// to `inputs` random points, next to exp(ln_cover_lipschitz).
struct ToyCoverComparison {
  double epsilon = 0.0;
  std::size_t greedy_size = 0;
  double ln_bound = 0.0;
};
std::vector<ToyCoverComparison> toy_cover_vs_lipschitz(
    std::uint64_t seed, std::span<const double> epsilons, int configs = 200,
    int inputs = 20, double v_max = 2.0, double gamma = 0.1);

}  // namespace noisycover
