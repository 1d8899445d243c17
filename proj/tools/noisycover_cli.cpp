#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "noisycover/app.hpp"

using namespace noisycover;

int main(int argc, char** argv) {
  CLI::App cli{"Covering-number generalization bounds for noisy networks"};
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mnist;
  std::optional<std::string> checkpoint;
  cli.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cli.add_option("--out", out, "Output directory");
  cli.add_option("--seed", seed, "Seed for initialization, splits and noise");
  cli.add_option("--mnist", mnist, "Directory with the four MNIST IDX files");
  cli.add_option("--checkpoint", checkpoint, "NCAP checkpoint for eval, bounds and nvac");

  auto* train = cli.add_subcommand("train", "Train a network, write checkpoint and metrics");
  auto* eval = cli.add_subcommand("eval", "Evaluate a checkpoint on every split");
  auto* bounds = cli.add_subcommand("bounds", "ln cover numbers for each method");
  auto* nvac = cli.add_subcommand("nvac", "Non-vacuity sample size for each method");
  auto* sweep = cli.add_subcommand("sweep", "Depth, width and sigma figure datasets");
  auto* verify = cli.add_subcommand("verify", "Randomized checks of the analytic inequalities");
  VerifyOptions vopt;
  verify->add_option("--trials", vopt.trials, "Trials per check")->check(CLI::PositiveNumber);
  verify->add_option("--verify-seed", vopt.seed, "Seed for the checks");
  verify->add_flag("--inject-faulty-tv-bound", vopt.inject_faulty_tv_bound,
                   "Test hook: shrink the TV bound so the suite must fail");

  CLI11_PARSE(cli, argc, argv);

  try {
    app::RunConfig c = config_path.empty() ? app::parse_run_config(nlohmann::json::object())
                                           : app::load_run_config(config_path);
    if (out) c.out_dir = *out;
    if (seed) {
      c.seed = *seed;
      c.train.seed = *seed;
    }
    if (mnist) c.mnist_dir = *mnist;
    if (checkpoint) c.checkpoint = *checkpoint;

    if (*train) return app::cmd_train(c);
    if (*eval) return app::cmd_eval(c);
    if (*bounds) return app::cmd_bounds(c);
    if (*nvac) return app::cmd_nvac(c);
    if (*sweep) return app::cmd_sweep(c);
    if (*verify) return app::cmd_verify(c, vopt);
  } catch (const app::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
