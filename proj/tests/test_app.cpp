#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "noisycover/app.hpp"
#include "noisycover/checkpoint.hpp"
#include "noisycover/norms.hpp"

using namespace noisycover;
using namespace noisycover::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("noisycover_app_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Two linearly separable classes of 2x2 images.
Dataset synthetic(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  d.images.resize(m, 4);
  for (int i = 0; i < m; ++i) {
    const int y = i % 2;
    for (int k = 0; k < 4; ++k) {
      d.images(i, k) = std::round(255 * (0.5 * u(rng) + (k < 2 ? 0.5 * y : 0.5 * (1 - y)))) / 255;
    }
    d.labels.push_back(y);
  }
  d.num_classes = 2;
  return d;
}

fs::path fake_mnist(const std::string& name) {
  const fs::path dir = scratch(name);
  write_idx(synthetic(60, 1), dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", 2, 2);
  write_idx(synthetic(20, 2), dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", 2, 2);
  return dir;
}

json tiny_config(const fs::path& mnist, const fs::path& out) {
  return {{"mnist", mnist.string()},
          {"out", out.string()},
          {"seed", 5},
          {"arch", {{"input_dim", 4}, {"widths", {6, 5, 2}}, {"sigma", 0.05}, {"gamma", 0.1}}},
          {"train",
           {{"epochs", 3}, {"batch_size", 8}, {"mc_samples_eval", 4}, {"n_train", 50}, {"n_val", 10}}},
          {"methods", {"ours", "pdim", "lipschitz", "spectral", "norm_based"}}};
}

}  // namespace

TEST_CASE("config defaults and validation") {
  const RunConfig c = parse_run_config(json::object());
  CHECK(c.arch.widths == std::vector<int>{250, 250, 250, 10});
  CHECK(c.train.batch_size == 16);
  CHECK(c.train.epochs == 50);
  CHECK(c.train.target_train_error == 0.005);
  CHECK(c.m() == 59000);
  CHECK(c.methods.size() == 5);

  CHECK_THROWS_WITH_AS(parse_run_config({{"bogus", 1}}), doctest::Contains("unknown key 'bogus'"),
                       ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"arch", {{"depth", 3}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"train", {{"lr", 0.1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"sweep", {{"axis", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"sweep", {{"mode", "lazy"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"methods", {"vc"}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"seed", "one"}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"ramp_loss", 1.0}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"arch", {{"gamma", 0.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config({{"train", {{"batch_size", 0}}}}), ConfigError);

  const RunConfig round = parse_run_config(to_json(c));
  CHECK(to_json(round) == to_json(c));
}

TEST_CASE("nvac table rows and tags") {
  const NetworkArch a{784, {250, 250, 250, 10}, 0.05, 0.1};
  const ArchQuantifiers counts = arch_counts(a);
  std::vector<NvacRow> rows;
  for (Method m : kAllMethods) {
    rows.push_back(nvac_row(m, a, counts, false, 59000, 0.01, noise_level(0.05)));
  }
  rows.push_back(nvac_constant_row(1000.0, 59000, 0.01));
  const std::string csv = format_nvac_csv(rows);
  CHECK(csv.rfind("method,depth,width,sigma,gamma,m,ramp_loss,epsilon,log10_nvac,status\n", 0) == 0);
  CHECK(csv.find("ours,3,250,0.05,0.1,59000,0.01,0.099,10.644") != std::string::npos);
  CHECK(csv.find("lipschitz,3,250,0.05,0.1,59000,0.01,0.099,,error:needs_checkpoint") !=
        std::string::npos);
  CHECK(ordering_summary(rows) == "constant < ours < pdim");
  CHECK(ordering_holds(rows, {Method::kOurs, Method::kPdim}));
  CHECK_FALSE(ordering_holds(rows, {Method::kPdim, Method::kOurs}));
  CHECK_FALSE(ordering_holds(rows, {Method::kOurs, Method::kLipschitz}));

  // m * ceil(36 c / (m eps^2))
  const double n = std::ceil(36.0 * 1000.0 / (59000 * 0.099 * 0.099));
  CHECK(*rows.back().log10_nvac == doctest::Approx(std::log10(59000 * n)).epsilon(1e-12));

  CHECK(nvac_row(Method::kOurs, a, counts, false, 59000, 0.01, std::nullopt).status ==
        "error:zero_sigma");
  CHECK(nvac_row(Method::kOurs, a, counts, false, 59000, 1.0, noise_level(0.05)).status ==
        "error:vacuous_loss");
}

TEST_CASE("lipschitz row on a checkpoint with V <= 1 carries an error tag") {
  const NetworkArch a{4, {3, 2}, 0.1, 0.1};
  ParamSet p = init_params(a, 1);
  for (Matrix& w : p.weights) w *= 0.01;
  const ArchQuantifiers q = quantifiers(a, p, 1.0);
  REQUIRE(q.v <= 1.0);
  const NvacRow r = nvac_row(Method::kLipschitz, a, q, true, 1000, 0.05, noise_level(0.1));
  CHECK(r.status == "error:lipschitz_v");
  CHECK_FALSE(r.log10_nvac.has_value());
  CHECK(format_nvac_csv({r}).find(",,error:lipschitz_v\n") != std::string::npos);
}

TEST_CASE("assumed-mode sweep: headers, empty axes, reproducibility") {
  RunConfig c = parse_run_config(json::object());
  const SweepOutputs empty = run_sweep(c, nullptr);
  REQUIRE(empty.size() == 4);
  CHECK(empty.at("sweep_depth.csv") == "depth,method,log10_nvac,status\n");
  CHECK(empty.at("sweep_width.csv") == "width,method,log10_nvac,status\n");
  CHECK(empty.at("sweep_sigma.csv") == "log10_sigma,method,log10_nvac,status\n");
  CHECK(empty.at("sweep_loss_sigma.csv") ==
        "sigma,train_zero_one,test_zero_one,train_ramp,test_ramp,status\n");

  c = parse_run_config({{"methods", {"ours", "pdim", "spectral"}},
                        {"sweep",
                         {{"depths", {2, 3, 4, 5}},
                          {"widths", {64, 1500}},
                          {"log10_sigmas", {-1, -240, -350}},
                          {"loss_sigmas", {0.1}}}}});
  const SweepOutputs a = run_sweep(c, nullptr);
  c.sweep.workers = 3;
  const SweepOutputs b = run_sweep(c, nullptr);
  CHECK(a == b);
  CHECK(a.at("sweep_depth.csv").find("3,ours,10.644") != std::string::npos);
  CHECK(a.at("sweep_depth.csv").find("2,spectral,,error:needs_checkpoint") != std::string::npos);
  CHECK(a.at("sweep_sigma.csv").find("-240,ours,11.98") != std::string::npos);
  CHECK(a.at("sweep_loss_sigma.csv").find("0.1,,,,,error:needs_training") != std::string::npos);
}

TEST_CASE("train command, checkpoint reuse and fresh sweeps") {
  const fs::path mnist = fake_mnist("mnist");
  const fs::path out = scratch("train");
  RunConfig c = parse_run_config(tiny_config(mnist, out));
  CHECK(cmd_train(c) == 0);
  REQUIRE(fs::exists(out / "checkpoint.ncap"));
  const json metrics = json::parse(slurp(out / "metrics.json"));
  CHECK(metrics["epochs_run"] == 3);
  CHECK(metrics["train"]["count"] == 50);
  CHECK(metrics["validation"]["count"] == 10);
  CHECK(metrics["test"]["count"] == 20);
  CHECK(metrics["curve"].size() == 3);
  CHECK(json::parse(slurp(out / "checkpoint.json")).contains("created"));

  json zero = tiny_config(mnist, out / "zero");
  zero["train"]["epochs"] = 0;
  CHECK(cmd_train(parse_run_config(zero)) == 0);
  CHECK(load_checkpoint(out / "zero" / "checkpoint.ncap") == init_params(c.arch, 5));

  c.checkpoint = (out / "checkpoint.ncap").string();
  c.ramp_loss = 0.05;
  c.self_test_ln_n = 10.0;
  CHECK(cmd_nvac(c) == 0);
  const std::string nvac = slurp(out / "nvac.csv");
  CHECK(nvac.rfind(kNvacHeader, 0) == 0);
  CHECK(std::count(nvac.begin(), nvac.end(), '\n') == 7);
  CHECK(nvac.find("constant,") != std::string::npos);
  CHECK(fs::exists(out / "nvac_ordering.txt"));
  CHECK(cmd_bounds(c) == 0);
  CHECK(slurp(out / "bounds.csv").rfind("method,epsilon,m,ln_n,log10_n,status\n", 0) == 0);

  json sj = tiny_config(mnist, out / "sweep");
  sj["sweep"] = {{"mode", "fresh"},
                 {"depths", {1, 2}},
                 {"widths", {3}},
                 {"log10_sigmas", {-2, -100}},
                 {"loss_sigmas", {0.0, 0.1}},
                 {"base_width", 4},
                 {"base_depth", 1}};
  const RunConfig sc = parse_run_config(sj);
  const MnistSplits data = load_splits(sc);
  const SweepOutputs first = run_sweep(sc, &data);
  const SweepOutputs again = run_sweep(sc, &data);
  CHECK(first == again);
  RunConfig reuse = sc;
  reuse.sweep.mode = SweepMode::kReuse;
  reuse.sweep.workers = 2;
  CHECK(run_sweep(reuse, &data) == first);
  CHECK(first.at("sweep_loss_sigma.csv").find("0.1,") != std::string::npos);
  CHECK(first.at("sweep_loss_sigma.csv").find(",ok\n") != std::string::npos);

  CHECK(cmd_sweep(sc) == 0);
  const std::string depth_file = slurp(out / "sweep" / "sweep_depth.csv");
  CHECK(cmd_sweep(sc) == 0);
  CHECK(slurp(out / "sweep" / "sweep_depth.csv") == depth_file);
  CHECK(depth_file == first.at("sweep_depth.csv"));
}

TEST_CASE("missing data and checkpoints surface as errors") {
  RunConfig c = parse_run_config({{"mnist", "/nonexistent"}, {"out", scratch("missing").string()}});
  CHECK_THROWS(cmd_train(c));
  c.checkpoint = "/nonexistent.ncap";
  CHECK_THROWS(cmd_nvac(c));
  CHECK_THROWS_AS(cmd_eval(parse_run_config(json::object())), ConfigError);
}

TEST_CASE("verify command exit status") {
  const RunConfig c = parse_run_config({{"out", scratch("verify").string()}});
  VerifyOptions opt;
  opt.trials = 50;
  CHECK(cmd_verify(c, opt) == 0);
  opt.inject_faulty_tv_bound = true;
  CHECK(cmd_verify(c, opt) == 1);
  const json report = json::parse(slurp(fs::path(c.out_dir) / "verify.json"));
  CHECK(report.is_array());
  CHECK(report[0]["pass"] == false);
}
