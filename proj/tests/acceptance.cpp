// Acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "noisycover/app.hpp"
#include "noisycover/norms.hpp"
#include "support/hp_oracle.hpp"

using namespace noisycover;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double hp_rel(double got, const hp::Real& want) {
  return static_cast<double>(boost::multiprecision::abs((hp::Real(got) - want) / want));
}

// Random architecture and quantifiers in the valid region of every bound.
BoundQuery random_query(std::mt19937_64& rng, Method method) {
  std::uniform_int_distribution<int> depth(2, 5);
  std::uniform_int_distribution<int> width(3, 400);
  std::uniform_int_distribution<int> classes(2, 12);
  std::uniform_int_distribution<int> dim(2, 900);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoundQuery q;
  q.method = method;
  q.arch.input_dim = dim(rng);
  const int t = depth(rng);
  for (int i = 1; i < t; ++i) q.arch.widths.push_back(width(rng));
  q.arch.widths.push_back(classes(rng));
  q.epsilon = 0.01 + 0.49 * u(rng);
  q.gamma = 0.05 + 0.95 * u(rng);
  q.sigma = LogReal::from_log10(-40.0 + 39.0 * u(rng));
  q.arch.gamma = q.gamma;
  q.quant = arch_counts(q.arch);
  q.quant.v = 1.05 + 2.0 * u(rng);
  for (int i = 0; i < t; ++i) {
    q.quant.s[i] = 0.2 + 3.0 * u(rng);
    q.quant.b[i] = q.quant.s[i] * (1.0 + 10.0 * u(rng));
  }
  q.quant.x_frob = 0.5 + 10.0 * u(rng);
  const double log10_m = 2.0 + 7.0 * u(rng);
  q.m = method == Method::kPdim ? LogReal::from_log(std::log(pdim_constant(q.quant)) + 3.0 * u(rng) + 0.1)
                                : LogReal::from_log10(log10_m);
  return q;
}

hp::Real oracle(const BoundQuery& q) {
  const hp::Shape shape{q.arch.input_dim, q.arch.widths};
  const hp::Real m = boost::multiprecision::exp(hp::Real(q.m.ln()));
  switch (q.method) {
    case Method::kOurs:
      return hp::ours(shape, q.epsilon, m, q.gamma,
                      boost::multiprecision::exp(hp::Real(q.sigma.ln())));
    case Method::kNormBased: return hp::norm_based(shape, q.epsilon, q.gamma, q.quant.v);
    case Method::kPdim: return hp::pdim(shape, q.epsilon, m, q.gamma);
    case Method::kLipschitz: return hp::lipschitz(shape, q.epsilon, m, q.gamma, q.quant.v);
    case Method::kSpectral:
      return hp::spectral(q.quant.x_frob, static_cast<int>(q.quant.w), q.epsilon, q.gamma,
                          q.quant.s, q.quant.b);
  }
  return 0;
}

Outcome formula_fidelity() {
  std::mt19937_64 rng(31337);
  double worst = 0.0;
  for (Method m : kAllMethods) {
    for (int i = 0; i < 5; ++i) {
      const BoundQuery q = random_query(rng, m);
      worst = std::max(worst, hp_rel(ln_cover(q).ln_n, oracle(q)));
    }
  }
  return {worst <= 1e-9, "max rel error " + fmt("%.2e", worst) + " (tol 1e-9, 25 queries)"};
}

Outcome nvac_closed_form() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const double c = std::pow(10.0, 6.0 * u(rng));
    const double ramp = 0.9 * u(rng);
    const double m = std::floor(std::pow(10.0, 1.0 + 5.0 * u(rng)));
    const double eps = nvac_epsilon(ramp);
    const double want = m * std::max(1.0, std::ceil(36.0 * c / (m * eps * eps)));
    const NvacResult r = solve_nvac_constant(c, m, ramp);
    if (r.converged && r.nvac && *r.nvac == want) ++exact;
  }
  return {exact == 20, std::to_string(exact) + "/20 exact"};
}

Outcome reference_values() {
  const NetworkArch a{784, {250, 250, 250, 10}, 0.05, 0.1};
  const ArchQuantifiers q = arch_counts(a);
  const double at_005 =
      solve_nvac(Method::kOurs, a, q, 59000, 0.1, 0.01, LogReal::from_value(0.05)).nvac_log10;
  const double at_240 =
      solve_nvac(Method::kOurs, a, q, 59000, 0.1, 0.01, LogReal::from_log10(-240)).nvac_log10;
  const double d1 = std::abs(at_005 - std::log10(5.19e10));
  const double d2 = std::abs(at_240 - std::log10(8.42e11));
  return {d1 <= 1.0 && d2 <= 1.0, "log10 NVAC " + fmt("%.4f", at_005) + " (sigma 0.05, |diff| " +
                                      fmt("%.3f", d1) + "), " + fmt("%.4f", at_240) +
                                      " (sigma 1e-240, |diff| " + fmt("%.3f", d2) + "), tol 1"};
}

Outcome ordering(const app::TrainedModel& t, const NetworkArch& a) {
  if (t.train.zero_one_loss > 0.01) {
    return {false, "baseline train 0-1 " + fmt("%.4f", t.train.zero_one_loss) + " above 0.01"};
  }
  const ArchQuantifiers q = quantifiers(a, t.params, t.x_frob);
  std::vector<app::NvacRow> rows;
  for (Method m : kAllMethods) {
    rows.push_back(app::nvac_row(m, a, q, true, 59000, t.train.ramp_loss, app::noise_level(a.sigma)));
  }
  std::string detail;
  for (const auto& r : rows) {
    detail += r.method + "=" + (r.log10_nvac ? fmt("%.2f", *r.log10_nvac) : r.status) + " ";
  }
  const std::vector<Method> want{Method::kOurs, Method::kLipschitz, Method::kPdim, Method::kSpectral,
                                 Method::kNormBased};
  return {app::ordering_holds(rows, want), detail + "(log10 NVAC, train ramp " +
                                               fmt("%.4f", t.train.ramp_loss) + ")"};
}

Outcome training(const std::map<double, app::TrainedModel>& models) {
  const std::map<double, double> reference{{0.0, 0.0215}, {0.05, 0.0239}, {0.2, 0.0283}};
  bool ok = true;
  std::string detail;
  for (const auto& [sigma, target] : reference) {
    const app::TrainedModel& t = models.at(sigma);
    const double gap = std::abs(t.test.zero_one_loss - t.train.zero_one_loss);
    const bool here = std::abs(t.test.zero_one_loss - target) <= 0.02 && gap < 0.03;
    ok = ok && here;
    detail += "sigma " + fmt("%g", sigma) + ": test " + fmt("%.4f", t.test.zero_one_loss) +
              " train " + fmt("%.4f", t.train.zero_one_loss) + "; ";
  }
  return {ok, detail + "tol 0.02, gap < 0.03"};
}

Outcome oracle_suite() {
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_verification();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = all_passed(results) && secs < 60.0;
  std::string detail;
  for (const auto& r : results) {
    if (r.check != "cover_monotone" && r.check != "greedy_cover_vs_lipschitz") {
      ok = ok && r.trials >= 1000;
    }
    detail += r.check + " " + (r.pass ? "ok" : "violated") + "; ";
  }
  return {ok, detail + fmt("%.1f s", secs)};
}

Dataset random_dataset(int m, int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset data;
  data.images = RowMatrix::NullaryExpr(m, d, [&] { return u(rng); });
  for (int i = 0; i < m; ++i) data.labels.push_back(static_cast<int>(rng() % k));
  data.num_classes = k;
  return data;
}

double gradient_error(const NetworkArch& arch, std::uint64_t seed) {
  const Dataset data = random_dataset(7, arch.input_dim, arch.num_classes(), seed);
  ParamSet p = init_params(arch, seed);
  for (Matrix& w : p.weights) w *= 3.0;
  const auto grads = cross_entropy_gradient(p, data);
  double worst = 0.0;
  for (int l = 0; l < p.depth(); ++l) {
    for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) {
        const double h = 1e-5;
        ParamSet plus = p;
        ParamSet minus = p;
        plus.weights[l](r, c) += h;
        minus.weights[l](r, c) -= h;
        const double fd = (cross_entropy(plus, data) - cross_entropy(minus, data)) / (2 * h);
        worst = std::max(worst, std::abs(grads[l](r, c) - fd) / std::max(std::abs(fd), 1e-4));
      }
    }
  }
  return worst;
}

int monotonicity_violations() {
  std::mt19937_64 rng(99);
  int bad = 0;
  for (int trial = 0; trial < 30; ++trial) {
    for (Method method : kAllMethods) {
      BoundQuery q = random_query(rng, method);
      q.m = LogReal::from_log10(40);
      double previous = INFINITY;
      for (double eps : {0.01, 0.03, 0.1, 0.2, 0.5}) {
        q.epsilon = eps;
        const double v = ln_cover(q).ln_n;
        bad += v > previous;
        previous = v;
      }
      q.epsilon = 0.1;
      previous = -INFINITY;
      for (double log10_m : {40.0, 60.0, 100.0, 300.0, 380.0}) {
        q.m = LogReal::from_log10(log10_m);
        const double v = ln_cover(q).ln_n;
        bad += depends_on_m(method) ? v < previous : (previous != -INFINITY && v != previous);
        previous = v;
      }
      if (method == Method::kOurs || method == Method::kPdim) {
        const double base = ln_cover(q).ln_n;
        BoundQuery wider = q;
        wider.arch.widths.front() += 17;
        wider.quant = arch_counts(wider.arch);
        bad += ln_cover(wider).ln_n < base;
        BoundQuery deeper = q;
        deeper.arch.widths.insert(deeper.arch.widths.begin(), q.arch.widths.front());
        deeper.quant = arch_counts(deeper.arch);
        bad += ln_cover(deeper).ln_n < base;
      }
    }
  }
  return bad;
}

Outcome hygiene(const app::MnistSplits& data, const fs::path& scratch) {
  double grad = 0.0;
  grad = std::max(grad, gradient_error({3, {3, 2}, 0.0, 0.1}, 1));
  grad = std::max(grad, gradient_error({5, {5, 5, 3}, 0.0, 0.1}, 2));
  grad = std::max(grad, gradient_error({4, {6, 5, 4, 3}, 0.0, 0.1}, 3));
  const int mono = monotonicity_violations();

  app::RunConfig c = app::parse_run_config(
      {{"methods", {"ours", "pdim", "lipschitz", "spectral", "norm_based"}},
       {"sweep",
        {{"depths", {2, 3, 4, 5}},
         {"widths", {64, 128, 250, 500, 1000, 1500}},
         {"log10_sigmas", {-1, -10, -50, -100, -240, -300, -350}}}}});
  bool identical = app::run_sweep(c, nullptr) == app::run_sweep(c, nullptr);

  app::MnistSplits small;
  std::vector<std::int64_t> idx(600);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
  small.train = data.train.subset(std::span(idx).first(500), "small-train");
  small.test = data.test.subset(std::span(idx).first(200), "small-test");
  app::RunConfig f = app::parse_run_config(
      {{"out", scratch.string()},
       {"arch", {{"widths", {16, 10}}}},
       {"train", {{"epochs", 1}, {"mc_samples_eval", 4}, {"n_train", 500}, {"n_val", 0}}},
       {"methods", {"ours", "lipschitz"}},
       {"sweep", {{"mode", "fresh"}, {"widths", {8, 16}}, {"base_depth", 1}, {"loss_sigmas", {0.0, 0.1}}}}});
  identical = identical && app::run_sweep(f, &small) == app::run_sweep(f, &small);

  return {grad <= 1e-4 && mono == 0 && identical,
          "backprop rel err " + fmt("%.1e", grad) + " (tol 1e-4), monotonicity violations " +
              std::to_string(mono) + ", sweeps byte-identical " + (identical ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Acceptance criteria"};
  std::string mnist = "/root/data/mnist";
  std::string cache = "acceptance_cache";
  int epochs = 20;
  int mc = 20;
  cli.add_option("--mnist", mnist, "MNIST directory");
  cli.add_option("--cache", cache, "Checkpoint cache directory");
  cli.add_option("--epochs", epochs, "Epoch cap for the trained points");
  cli.add_option("--mc", mc, "Monte-Carlo samples per evaluated example");
  CLI11_PARSE(cli, argc, argv);

  std::map<int, Outcome> out;
  auto run = [&](int id, const std::function<Outcome()>& f) {
    try {
      out[id] = f();
    } catch (const std::exception& e) {
      out[id] = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "[criterion %d done]\n", id);
  };

  run(1, formula_fidelity);
  run(2, nvac_closed_form);
  run(3, reference_values);
  run(6, oracle_suite);

  std::optional<app::MnistSplits> data;
  std::map<double, app::TrainedModel> models;
  app::RunConfig base = app::parse_run_config(
      {{"mnist", mnist},
       {"train", {{"epochs", epochs}, {"mc_samples_eval", mc}}}});
  try {
    data = app::load_splits(base);
    for (double sigma : {0.0, 0.05, 0.2}) {
      NetworkArch a = base.arch;
      a.sigma = sigma;
      std::fprintf(stderr, "[training sigma %g]\n", sigma);
      models[sigma] = app::cached_model(a, base, *data, cache, true);
    }
  } catch (const std::exception& e) {
    const Outcome failed{false, std::string("training unavailable: ") + e.what()};
    out[4] = out[5] = failed;
  }
  if (models.size() == 3) {
    NetworkArch a = base.arch;
    a.sigma = 0.05;
    run(4, [&] { return ordering(models.at(0.05), a); });
    run(5, [&] { return training(models); });
  }
  if (data) {
    run(7, [&] { return hygiene(*data, fs::path(cache) / "hygiene"); });
  } else {
    out[7] = {false, "MNIST unavailable"};
  }

  const char* names[] = {"",
                         "formula fidelity",
                         "NVAC closed form",
                         "reference NVAC values",
                         "bound ordering",
                         "training behavior",
                         "oracle suite",
                         "numerical hygiene"};
  bool all = true;
  for (int id = 1; id <= 7; ++id) {
    const Outcome& o = out[id];
    all = all && o.pass;
    std::printf("criterion %d %-20s %s  %s\n", id, names[id], o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
  }
  return all ? 0 : 1;
}
