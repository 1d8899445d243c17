#include "noisycover/app.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "noisycover/checkpoint.hpp"
#include "noisycover/norms.hpp"

namespace noisycover::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const char* key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <class T>
void read_opt(const json& j, const char* key, const std::string& where, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, where);
}

SweepMode parse_mode(const std::string& s) {
  if (s == "assumed") return SweepMode::kAssumed;
  if (s == "reuse") return SweepMode::kReuse;
  if (s == "fresh") return SweepMode::kFresh;
  throw ConfigError("sweep.mode: expected assumed, reuse or fresh, got '" + s + "'");
}

const char* mode_name(SweepMode m) {
  switch (m) {
    case SweepMode::kAssumed: return "assumed";
    case SweepMode::kReuse: return "reuse";
    case SweepMode::kFresh: return "fresh";
  }
  return "?";
}

const char* error_tag(BoundError::Kind k) {
  switch (k) {
    case BoundError::Kind::kInvalidQuery: return "error:invalid_query";
    case BoundError::Kind::kLogDomain: return "error:log_domain";
    case BoundError::Kind::kSampleTooSmall: return "error:sample_too_small";
    case BoundError::Kind::kLipschitzV: return "error:lipschitz_v";
    case BoundError::Kind::kSpectralZeroNorm: return "error:spectral_zero_norm";
    case BoundError::Kind::kOverflow: return "error:overflow";
  }
  return "error";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json loss_json(const LossReport& r) {
  return {{"ramp_loss", r.ramp_loss}, {"zero_one_loss", r.zero_one_loss}, {"count", r.sample_count}};
}

LossReport loss_from_json(const json& j) {
  return {j.at("ramp_loss").get<double>(), j.at("zero_one_loss").get<double>(),
          j.at("count").get<std::int64_t>()};
}

json arch_json(const NetworkArch& a) {
  return {{"input_dim", a.input_dim}, {"widths", a.widths}, {"sigma", a.sigma}, {"gamma", a.gamma}};
}

NetworkArch hidden_arch(const NetworkArch& base, int depth, int width) {
  NetworkArch a = base;
  a.widths.assign(static_cast<std::size_t>(depth), width);
  a.widths.push_back(base.num_classes());
  return a;
}

EvalMode eval_mode(double sigma, const TrainConfig& t) {
  return sigma > 0.0 ? EvalMode::expected(t.mc_samples_eval) : EvalMode::deterministic();
}

std::string log10_cell(const std::optional<double>& x) {
  if (!x) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *x);
  return buf;
}

}  // namespace

std::optional<LogReal> noise_level(double sigma) {
  if (sigma > 0.0) return LogReal::from_value(sigma);
  return std::nullopt;
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  check_keys(j,
             {"mnist", "out", "seed", "arch", "train", "checkpoint", "methods", "ramp_loss",
              "sample_size", "epsilon", "self_test_ln_n", "sweep"},
             "config");
  read_opt(j, "mnist", "config", c.mnist_dir);
  read_opt(j, "out", "config", c.out_dir);
  read_opt(j, "seed", "config", c.seed);
  read_opt(j, "checkpoint", "config", c.checkpoint);
  read_opt(j, "ramp_loss", "config", c.ramp_loss);
  read_opt(j, "sample_size", "config", c.sample_size);
  read_opt(j, "epsilon", "config", c.epsilon);
  read_opt(j, "self_test_ln_n", "config", c.self_test_ln_n);

  if (j.contains("arch")) {
    const json& a = j.at("arch");
    check_keys(a, {"input_dim", "widths", "sigma", "gamma"}, "arch");
    read_opt(a, "input_dim", "arch", c.arch.input_dim);
    read_opt(a, "widths", "arch", c.arch.widths);
    read_opt(a, "sigma", "arch", c.arch.sigma);
    read_opt(a, "gamma", "arch", c.arch.gamma);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t,
               {"learning_rate", "momentum", "epochs", "batch_size", "mc_samples_eval",
                "noise_during_training", "target_train_error", "n_train", "n_val"},
               "train");
    read_opt(t, "learning_rate", "train", c.train.learning_rate);
    read_opt(t, "momentum", "train", c.train.momentum);
    read_opt(t, "epochs", "train", c.train.epochs);
    read_opt(t, "batch_size", "train", c.train.batch_size);
    read_opt(t, "mc_samples_eval", "train", c.train.mc_samples_eval);
    read_opt(t, "noise_during_training", "train", c.train.noise_during_training);
    read_opt(t, "target_train_error", "train", c.train.target_train_error);
    read_opt(t, "n_train", "train", c.n_train);
    read_opt(t, "n_val", "train", c.n_val);
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : get<std::vector<std::string>>(j, "methods", "config")) {
      try {
        c.methods.push_back(parse_method(name));
      } catch (const std::exception&) {
        throw ConfigError("methods: unknown method '" + name + "'");
      }
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s,
               {"mode", "workers", "depths", "widths", "log10_sigmas", "loss_sigmas", "base_width",
                "base_depth"},
               "sweep");
    if (s.contains("mode")) c.sweep.mode = parse_mode(get<std::string>(s, "mode", "sweep"));
    read_opt(s, "workers", "sweep", c.sweep.workers);
    read_opt(s, "depths", "sweep", c.sweep.depths);
    read_opt(s, "widths", "sweep", c.sweep.widths);
    read_opt(s, "log10_sigmas", "sweep", c.sweep.log10_sigmas);
    read_opt(s, "loss_sigmas", "sweep", c.sweep.loss_sigmas);
    read_opt(s, "base_width", "sweep", c.sweep.base_width);
    read_opt(s, "base_depth", "sweep", c.sweep.base_depth);
  }

  try {
    c.arch.validate();
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.n_train < 1 || c.n_val < 0) throw ConfigError("train.n_train must be >= 1, n_val >= 0");
  if (c.ramp_loss && !(*c.ramp_loss >= 0.0 && *c.ramp_loss < 1.0)) {
    throw ConfigError("ramp_loss must lie in [0, 1)");
  }
  if (c.sample_size && !(*c.sample_size >= 1.0)) throw ConfigError("sample_size must be >= 1");
  if (c.epsilon && !(*c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (c.self_test_ln_n && !(*c.self_test_ln_n >= 0.0)) {
    throw ConfigError("self_test_ln_n must be nonnegative");
  }
  if (c.sweep.workers < 1) throw ConfigError("sweep.workers must be >= 1");
  if (c.sweep.base_width < 1 || c.sweep.base_depth < 1) {
    throw ConfigError("sweep.base_width and base_depth must be >= 1");
  }
  for (int d : c.sweep.depths) {
    if (d < 1) throw ConfigError("sweep.depths entries must be >= 1");
  }
  for (int w : c.sweep.widths) {
    if (w < 1) throw ConfigError("sweep.widths entries must be >= 1");
  }
  for (double s : c.sweep.loss_sigmas) {
    if (!(s >= 0.0)) throw ConfigError("sweep.loss_sigmas entries must be >= 0");
  }
  for (double s : c.sweep.log10_sigmas) {
    if (!std::isfinite(s)) throw ConfigError("sweep.log10_sigmas entries must be finite");
  }
  c.train.seed = c.seed;
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  json j = {{"mnist", c.mnist_dir},
            {"out", c.out_dir},
            {"seed", c.seed},
            {"arch", arch_json(c.arch)},
            {"train",
             {{"learning_rate", c.train.learning_rate},
              {"momentum", c.train.momentum},
              {"epochs", c.train.epochs},
              {"batch_size", c.train.batch_size},
              {"mc_samples_eval", c.train.mc_samples_eval},
              {"noise_during_training", c.train.noise_during_training},
              {"target_train_error", c.train.target_train_error},
              {"n_train", c.n_train},
              {"n_val", c.n_val}}},
            {"methods", methods},
            {"sweep",
             {{"mode", mode_name(c.sweep.mode)},
              {"workers", c.sweep.workers},
              {"depths", c.sweep.depths},
              {"widths", c.sweep.widths},
              {"log10_sigmas", c.sweep.log10_sigmas},
              {"loss_sigmas", c.sweep.loss_sigmas},
              {"base_width", c.sweep.base_width},
              {"base_depth", c.sweep.base_depth}}}};
  if (c.checkpoint) j["checkpoint"] = *c.checkpoint;
  if (c.ramp_loss) j["ramp_loss"] = *c.ramp_loss;
  if (c.sample_size) j["sample_size"] = *c.sample_size;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (c.self_test_ln_n) j["self_test_ln_n"] = *c.self_test_ln_n;
  return j;
}

MnistSplits load_splits(const RunConfig& c) {
  MnistFiles files = load_mnist_dir(c.mnist_dir);
  TrainValSplit sp = split(files.train, c.n_train, c.n_val, c.seed);
  return {std::move(sp.train), std::move(sp.validation), std::move(files.test)};
}

TrainedModel train_model(const NetworkArch& arch, const RunConfig& c, const MnistSplits& data) {
  arch.validate();
  if (data.train.dim() != arch.input_dim || data.train.num_classes > arch.num_classes()) {
    throw std::invalid_argument("training data does not fit the architecture");
  }
  TrainConfig tc = c.train;
  tc.seed = c.seed;
  TrainResult r = train_sgd(init_params(arch, c.seed), data.train, tc, arch.sigma);
  TrainedModel t;
  t.params = std::move(r.params);
  t.history = std::move(r.history);
  const EvalMode mode = eval_mode(arch.sigma, tc);
  t.train = evaluate(t.params, data.train, arch.gamma, mode, arch.sigma, c.seed + 1);
  if (data.validation.size() > 0) {
    t.validation = evaluate(t.params, data.validation, arch.gamma, mode, arch.sigma, c.seed + 2);
  }
  if (data.test.size() > 0) {
    t.test = evaluate(t.params, data.test, arch.gamma, mode, arch.sigma, c.seed + 3);
  }
  t.x_frob = input_frobenius(data.train);
  return t;
}

json metrics_json(const NetworkArch& arch, const RunConfig& c, const TrainedModel& t) {
  json curve = json::array();
  for (const EpochStats& e : t.history) {
    curve.push_back({{"epoch", e.epoch},
                     {"mean_cross_entropy", e.mean_cross_entropy},
                     {"running_zero_one", e.running_zero_one}});
  }
  return {{"arch", arch_json(arch)},
          {"seed", c.seed},
          {"epochs_run", static_cast<int>(t.history.size())},
          {"epoch_cap", c.train.epochs},
          {"target_train_error", c.train.target_train_error},
          {"batch_size", c.train.batch_size},
          {"mc_samples_eval", c.train.mc_samples_eval},
          {"x_frob", t.x_frob},
          {"train", loss_json(t.train)},
          {"validation", loss_json(t.validation)},
          {"test", loss_json(t.test)},
          {"curve", curve}};
}

std::string model_tag(const NetworkArch& arch, const RunConfig& c) {
  std::ostringstream s;
  s << "d" << arch.input_dim << "_w";
  for (std::size_t i = 0; i < arch.widths.size(); ++i) s << (i ? "-" : "") << arch.widths[i];
  s << "_s" << format_number(arch.sigma) << "_g" << format_number(arch.gamma) << "_seed" << c.seed
    << "_n" << c.n_train << "_ep" << c.train.epochs << "_bs" << c.train.batch_size << "_lr"
    << format_number(c.train.learning_rate) << "_t" << format_number(c.train.target_train_error);
  return s.str();
}

TrainedModel cached_model(const NetworkArch& arch, const RunConfig& c, const MnistSplits& data,
                          const fs::path& dir, bool reuse) {
  const std::string tag = model_tag(arch, c);
  const fs::path ckpt = dir / (tag + ".ncap");
  const fs::path metrics = dir / (tag + ".json");
  if (reuse && fs::exists(ckpt) && fs::exists(metrics)) {
    TrainedModel t;
    t.params = load_checkpoint(ckpt);
    t.params.check_against(arch);
    std::ifstream in(metrics);
    const json j = json::parse(in);
    t.train = loss_from_json(j.at("train"));
    t.validation = loss_from_json(j.at("validation"));
    t.test = loss_from_json(j.at("test"));
    t.x_frob = j.at("x_frob").get<double>();
    for (const json& e : j.at("curve")) {
      t.history.push_back({e.at("epoch").get<int>(), e.at("mean_cross_entropy").get<double>(),
                           e.at("running_zero_one").get<double>()});
    }
    return t;
  }
  TrainedModel t = train_model(arch, c, data);
  fs::create_directories(dir);
  save_checkpoint(t.params, ckpt);
  write_json(metrics, metrics_json(arch, c, t));
  return t;
}

NvacRow nvac_row(Method method, const NetworkArch& arch, const ArchQuantifiers& quant,
                 bool has_weights, double m, double ramp_loss, std::optional<LogReal> sigma) {
  NvacRow row;
  row.method = std::string(to_string(method));
  row.arch = arch;
  row.sigma = sigma;
  row.m = m;
  row.ramp_loss = ramp_loss;
  try {
    row.epsilon = nvac_epsilon(ramp_loss);
  } catch (const std::exception&) {
    row.status = "error:vacuous_loss";
    return row;
  }
  if (depends_on_weights(method) && !has_weights) {
    row.status = "error:needs_checkpoint";
    return row;
  }
  if (method == Method::kOurs && !sigma) {
    row.status = "error:zero_sigma";
    return row;
  }
  try {
    const NvacResult r = solve_nvac(method, arch, quant, m, arch.gamma, ramp_loss,
                                    sigma.value_or(LogReal::from_value(1.0)));
    row.log10_nvac = r.nvac_log10;
    row.status = r.converged ? "ok" : "not_converged";
    if (!r.converged) row.log10_nvac.reset();
  } catch (const BoundError& e) {
    row.status = error_tag(e.kind());
  } catch (const std::invalid_argument&) {
    row.status = "error:invalid_query";
  }
  return row;
}

NvacRow nvac_constant_row(double ln_n, double m, double ramp_loss) {
  NvacRow row;
  row.method = "constant";
  row.m = m;
  row.ramp_loss = ramp_loss;
  const NvacResult r = solve_nvac_constant(ln_n, m, ramp_loss);
  row.epsilon = r.epsilon_used;
  row.log10_nvac = r.nvac_log10;
  row.status = r.converged ? "ok" : "not_converged";
  return row;
}

std::string format_nvac_csv(const std::vector<NvacRow>& rows) {
  std::string out = std::string(kNvacHeader) + "\n";
  for (const NvacRow& r : rows) {
    const bool has_arch = !r.arch.widths.empty();
    const int width = has_arch && r.arch.depth() > 1 ? r.arch.widths.front() : 0;
    out += r.method + "," + (has_arch ? std::to_string(r.arch.depth() - 1) : "") + "," +
           (has_arch ? std::to_string(width) : "") + "," + (has_arch ? (r.sigma ? r.sigma->to_string() : "0") : "") +
           "," + (has_arch ? format_number(r.arch.gamma) : "") + "," + format_number(r.m) + "," +
           format_number(r.ramp_loss) + "," + format_number(r.epsilon) + "," +
           log10_cell(r.log10_nvac) + "," + r.status + "\n";
  }
  return out;
}

std::string ordering_summary(const std::vector<NvacRow>& rows) {
  std::vector<const NvacRow*> ok;
  for (const NvacRow& r : rows) {
    if (r.status == "ok" && r.log10_nvac) ok.push_back(&r);
  }
  std::stable_sort(ok.begin(), ok.end(),
                   [](const NvacRow* a, const NvacRow* b) { return *a->log10_nvac < *b->log10_nvac; });
  std::string s;
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (i) s += " < ";
    s += ok[i]->method;
  }
  return s;
}

bool ordering_holds(const std::vector<NvacRow>& rows, const std::vector<Method>& expected) {
  std::vector<double> values;
  for (Method m : expected) {
    const auto it = std::find_if(rows.begin(), rows.end(),
                                 [&](const NvacRow& r) { return r.method == to_string(m); });
    if (it == rows.end() || it->status != "ok" || !it->log10_nvac) return false;
    values.push_back(*it->log10_nvac);
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i - 1] < values[i])) return false;
  }
  return true;
}

namespace {

struct SweepPoint {
  NetworkArch arch;
  std::string axis_value;
};

// Rows for one architecture point, in method order.
std::string nvac_lines(const SweepPoint& p, const RunConfig& c, const TrainedModel* model,
                       std::optional<LogReal> sigma, double ramp_loss) {
  const bool has_weights = model != nullptr;
  ArchQuantifiers quant = has_weights ? quantifiers(p.arch, model->params, model->x_frob)
                                      : arch_counts(p.arch);
  std::string out;
  for (Method m : c.methods) {
    const NvacRow r = nvac_row(m, p.arch, quant, has_weights, c.m(), ramp_loss, sigma);
    out += p.axis_value + "," + r.method + "," + log10_cell(r.log10_nvac) + "," + r.status + "\n";
  }
  return out;
}

template <class F>
std::vector<std::string> parallel_points(std::size_t n, int workers, F&& f) {
  std::vector<std::string> out(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out[i] = f(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) out[i] = "\x01" + errors[i];
  }
  return out;
}

std::string error_cell(const std::string& what) {
  std::string s = "error:";
  for (char ch : what) s += (ch == ',' || ch == '\n') ? ';' : ch;
  return s;
}

}  // namespace

SweepOutputs run_sweep(const RunConfig& c, const MnistSplits* data) {
  const SweepConfig& s = c.sweep;
  const bool trained = s.mode != SweepMode::kAssumed;
  if (trained && data == nullptr) throw std::invalid_argument("sweep mode needs training data");
  const double assumed_ramp = c.ramp_loss.value_or(0.01);
  const fs::path cache = fs::path(c.out_dir) / "checkpoints";
  const bool reuse = s.mode == SweepMode::kReuse;

  auto model_for = [&](const NetworkArch& a) { return cached_model(a, c, *data, cache, reuse); };

  auto arch_axis = [&](const std::vector<SweepPoint>& points, const char* header) {
    const auto lines = parallel_points(points.size(), s.workers, [&](std::size_t i) {
      const SweepPoint& p = points[i];
      const auto sigma = noise_level(p.arch.sigma);
      if (!trained) return nvac_lines(p, c, nullptr, sigma, assumed_ramp);
      const TrainedModel t = model_for(p.arch);
      return nvac_lines(p, c, &t, sigma, t.train.ramp_loss);
    });
    std::string out = std::string(header) + "\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!lines[i].empty() && lines[i][0] == '\x01') {
        for (Method m : c.methods) {
          out += points[i].axis_value + "," + std::string(to_string(m)) + ",," +
                 error_cell(lines[i].substr(1)) + "\n";
        }
      } else {
        out += lines[i];
      }
    }
    return out;
  };

  SweepOutputs outputs;
  std::vector<SweepPoint> depth_points;
  for (int d : s.depths) {
    depth_points.push_back({hidden_arch(c.arch, d, s.base_width), std::to_string(d)});
  }
  outputs["sweep_depth.csv"] = arch_axis(depth_points, kDepthHeader);

  std::vector<SweepPoint> width_points;
  for (int w : s.widths) {
    width_points.push_back({hidden_arch(c.arch, s.base_depth, w), std::to_string(w)});
  }
  outputs["sweep_width.csv"] = arch_axis(width_points, kWidthHeader);

  {
    std::string out = std::string(kSigmaHeader) + "\n";
    if (!s.log10_sigmas.empty()) {
      std::optional<TrainedModel> model;
      std::string failure;
      if (trained) {
        try {
          model = model_for(c.arch);
        } catch (const std::exception& e) {
          failure = e.what();
        }
      }
      const double ramp = model ? model->train.ramp_loss : assumed_ramp;
      for (double l : s.log10_sigmas) {
        const std::string axis = format_number(l);
        if (!failure.empty()) {
          for (Method m : c.methods) {
            out += axis + "," + std::string(to_string(m)) + ",," + error_cell(failure) + "\n";
          }
          continue;
        }
        out += nvac_lines({c.arch, axis}, c, model ? &*model : nullptr, LogReal::from_log10(l),
                          ramp);
      }
    }
    outputs["sweep_sigma.csv"] = out;
  }

  {
    const auto lines = parallel_points(s.loss_sigmas.size(), s.workers, [&](std::size_t i) {
      const std::string axis = format_number(s.loss_sigmas[i]);
      if (!trained) return axis + ",,,,,error:needs_training\n";
      NetworkArch a = c.arch;
      a.sigma = s.loss_sigmas[i];
      const TrainedModel t = model_for(a);
      return axis + "," + format_number(t.train.zero_one_loss) + "," +
             format_number(t.test.zero_one_loss) + "," + format_number(t.train.ramp_loss) + "," +
             format_number(t.test.ramp_loss) + ",ok\n";
    });
    std::string out = std::string(kLossHeader) + "\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!lines[i].empty() && lines[i][0] == '\x01') {
        out += format_number(s.loss_sigmas[i]) + ",,,,," + error_cell(lines[i].substr(1)) + "\n";
      } else {
        out += lines[i];
      }
    }
    outputs["sweep_loss_sigma.csv"] = out;
  }
  return outputs;
}

int cmd_train(const RunConfig& c) {
  const MnistSplits data = load_splits(c);
  const fs::path out(c.out_dir);
  fs::create_directories(out);
  const TrainedModel t = train_model(c.arch, c, data);
  save_checkpoint(t.params, out / "checkpoint.ncap");
  write_json(out / "metrics.json", metrics_json(c.arch, c, t));
  write_json(out / "checkpoint.json",
             {{"created", utc_timestamp()}, {"checkpoint", "checkpoint.ncap"}, {"config", to_json(c)}});
  std::cout << "train 0-1 " << format_number(t.train.zero_one_loss) << "  test 0-1 "
            << format_number(t.test.zero_one_loss) << "  epochs " << t.history.size() << "\n";
  return 0;
}

namespace {

ParamSet require_checkpoint(const RunConfig& c) {
  if (!c.checkpoint) throw ConfigError("this command needs 'checkpoint'");
  ParamSet p = load_checkpoint(*c.checkpoint);
  p.check_against(c.arch);
  return p;
}

}  // namespace

int cmd_eval(const RunConfig& c) {
  const ParamSet p = require_checkpoint(c);
  const MnistSplits data = load_splits(c);
  const EvalMode mode = eval_mode(c.arch.sigma, c.train);
  json j = {{"arch", arch_json(c.arch)},
            {"train", loss_json(evaluate(p, data.train, c.arch.gamma, mode, c.arch.sigma, c.seed + 1))},
            {"validation",
             loss_json(evaluate(p, data.validation, c.arch.gamma, mode, c.arch.sigma, c.seed + 2))},
            {"test", loss_json(evaluate(p, data.test, c.arch.gamma, mode, c.arch.sigma, c.seed + 3))}};
  write_json(fs::path(c.out_dir) / "eval.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

namespace {

struct WeightContext {
  bool has_weights = false;
  ArchQuantifiers quant;
  std::optional<double> train_ramp;
};

WeightContext weight_context(const RunConfig& c, bool need_ramp) {
  WeightContext w;
  w.quant = arch_counts(c.arch);
  if (!c.checkpoint) return w;
  const ParamSet p = require_checkpoint(c);
  const MnistSplits data = load_splits(c);
  w.quant = quantifiers(c.arch, p, input_frobenius(data.train));
  w.has_weights = true;
  if (need_ramp) {
    w.train_ramp = evaluate(p, data.train, c.arch.gamma, eval_mode(c.arch.sigma, c.train),
                            c.arch.sigma, c.seed + 1)
                       .ramp_loss;
  }
  return w;
}

}  // namespace

int cmd_bounds(const RunConfig& c) {
  const WeightContext w = weight_context(c, !c.ramp_loss && !c.epsilon);
  const double ramp = c.ramp_loss ? *c.ramp_loss : w.train_ramp.value_or(0.01);
  const double eps = c.epsilon.value_or(nvac_epsilon(ramp));
  std::string csv = "method,epsilon,m,ln_n,log10_n,status\n";
  json all = json::array();
  for (Method m : c.methods) {
    std::string status = "ok";
    std::string ln_n;
    std::string log10_n;
    if (depends_on_weights(m) && !w.has_weights) {
      status = "error:needs_checkpoint";
    } else {
      BoundQuery q{m, eps, LogReal::from_value(c.m()), c.arch.gamma,
                   noise_level(c.arch.sigma).value_or(LogReal::from_value(1.0)), c.arch, w.quant};
      try {
        if (m == Method::kOurs && c.arch.sigma <= 0.0) {
          throw BoundError(BoundError::Kind::kInvalidQuery, "sigma must be positive");
        }
        const LnCover r = ln_cover(q);
        ln_n = format_number(r.ln_n);
        log10_n = log10_cell(r.log10_n());
        all.push_back(to_json(r));
      } catch (const BoundError& e) {
        status = error_tag(e.kind());
      }
    }
    csv += std::string(to_string(m)) + "," + format_number(eps) + "," + format_number(c.m()) + "," +
           ln_n + "," + log10_n + "," + status + "\n";
  }
  write_text(fs::path(c.out_dir) / "bounds.csv", csv);
  write_json(fs::path(c.out_dir) / "bounds.json", all);
  std::cout << csv;
  return 0;
}

int cmd_nvac(const RunConfig& c) {
  const WeightContext w = weight_context(c, !c.ramp_loss);
  const double ramp = c.ramp_loss ? *c.ramp_loss : w.train_ramp.value_or(0.01);
  std::vector<NvacRow> rows;
  for (Method m : c.methods) {
    rows.push_back(
        nvac_row(m, c.arch, w.quant, w.has_weights, c.m(), ramp, noise_level(c.arch.sigma)));
  }
  if (c.self_test_ln_n) rows.push_back(nvac_constant_row(*c.self_test_ln_n, c.m(), ramp));
  const std::string csv = format_nvac_csv(rows);
  const std::string summary = "ordering: " + ordering_summary(rows) + "\n";
  write_text(fs::path(c.out_dir) / "nvac.csv", csv);
  write_text(fs::path(c.out_dir) / "nvac_ordering.txt", summary);
  std::cout << csv << summary;
  return 0;
}

int cmd_sweep(const RunConfig& c) {
  std::optional<MnistSplits> data;
  if (c.sweep.mode != SweepMode::kAssumed) data = load_splits(c);
  const SweepOutputs outputs = run_sweep(c, data ? &*data : nullptr);
  for (const auto& [name, text] : outputs) {
    write_text(fs::path(c.out_dir) / name, text);
    std::cout << "wrote " << (fs::path(c.out_dir) / name).string() << "\n";
  }
  write_json(fs::path(c.out_dir) / "sweep.json", {{"created", utc_timestamp()}, {"config", to_json(c)}});
  return 0;
}

int cmd_verify(const RunConfig& c, const VerifyOptions& options) {
  const auto results = run_verification(options);
  write_json(fs::path(c.out_dir) / "verify.json", to_json(results));
  for (const CheckResult& r : results) {
    std::printf("%-28s trials %6d  max_violation %.3g  %s\n", r.check.c_str(), r.trials,
                r.max_violation, r.pass ? "PASS" : "FAIL");
  }
  return all_passed(results) ? 0 : 1;
}

}  // namespace noisycover::app
