// f1b-lab: command-line front end for the flagged-bit test bench.
//
// Subcommands: gen, construct, verify, certify, simulate, sweep, train,
// replay-fig4. Exit codes: 0 success, 1 usage/config error, 2 a verification
// or certification that was asserted to succeed did not.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "f1b/rng.hpp"
#include "f1b/serialize.hpp"
#include "f1b/version.hpp"

namespace {

using f1b::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailed = 2;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

// Every file output is paired with <path>.manifest.json carrying the fully
// resolved configuration, so a run is reproducible from the manifest alone.
void emit(const std::string& out_path, const std::string& content,
          const std::string& subcommand, const json& config, std::uint64_t seed) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  write_file(out_path, content);
  json manifest = {{"subcommand", subcommand},
                   {"config", config},
                   {"master_seed", seed},
                   {"artifact_version", f1b::kVersion},
                   {"outputs", json::array({out_path})}};
  write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

// Missing CLI flags fall back to the config file, then to built-in defaults.
template <typename T>
void apply_config(const CLI::App& sub, const json& cfg, const std::string& flag,
                  const std::string& key, T& var) {
  if (sub.count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

int env_workers() {
  if (const char* env = std::getenv("F1B_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 0;  // resolve_workers turns 0 into hardware concurrency
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stoi(item));
  }
  return values;
}

f1b::GridSpec parse_grid(const std::string& text) {
  std::stringstream ss(text);
  std::string lo, hi, step;
  if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, step)) {
    throw std::invalid_argument("grid must be lo:hi:step, got '" + text + "'");
  }
  return {std::stod(lo), std::stod(hi), std::stod(step)};
}

std::map<std::string, double> parse_kv(const std::string& text) {
  std::map<std::string, double> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("expected key=value in '" + item + "'");
    }
    kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return kv;
}

double kv_at(const std::map<std::string, double>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("missing '" + key + "' in --construct");
  return it->second;
}

// Builds the system named by --model/--construct or loads it from --params.
f1b::ModelSystem resolve_system(const std::string& model, const std::string& construct,
                                const std::string& params_file, json* construction_info) {
  if (!params_file.empty()) {
    return f1b::system_from_json(load_json_file(params_file));
  }
  if (construct.empty()) {
    throw std::invalid_argument("need either --params <file> or --construct <spec>");
  }
  const auto kv = parse_kv(construct);
  if (model == "vanilla-k2") {
    f1b::VanillaK2Construction c{kv_at(kv, "b1"), kv_at(kv, "w21"), kv_at(kv, "b2")};
    if (construction_info) {
      *construction_info = {{"type", "vanilla-k2"}, {"b1", c.b1}, {"w21", c.w21}, {"b2", c.b2}};
    }
    return f1b::vanilla_k2_params(c).as_system();
  }
  f1b::GruK1Construction c{kv_at(kv, "a"), kv_at(kv, "b")};
  if (construction_info) {
    *construction_info = {{"type", model + "-k1"},
                          {"a", c.a},
                          {"b", c.b},
                          {"A", c.gate_constant()},
                          {"B", c.input_constant()}};
  }
  if (model == "gru") return f1b::gru_k1_system(c);
  if (model == "pru") return f1b::pru_k1_system(c);
  if (model == "lstm") return f1b::lstm_k1_system(c);
  throw std::invalid_argument("unknown model for --construct: " + model);
}

struct GenOpts {
  int n = 9;
  std::uint64_t seed = 0;
  std::int64_t count = 1;
  bool enumerate = false;
  std::string format = "lines";
  std::string out;
};

struct ConstructOpts {
  std::string model = "gru";
  double a = 4.0, b = 1.0, margin = 0.1;
  double b1 = 0.5, w21 = 0.5, b2 = -2.0;
  int n = 0;
  std::string out;
};

struct VerifyOpts {
  std::string model = "gru";
  std::string construct, params, out;
  int n = 8;
  int cap = f1b::PathEnumerator::kDefaultCap;
  int workers = 0;
};

struct CertifyOpts {
  std::string model = "gru";
  std::string construct, out;
  double A = 0.9, B = 1.0;
  double b1 = 0.5, w21 = 0.5, b2 = -2.0;
  int n = 8;
};

struct SimulateOpts {
  std::string model = "vanilla";
  std::string construct, params, snapshots, trajectory_out;
  std::string format = "csv";
  std::string out;
  double U = 0.8, W1 = 0.9, W2 = 0.1;
  int n = 20, flag_at = 0, bins = 61, workers = 0;
  std::int64_t paths = 10000;
  std::uint64_t seed = 0;
};

struct SweepOpts {
  std::string grid_u = "-2:2:0.2", grid_w1 = "-2:2:0.2", grid_w2 = "-2:2:0.2";
  std::string format = "csv";
  std::string out;
  int n = 20, workers = 0;
  std::int64_t paths = 2000;
  std::uint64_t seed = 0;
};

struct TrainOpts {
  int n = 10, batch = 64, steps = 2000;
  double lr = 0.05, momentum = 0.9, init_scale = 0.5;
  std::uint64_t seed = 1;
  std::int64_t eval_paths = 10000;
  std::string out, params_out;
};

struct ReplayOpts {
  std::int64_t paths = 10000;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  int workers = 0;
};

int cmd_gen(const CLI::App& sub, const json& cfg, GenOpts o) {
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--seed", "seed", o.seed);
  apply_config(sub, cfg, "--count", "count", o.count);
  apply_config(sub, cfg, "--enumerate", "enumerate", o.enumerate);
  apply_config(sub, cfg, "--format", "format", o.format);
  apply_config(sub, cfg, "--out", "out", o.out);

  std::vector<f1b::SamplePath> paths;
  if (o.enumerate) {
    paths = f1b::enumerate_paths(o.n);
  } else {
    paths.reserve(static_cast<std::size_t>(o.count));
    for (std::int64_t i = 0; i < o.count; ++i) {
      paths.push_back(
          f1b::sample_path(o.n, f1b::derive_seed(o.seed, static_cast<std::uint64_t>(i))));
    }
  }

  std::string content;
  if (o.format == "json") {
    json arr = json::array();
    for (const auto& p : paths) {
      arr.push_back({{"L", p.flag_index}, {"bits", p.info_bits}, {"label", p.label()}});
    }
    content = arr.dump(2) + "\n";
  } else if (o.format == "lines") {
    std::ostringstream ss;
    for (const auto& p : paths) ss << f1b::format_path_line(p) << '\n';
    content = ss.str();
  } else {
    throw std::invalid_argument("gen: --format must be lines or json");
  }

  const json config = {{"n", o.n},       {"seed", o.seed},     {"count", o.count},
                       {"enumerate", o.enumerate}, {"format", o.format}, {"out", o.out}};
  emit(o.out, content, "gen", config, o.seed);
  return kExitOk;
}

int cmd_construct(const CLI::App& sub, const json& cfg, ConstructOpts o) {
  apply_config(sub, cfg, "--model", "model", o.model);
  apply_config(sub, cfg, "--a", "a", o.a);
  apply_config(sub, cfg, "--b", "b", o.b);
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--margin", "margin", o.margin);
  apply_config(sub, cfg, "--b1", "b1", o.b1);
  apply_config(sub, cfg, "--w21", "w21", o.w21);
  apply_config(sub, cfg, "--b2", "b2", o.b2);
  apply_config(sub, cfg, "--out", "out", o.out);

  f1b::ModelSystem system;
  json info;
  if (o.model == "vanilla-k2") {
    system = f1b::vanilla_k2_params({o.b1, o.w21, o.b2}).as_system();
    info = {{"type", "vanilla-k2"}, {"b1", o.b1}, {"w21", o.w21}, {"b2", o.b2}};
  } else {
    // When a is not given explicitly, derive it from the target length.
    if (sub.count("--a") == 0 && !cfg.contains("a") && o.n > 0) {
      o.a = f1b::choose_a(o.n, o.margin);
    }
    const f1b::GruK1Construction c{o.a, o.b};
    if (o.model == "gru") system = f1b::gru_k1_system(c);
    else if (o.model == "pru") system = f1b::pru_k1_system(c);
    else if (o.model == "lstm") system = f1b::lstm_k1_system(c);
    else throw std::invalid_argument("construct: unknown model " + o.model);
    info = {{"type", o.model + "-k1"}, {"a", o.a}, {"b", o.b},
            {"A", c.gate_constant()}, {"B", c.input_constant()}};
  }

  json doc = f1b::system_to_json(system);
  doc["construction"] = info;
  const json config = {{"model", o.model},   {"a", o.a},    {"b", o.b},   {"n", o.n},
                       {"margin", o.margin}, {"b1", o.b1},  {"w21", o.w21},
                       {"b2", o.b2},         {"out", o.out}};
  emit(o.out, doc.dump(2) + "\n", "construct", config, 0);
  return kExitOk;
}

int cmd_verify(const CLI::App& sub, const json& cfg, VerifyOpts o) {
  apply_config(sub, cfg, "--model", "model", o.model);
  apply_config(sub, cfg, "--construct", "construct", o.construct);
  apply_config(sub, cfg, "--params", "params", o.params);
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--cap", "cap", o.cap);
  apply_config(sub, cfg, "--workers", "workers", o.workers);
  apply_config(sub, cfg, "--out", "out", o.out);
  if (o.workers == 0) o.workers = env_workers();

  json construction_info;
  const f1b::ModelSystem system =
      resolve_system(o.model, o.construct, o.params, &construction_info);
  const f1b::ExactResult result = f1b::exact_error(system, o.n, o.workers, o.cap);

  json report = {{"method", "exact-enumeration"},
                 {"model", f1b::to_string(f1b::model_of(system.params))},
                 {"n", o.n},
                 {"certified", result.zero_error()},
                 {"error_probability",
                  {{"errors", result.errors},
                   {"total_paths", result.total_paths},
                   {"value", result.error_probability()}}},
                 {"margins",
                  {{"min_margin_pos", result.min_margin_pos},
                   {"max_margin_neg", result.max_margin_neg}}},
                 {"parameters", f1b::system_to_json(system)}};
  if (!construction_info.is_null()) report["construction"] = construction_info;

  const json config = {{"model", o.model}, {"construct", o.construct}, {"params", o.params},
                       {"n", o.n},         {"cap", o.cap},             {"workers", o.workers},
                       {"out", o.out}};
  emit(o.out, report.dump(2) + "\n", "verify", config, 0);
  return result.zero_error() ? kExitOk : kExitVerificationFailed;
}

int cmd_certify(const CLI::App& sub, const json& cfg, CertifyOpts o) {
  apply_config(sub, cfg, "--model", "model", o.model);
  apply_config(sub, cfg, "--construct", "construct", o.construct);
  apply_config(sub, cfg, "--A", "A", o.A);
  apply_config(sub, cfg, "--B", "B", o.B);
  apply_config(sub, cfg, "--b1", "b1", o.b1);
  apply_config(sub, cfg, "--w21", "w21", o.w21);
  apply_config(sub, cfg, "--b2", "b2", o.b2);
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--out", "out", o.out);

  f1b::IntervalCert cert;
  json parameters;
  if (o.model == "vanilla-k2") {
    cert = f1b::certify_vanilla_k2({o.b1, o.w21, o.b2}, o.n);
    parameters = {{"b1", o.b1}, {"w21", o.w21}, {"b2", o.b2}};
  } else {
    if (!o.construct.empty()) {
      const auto kv = parse_kv(o.construct);
      const f1b::GruK1Construction c{kv_at(kv, "a"), kv_at(kv, "b")};
      o.A = c.gate_constant();
      o.B = c.input_constant();
    }
    cert = f1b::certify_gru_interval(o.A, o.B, o.n);
    parameters = {{"A", o.A}, {"B", o.B}};
  }

  json report = f1b::interval_cert_to_json(cert);
  report["method"] = (o.model == "vanilla-k2") ? "exact-reachability" : "interval-envelope";
  report["model"] = o.model;
  report["parameters"] = parameters;

  const json config = {{"model", o.model}, {"construct", o.construct}, {"A", o.A},
                       {"B", o.B},         {"b1", o.b1},               {"w21", o.w21},
                       {"b2", o.b2},       {"n", o.n},                 {"out", o.out}};
  emit(o.out, report.dump(2) + "\n", "certify", config, 0);
  return cert.certified ? kExitOk : kExitVerificationFailed;
}

int cmd_simulate(const CLI::App& sub, const json& cfg, SimulateOpts o) {
  apply_config(sub, cfg, "--model", "model", o.model);
  apply_config(sub, cfg, "--construct", "construct", o.construct);
  apply_config(sub, cfg, "--params", "params", o.params);
  apply_config(sub, cfg, "--U", "U", o.U);
  apply_config(sub, cfg, "--W1", "W1", o.W1);
  apply_config(sub, cfg, "--W2", "W2", o.W2);
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--flag-at", "flag_at", o.flag_at);
  apply_config(sub, cfg, "--paths", "paths", o.paths);
  apply_config(sub, cfg, "--seed", "seed", o.seed);
  apply_config(sub, cfg, "--snapshots", "snapshots", o.snapshots);
  apply_config(sub, cfg, "--bins", "bins", o.bins);
  apply_config(sub, cfg, "--format", "format", o.format);
  apply_config(sub, cfg, "--out", "out", o.out);
  apply_config(sub, cfg, "--workers", "workers", o.workers);
  if (o.workers == 0) o.workers = env_workers();

  f1b::ModelSystem system;
  if (!o.params.empty() || !o.construct.empty()) {
    system = resolve_system(o.model, o.construct, o.params, nullptr);
  } else {
    // Scalar shortcut: --U/--W1/--W2 describe the 1-dimensional tanh cell.
    f1b::VanillaParams p;
    p.K = 1;
    p.W = Eigen::MatrixXd(1, 2);
    p.W << o.W1, o.W2;
    p.U = Eigen::MatrixXd(1, 1);
    p.U << o.U;
    p.b = Eigen::VectorXd::Zero(1);
    system.params = p;
    system.s0 = f1b::zero_state(p);
    system.encoding = f1b::FlagEncoding::Symmetric;
    system.classifier.beta = Eigen::VectorXd::Ones(1);
  }

  f1b::McOptions options;
  if (!o.snapshots.empty()) options.snapshot_times = parse_int_list(o.snapshots);
  options.bins = o.bins;
  options.workers = o.workers;
  const f1b::LMode l_mode = o.flag_at > 0 ? f1b::LMode::Fixed(o.flag_at) : f1b::LMode::Random();

  const f1b::DistributionSeries series = f1b::mc_distributions(
      system.params, system.s0, system.encoding, o.n, l_mode, o.paths, o.seed, options);

  std::string content;
  if (o.format == "csv") {
    std::ostringstream ss;
    f1b::export_distributions_csv(series, ss);
    content = ss.str();
  } else if (o.format == "json") {
    content = f1b::distribution_series_to_json(series).dump(2) + "\n";
  } else {
    throw std::invalid_argument("simulate: --format must be csv or json");
  }

  const json config = {{"model", o.model},     {"construct", o.construct}, {"params", o.params},
                       {"U", o.U},             {"W1", o.W1},               {"W2", o.W2},
                       {"n", o.n},             {"flag_at", o.flag_at},     {"paths", o.paths},
                       {"seed", o.seed},       {"snapshots", o.snapshots}, {"bins", o.bins},
                       {"format", o.format},   {"out", o.out},             {"workers", o.workers}};
  emit(o.out, content, "simulate", config, o.seed);

  if (!o.trajectory_out.empty()) {
    const f1b::SamplePath path = f1b::conditioned_path(
        o.n, l_mode, +1,
        f1b::derive_seed(f1b::stream_seed(o.seed, f1b::SeedStream::Positive), 0));
    const f1b::Trajectory traj = f1b::run(system.params, system.s0, path, system.encoding);
    std::ostringstream ss;
    f1b::export_trajectory_csv(traj, ss);
    write_file(o.trajectory_out, ss.str());
  }
  return kExitOk;
}

int cmd_sweep(const CLI::App& sub, const json& cfg, SweepOpts o) {
  apply_config(sub, cfg, "--grid-u", "grid_u", o.grid_u);
  apply_config(sub, cfg, "--grid-w1", "grid_w1", o.grid_w1);
  apply_config(sub, cfg, "--grid-w2", "grid_w2", o.grid_w2);
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--paths", "paths", o.paths);
  apply_config(sub, cfg, "--seed", "seed", o.seed);
  apply_config(sub, cfg, "--format", "format", o.format);
  apply_config(sub, cfg, "--out", "out", o.out);
  apply_config(sub, cfg, "--workers", "workers", o.workers);
  if (o.workers == 0) o.workers = env_workers();

  const f1b::SweepReport report =
      f1b::sweep_vanilla_k1(parse_grid(o.grid_u), parse_grid(o.grid_w1), parse_grid(o.grid_w2),
                            o.n, o.paths, o.seed, o.workers);

  std::string content;
  if (o.format == "csv") {
    std::ostringstream ss;
    f1b::export_sweep_csv(report, ss);
    content = ss.str();
  } else if (o.format == "json") {
    content = f1b::sweep_report_to_json(report).dump(2) + "\n";
  } else {
    throw std::invalid_argument("sweep: --format must be csv or json");
  }

  const json config = {{"grid_u", o.grid_u}, {"grid_w1", o.grid_w1}, {"grid_w2", o.grid_w2},
                       {"n", o.n},           {"paths", o.paths},     {"seed", o.seed},
                       {"format", o.format}, {"out", o.out},         {"workers", o.workers}};
  emit(o.out, content, "sweep", config, o.seed);
  const auto& best = report.points[report.argmin];
  std::cerr << "sweep: min best-threshold error " << report.min_error << " at (U=" << best.U
            << ", W1=" << best.W1 << ", W2=" << best.W2 << ")\n";
  return kExitOk;
}

int cmd_train(const CLI::App& sub, const json& cfg, TrainOpts o) {
  apply_config(sub, cfg, "--n", "n", o.n);
  apply_config(sub, cfg, "--batch", "batch", o.batch);
  apply_config(sub, cfg, "--lr", "lr", o.lr);
  apply_config(sub, cfg, "--momentum", "momentum", o.momentum);
  apply_config(sub, cfg, "--steps", "steps", o.steps);
  apply_config(sub, cfg, "--seed", "seed", o.seed);
  apply_config(sub, cfg, "--init-scale", "init_scale", o.init_scale);
  apply_config(sub, cfg, "--eval-paths", "eval_paths", o.eval_paths);
  apply_config(sub, cfg, "--out", "out", o.out);
  apply_config(sub, cfg, "--params-out", "params_out", o.params_out);

  f1b::TrainConfig config;
  config.n = o.n;
  config.batch_size = o.batch;
  config.learning_rate = o.lr;
  config.momentum = o.momentum;
  config.epochs = o.steps;
  config.seed = o.seed;
  config.init_scale = o.init_scale;
  config.eval_paths = o.eval_paths;

  const auto [model, report] = f1b::train(config);

  const json resolved = {{"n", o.n},
                         {"batch", o.batch},
                         {"lr", o.lr},
                         {"momentum", o.momentum},
                         {"steps", o.steps},
                         {"seed", o.seed},
                         {"init_scale", o.init_scale},
                         {"eval_paths", o.eval_paths},
                         {"out", o.out},
                         {"params_out", o.params_out}};
  emit(o.out, f1b::train_report_to_json(report).dump(2) + "\n", "train", resolved, o.seed);

  if (!o.params_out.empty()) {
    f1b::ModelSystem system{model.cell, f1b::zero_state(model.cell),
                            f1b::FlagEncoding::Symmetric, model.head};
    emit(o.params_out, f1b::system_to_json(system).dump(2) + "\n", "train", resolved, o.seed);
  }
  return kExitOk;
}

int cmd_replay(const CLI::App& sub, const json& cfg, ReplayOpts o) {
  apply_config(sub, cfg, "--paths", "paths", o.paths);
  apply_config(sub, cfg, "--seed", "seed", o.seed);
  apply_config(sub, cfg, "--format", "format", o.format);
  apply_config(sub, cfg, "--out", "out", o.out);
  apply_config(sub, cfg, "--workers", "workers", o.workers);
  if (o.workers == 0) o.workers = env_workers();

  const f1b::ReplayResult result = f1b::replay_figure4(o.paths, o.seed, o.workers);

  std::string content;
  if (o.format == "csv") {
    std::ostringstream ss;
    f1b::export_distributions_csv(result.series, ss);
    content = ss.str();
  } else if (o.format == "json") {
    json j = f1b::replay_result_to_json(result);
    j["series"] = f1b::distribution_series_to_json(result.series);
    content = j.dump(2) + "\n";
  } else {
    throw std::invalid_argument("replay-fig4: --format must be csv or json");
  }

  const json config = {{"paths", o.paths}, {"seed", o.seed}, {"format", o.format},
                       {"out", o.out},     {"workers", o.workers}};
  emit(o.out, content, "replay-fig4", config, o.seed);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f1b-lab: flagged-bit sequence-learning test bench"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default values for flags");

  GenOpts gen_opts;
  auto* gen = app.add_subcommand("gen", "generate or enumerate sample paths");
  gen->add_option("--n", gen_opts.n, "path length");
  gen->add_option("--seed", gen_opts.seed, "master seed");
  gen->add_option("--count", gen_opts.count, "number of sampled paths");
  gen->add_flag("--enumerate", gen_opts.enumerate, "dump all n*2^n paths instead of sampling");
  gen->add_option("--format", gen_opts.format, "lines|json");
  gen->add_option("--out", gen_opts.out, "output file (stdout when omitted)");

  ConstructOpts construct_opts;
  auto* construct = app.add_subcommand("construct", "emit explicit pass-construction parameters");
  construct->add_option("--model", construct_opts.model, "gru|pru|lstm|vanilla-k2");
  construct->add_option("--a", construct_opts.a, "gate weight (gated constructions)");
  construct->add_option("--b", construct_opts.b, "input weight (gated constructions)");
  construct->add_option("--n", construct_opts.n, "derive a from this length via choose_a");
  construct->add_option("--margin", construct_opts.margin, "target margin for choose_a");
  construct->add_option("--b1", construct_opts.b1, "vanilla-k2 mixing weight");
  construct->add_option("--w21", construct_opts.w21, "vanilla-k2 loading weight");
  construct->add_option("--b2", construct_opts.b2, "vanilla-k2 loading bias");
  construct->add_option("--out", construct_opts.out, "output file");

  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand("verify", "exact error probability by full enumeration");
  verify->add_option("--model", verify_opts.model, "gru|pru|lstm|vanilla-k2");
  verify->add_option("--construct", verify_opts.construct, "inline construction, e.g. a=4,b=1");
  verify->add_option("--params", verify_opts.params, "model system JSON (from construct)");
  verify->add_option("--n", verify_opts.n, "path length");
  verify->add_option("--cap", verify_opts.cap, "enumeration cap");
  verify->add_option("--workers", verify_opts.workers, "worker threads (0 = auto)");
  verify->add_option("--out", verify_opts.out, "output file");

  CertifyOpts certify_opts;
  auto* certify = app.add_subcommand("certify", "worst-case certification without enumeration");
  certify->add_option("--model", certify_opts.model, "gru|pru|lstm|vanilla-k2");
  certify->add_option("--construct", certify_opts.construct, "inline construction, e.g. a=4,b=1");
  certify->add_option("--A", certify_opts.A, "gate constant");
  certify->add_option("--B", certify_opts.B, "input constant");
  certify->add_option("--b1", certify_opts.b1, "vanilla-k2 mixing weight");
  certify->add_option("--w21", certify_opts.w21, "vanilla-k2 loading weight");
  certify->add_option("--b2", certify_opts.b2, "vanilla-k2 loading bias");
  certify->add_option("--n", certify_opts.n, "path length");
  certify->add_option("--out", certify_opts.out, "output file");

  SimulateOpts simulate_opts;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo state distributions");
  simulate->add_option("--model", simulate_opts.model, "gru|pru|lstm|vanilla|vanilla-k2");
  simulate->add_option("--construct", simulate_opts.construct, "inline construction");
  simulate->add_option("--params", simulate_opts.params, "model system JSON");
  simulate->add_option("--U", simulate_opts.U, "scalar recurrent weight (1-D shortcut)");
  simulate->add_option("--W1", simulate_opts.W1, "scalar info weight (1-D shortcut)");
  simulate->add_option("--W2", simulate_opts.W2, "scalar flag weight (1-D shortcut)");
  simulate->add_option("--n", simulate_opts.n, "path length");
  simulate->add_option("--flag-at", simulate_opts.flag_at, "fixed flag position (0 = random)");
  simulate->add_option("--paths", simulate_opts.paths, "paths per class");
  simulate->add_option("--seed", simulate_opts.seed, "master seed");
  simulate->add_option("--snapshots", simulate_opts.snapshots, "comma-separated times");
  simulate->add_option("--bins", simulate_opts.bins, "histogram bins");
  simulate->add_option("--format", simulate_opts.format, "csv|json");
  simulate->add_option("--out", simulate_opts.out, "output file");
  simulate->add_option("--workers", simulate_opts.workers, "worker threads (0 = auto)");
  simulate->add_option("--dump-trajectory", simulate_opts.trajectory_out,
                       "also write one positive-path trajectory CSV");

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "scalar tanh cell grid search");
  sweep->add_option("--grid-u", sweep_opts.grid_u, "U grid lo:hi:step");
  sweep->add_option("--grid-w1", sweep_opts.grid_w1, "W1 grid lo:hi:step");
  sweep->add_option("--grid-w2", sweep_opts.grid_w2, "W2 grid lo:hi:step");
  sweep->add_option("--n", sweep_opts.n, "path length");
  sweep->add_option("--paths", sweep_opts.paths, "paths per class per grid point");
  sweep->add_option("--seed", sweep_opts.seed, "master seed");
  sweep->add_option("--format", sweep_opts.format, "csv|json");
  sweep->add_option("--out", sweep_opts.out, "output file");
  sweep->add_option("--workers", sweep_opts.workers, "worker threads (0 = auto)");

  TrainOpts train_opts;
  auto* train = app.add_subcommand("train", "train the 2-D tanh cell with a logistic head");
  train->add_option("--n", train_opts.n, "path length");
  train->add_option("--batch", train_opts.batch, "minibatch size");
  train->add_option("--lr", train_opts.lr, "learning rate");
  train->add_option("--momentum", train_opts.momentum, "momentum coefficient");
  train->add_option("--steps", train_opts.steps, "optimizer steps (fresh batch each)");
  train->add_option("--seed", train_opts.seed, "master seed");
  train->add_option("--init-scale", train_opts.init_scale, "uniform init half-width");
  train->add_option("--eval-paths", train_opts.eval_paths, "evaluation paths");
  train->add_option("--out", train_opts.out, "training report JSON");
  train->add_option("--params-out", train_opts.params_out, "learned model system JSON");

  ReplayOpts replay_opts;
  auto* replay = app.add_subcommand("replay-fig4",
                                    "distribution replay of the reference 2-D parameter set");
  replay->add_option("--paths", replay_opts.paths, "paths per class");
  replay->add_option("--seed", replay_opts.seed, "master seed");
  replay->add_option("--format", replay_opts.format, "csv|json");
  replay->add_option("--out", replay_opts.out, "output file");
  replay->add_option("--workers", replay_opts.workers, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    json cfg = json::object();
    if (!config_path.empty()) cfg = load_json_file(config_path);
    if (gen->parsed()) return cmd_gen(*gen, cfg, gen_opts);
    if (construct->parsed()) return cmd_construct(*construct, cfg, construct_opts);
    if (verify->parsed()) return cmd_verify(*verify, cfg, verify_opts);
    if (certify->parsed()) return cmd_certify(*certify, cfg, certify_opts);
    if (simulate->parsed()) return cmd_simulate(*simulate, cfg, simulate_opts);
    if (sweep->parsed()) return cmd_sweep(*sweep, cfg, sweep_opts);
    if (train->parsed()) return cmd_train(*train, cfg, train_opts);
    if (replay->parsed()) return cmd_replay(*replay, cfg, replay_opts);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
