#include "hee/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hee/analyze.hpp"
#include "hee/bench.hpp"
#include "hee/checkpoint.hpp"
#include "hee/data.hpp"
#include "hee/error.hpp"
#include "hee/parallel.hpp"

namespace hee {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(section, "must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) throw ConfigError(section + "." + item.key(), "unknown key");
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& section, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(section + "." + key, "wrong type");
  }
}

ModelSpec parse_spec(const json& s) {
  check_keys(s, "spec", {"L", "sizes", "families", "activation"});
  ModelSpec spec;
  if (!s.contains("sizes")) throw ConfigError("spec.sizes", "missing");
  read(s, "sizes", "spec", spec.sizes);
  if (!s.contains("families")) throw ConfigError("spec.families", "missing");
  const json& fams = s.at("families");
  if (fams.is_string()) {
    spec.families.assign(spec.sizes.size(), parse_family(fams.get<std::string>()));
  } else {
    std::vector<std::string> names;
    read(s, "families", "spec", names);
    for (const auto& n : names) spec.families.push_back(parse_family(n));
  }
  std::string act = "tanh";
  read(s, "activation", "spec", act);
  spec.activation = parse_activation(act);
  spec.validate();
  if (s.contains("L")) {
    int depth = 0;
    read(s, "L", "spec", depth);
    if (depth != spec.depth()) throw ConfigError("spec.L", "does not match spec.sizes");
  }
  return spec;
}

void parse_sampler(const json& s, SamplerConfig& c) {
  check_keys(s, "sampler",
             {"dt", "tau_z", "tau_u", "tau_v", "tau_x", "m", "adaptation_feedback", "inner_steps",
              "n_steps", "burn_in", "record_every", "seed"});
  read(s, "dt", "sampler", c.dt);
  read(s, "tau_z", "sampler", c.tau_z);
  read(s, "tau_u", "sampler", c.tau_u);
  read(s, "tau_v", "sampler", c.tau_v);
  read(s, "tau_x", "sampler", c.tau_x);
  read(s, "m", "sampler", c.m);
  read(s, "adaptation_feedback", "sampler", c.adaptation_feedback);
  read(s, "inner_steps", "sampler", c.inner_steps);
  read(s, "n_steps", "sampler", c.n_steps);
  read(s, "burn_in", "sampler", c.burn_in);
  read(s, "record_every", "sampler", c.record_every);
  read(s, "seed", "sampler", c.seed);
  c.validate();
}

void parse_train(const json& s, TrainConfig& c) {
  check_keys(s, "train",
             {"lr", "lr_end_fraction", "epochs", "batch_size", "inference_steps", "update_mode",
              "eval_every", "eval_size", "heldout_fraction", "divergence_factor", "learn_top",
              "exact_errors", "seed"});
  read(s, "lr", "train", c.lr);
  read(s, "lr_end_fraction", "train", c.lr_end_fraction);
  read(s, "epochs", "train", c.epochs);
  read(s, "batch_size", "train", c.batch_size);
  read(s, "inference_steps", "train", c.inference_steps);
  if (s.contains("update_mode")) {
    std::string mode;
    read(s, "update_mode", "train", mode);
    c.update_mode = parse_update_mode(mode);
  }
  read(s, "eval_every", "train", c.eval_every);
  read(s, "eval_size", "train", c.eval_size);
  read(s, "heldout_fraction", "train", c.heldout_fraction);
  read(s, "divergence_factor", "train", c.divergence_factor);
  read(s, "learn_top", "train", c.learn_top);
  read(s, "exact_errors", "train", c.exact_errors);
  read(s, "seed", "train", c.seed);
}

void parse_generate(const json& s, GenerateConfig& c) {
  check_keys(s, "generate", {"many_chains", "thin", "pilot_steps", "stage_steps"});
  read(s, "many_chains", "generate", c.many_chains);
  read(s, "thin", "generate", c.thin);
  read(s, "pilot_steps", "generate", c.pilot_steps);
  read(s, "stage_steps", "generate", c.stage_steps);
  if (c.stage_steps < 1) throw ConfigError("generate.stage_steps", "must be at least 1");
  if (c.pilot_steps < 1) throw ConfigError("generate.pilot_steps", "must be at least 1");
}

void parse_data(const json& s, DataConfig& c) {
  check_keys(s, "data", {"generator", "n", "seed", "images", "labels", "limit"});
  read(s, "generator", "data", c.generator);
  read(s, "n", "data", c.n);
  read(s, "seed", "data", c.seed);
  read(s, "images", "data", c.images);
  read(s, "labels", "data", c.labels);
  read(s, "limit", "data", c.limit);
  if (!c.generator.empty()) parse_generator(c.generator);
  if (c.n < 2) throw ConfigError("data.n", "need at least two examples");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Eigen::MatrixXd load_dataset(const DataConfig& d) {
  if (!d.images.empty()) {
    if (d.labels.empty()) throw ConfigError("data.labels", "required with data.images");
    return load_idx(d.images, d.labels, d.limit).images;
  }
  if (d.generator.empty()) throw ConfigError("data.generator", "missing (or give data.images)");
  return generate_dataset(parse_generator(d.generator), d.n, d.seed).points;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

// One-row CSV either to a file or to stdout.
void emit_row(const std::string& path, const std::vector<std::string>& header,
              const Eigen::MatrixXd& rows, std::ostream& out) {
  if (!path.empty()) {
    write_csv(path, header, rows);
    return;
  }
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", rows(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

Eigen::MatrixXd target_samples(const std::string& name, int n, std::uint64_t seed) {
  return generate_dataset(parse_generator(name), n, seed).points;
}

// Inference chain from a clamped observation, recording every step for
// `window` tau_z.
ChainRecord inference_record(const ModelSpec& spec, const Params& params, const VectorXd& x0,
                             SamplerConfig sc, double window, std::uint64_t chain) {
  sc.n_steps = static_cast<long>(std::ceil(window * sc.tau_z / sc.dt));
  sc.burn_in = 0;
  sc.record_every = 1;
  return run_chain(spec, params, NetworkState::init(spec, x0, true), sc, Mode::Inference, chain);
}

struct Options {
  std::string config, model, out, log, clamp, samples, reference, target = "mog4", svg, mode,
      image, generator = "mog4", depths = "1,2,4,8", ms = "0,2,4,8", family = "sigmoid",
      activation = "tanh";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int n = 1000;
  bool staged = false;
  bool many_chains = false;
  long steps = -1;
  double m = -1.0;
  double radius = 0.9;
  double tau_z_ms = 10.0;
  double window = 100.0;
  int units = 64;
  int trials = 10;
  int observed = 8;
  double scale = 1.0;
  int seeds = 20;
  long bench_steps = 100000;
  long explore_steps = 6000;
};

RunConfig config_or_default(const Options& o) {
  RunConfig rc = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  set_default_grid(rc.quadrature);
  return rc;
}

int cmd_train(const Options& o, std::ostream& out) {
  RunConfig rc = RunConfig::load(o.config);
  set_default_grid(rc.quadrature);
  if (!rc.has_spec) throw ConfigError("spec", "missing");
  if (o.seed_set) rc.train.seed = o.seed;
  const Eigen::MatrixXd data = load_dataset(rc.data);
  Rng init(rc.train.seed, 0x494E4954ULL);
  const Params p0 = Params::random(rc.spec, init);
  const TrainResult r = train(rc.spec, p0, data, rc.train);
  save_checkpoint(o.out, rc.spec, r.params);
  write_training_log(o.log.empty() ? o.out + ".log.csv" : o.log, r.log);
  out << "final held-out energy " << r.log.rows.back().heldout_energy << "\n";
  return kExitOk;
}

int cmd_generate(const Options& o) {
  RunConfig rc = config_or_default(o);
  const Checkpoint cp = load_checkpoint(o.model);
  GenerateConfig g = rc.generate;
  g.sampler = rc.sampler;
  if (o.seed_set) g.sampler.seed = o.seed;
  if (o.many_chains) g.many_chains = true;
  if (o.n < 1) throw ConfigError("n", "must be positive");
  int width = 0, height = 0;
  if (!o.image.empty() && std::sscanf(o.image.c_str(), "%dx%d", &width, &height) != 2) {
    throw ConfigError("image", "expected WIDTHxHEIGHT");
  }
  Eigen::MatrixXd s;
  if (o.mode == "ancestral") {
    Rng rng(g.sampler.seed);
    s = ancestral_oracle(cp.spec, cp.params, o.n, rng);
  } else if (o.mode == "joint") {
    s = joint_generate(cp.spec, cp.params, g, o.n);
  } else if (o.mode == "marginal") {
    s = marginal_generate(cp.spec, cp.params, g, o.n, o.staged);
  } else {
    throw ConfigError("mode", "expected joint, marginal or ancestral, got '" + o.mode + "'");
  }
  write_samples(o.out, s, width, height);
  return kExitOk;
}

int cmd_hessian(const Options& o) {
  RunConfig rc = config_or_default(o);
  const Checkpoint cp = load_checkpoint(o.model);
  const Eigen::MatrixXd clamp = read_csv(o.clamp).rows;
  SamplerConfig sc = rc.sampler;
  if (o.seed_set) sc.seed = o.seed;
  const long steps = o.steps >= 0 ? o.steps : rc.train.inference_steps;
  Eigen::MatrixXd rows(clamp.rows(), 8);
  for (Eigen::Index r = 0; r < clamp.rows(); ++r) {
    if (clamp.cols() != cp.spec.sizes[0]) throw DimensionMismatch("clamp width does not match n_0");
    SamplerConfig run = sc;
    run.n_steps = steps;
    run.burn_in = steps;
    const ChainRecord rec = run_chain(cp.spec, cp.params,
                                      NetworkState::init(cp.spec, clamp.row(r).transpose(), true),
                                      run, Mode::Inference, static_cast<std::uint64_t>(r));
    const HessianReport h = hj_quantities(hessian(cp.spec, cp.params, rec.x.back()), sc);
    rows.row(r) << static_cast<double>(r), h.lambda_min, h.log_det, h.lambda_min_hj, h.log_det_hj,
        h.n_total, h.singular ? 1.0 : 0.0, h.asymmetry;
  }
  write_csv(o.out,
            {"row", "lambda_min", "log_det", "lambda_min_hj", "log_det_hj", "n_total", "singular",
             "asymmetry"},
            rows);
  return kExitOk;
}

int cmd_depthwidth(const Options& o) {
  config_or_default(o);
  DepthWidthConfig c;
  c.total_units = o.units;
  c.depths.clear();
  for (double d : parse_list(o.depths, "depths")) c.depths.push_back(static_cast<int>(d));
  c.trials = o.trials;
  c.observed_units = o.observed;
  c.family = parse_family(o.family);
  c.activation = parse_activation(o.activation);
  c.weight_scale = o.scale;
  if (o.steps >= 0) c.inference_steps = o.steps;
  c.seed = o.seed;
  const auto rows = depth_width_experiment(c);
  Eigen::MatrixXd table(rows.size(), 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DepthWidthRow& r = rows[i];
    table.row(i) << r.depth, r.width, r.lambda_min_median, r.log_det_median, r.lambda_min_mean,
        r.log_det_mean;
  }
  write_csv(o.out,
            {"depth", "width", "lambda_min_median", "log_det_median", "lambda_min_mean",
             "log_det_mean"},
            table);
  std::string svg = o.svg;
  if (svg.empty()) {
    svg = o.out;
    const auto dot = svg.rfind('.');
    svg = (dot == std::string::npos ? svg : svg.substr(0, dot)) + ".svg";
  }
  write_text(svg, depth_width_svg(rows));
  return kExitOk;
}

int cmd_iact(const Options& o, std::ostream& out) {
  const CsvTable t = read_csv(o.samples);
  Eigen::MatrixXd rows(t.rows.cols(), 3);
  for (Eigen::Index c = 0; c < t.rows.cols(); ++c) {
    std::vector<double> s(t.rows.rows());
    for (Eigen::Index r = 0; r < t.rows.rows(); ++r) s[r] = t.rows(r, c);
    const IactResult res = iact_report(s);
    rows.row(c) << static_cast<double>(c), res.tau, res.degenerate ? 1.0 : 0.0;
  }
  emit_row(o.out, {"column", "tau", "degenerate"}, rows, out);
  return kExitOk;
}

int cmd_modes(const Options& o, std::ostream& out) {
  if (o.target != "mog4") throw ConfigError("target", "mode coverage is defined for mog4 only");
  const Eigen::MatrixXd s = read_csv(o.samples).rows;
  if (s.cols() != 2) throw DimensionMismatch("samples must have two columns");
  const Coverage c = mode_coverage(s, mog4_means(), o.radius);
  Eigen::MatrixXd row(1, 6);
  row << c.covered, static_cast<double>(c.assigned), c.mass[0], c.mass[1], c.mass[2], c.mass[3];
  emit_row(o.out, {"covered", "assigned", "mass0", "mass1", "mass2", "mass3"}, row, out);
  return kExitOk;
}

int cmd_kl(const Options& o, std::ostream& out) {
  const Eigen::MatrixXd s = read_csv(o.samples).rows;
  const Eigen::MatrixXd ref =
      o.reference.empty() ? target_samples(o.target, 100000, o.seed) : read_csv(o.reference).rows;
  if (s.cols() != 2 || ref.cols() != 2) throw DimensionMismatch("kl needs two-column samples");
  Eigen::MatrixXd row(1, 1);
  row << hist_kl(ref, s);
  emit_row(o.out, {"kl"}, row, out);
  return kExitOk;
}

SamplerConfig dynamics_config(const Options& o, const RunConfig& rc) {
  SamplerConfig sc = rc.sampler;
  if (o.m >= 0.0) sc.m = o.m;
  if (o.seed_set) sc.seed = o.seed;
  return sc;
}

int cmd_spectrum(const Options& o) {
  RunConfig rc = config_or_default(o);
  const Checkpoint cp = load_checkpoint(o.model);
  const Eigen::MatrixXd clamp = read_csv(o.clamp).rows;
  const SamplerConfig sc = dynamics_config(o, rc);
  std::vector<SpectrumPeak> peaks;
  for (Eigen::Index r = 0; r < clamp.rows(); ++r) {
    const ChainRecord rec = inference_record(cp.spec, cp.params, clamp.row(r).transpose(), sc,
                                             o.window, static_cast<std::uint64_t>(r));
    for (const SpectrumPeak& p : spectrum_peak(rec, sc.dt / sc.tau_z, o.tau_z_ms, o.window)) {
      peaks.push_back(p);
    }
  }
  Eigen::MatrixXd rows(peaks.size(), 5);
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    rows.row(i) << static_cast<double>(i / (peaks.size() / clamp.rows())), peaks[i].layer,
        peaks[i].unit, peaks[i].frequency_hz, peaks[i].has_peak ? 1.0 : 0.0;
  }
  write_csv(o.out, {"row", "layer", "unit", "frequency_hz", "has_peak"}, rows);
  return kExitOk;
}

int cmd_transient(const Options& o, std::ostream& out) {
  RunConfig rc = config_or_default(o);
  const Checkpoint cp = load_checkpoint(o.model);
  const Eigen::MatrixXd clamp = read_csv(o.clamp).rows;
  const SamplerConfig sc = dynamics_config(o, rc);
  Eigen::MatrixXd rows(clamp.rows(), 2);
  for (Eigen::Index r = 0; r < clamp.rows(); ++r) {
    const ChainRecord rec = inference_record(cp.spec, cp.params, clamp.row(r).transpose(), sc,
                                             o.window, static_cast<std::uint64_t>(r));
    rows.row(r) << static_cast<double>(r), transient_step(rec, sc.dt / sc.tau_z, o.window);
  }
  emit_row(o.out, {"row", "average_step"}, rows, out);
  return kExitOk;
}

int cmd_bench(const Options& o) {
  BenchConfig c;
  c.ms = parse_list(o.ms, "m");
  c.seeds = o.seeds;
  c.steps = o.bench_steps;
  c.explore_steps = o.explore_steps;
  c.seed = o.seed;
  if (c.seeds < 1) throw ConfigError("seeds", "must be positive");
  write_bench(o.out, bench_sampler(c));
  return kExitOk;
}

int cmd_data(const Options& o) {
  const Dataset2D d = generate_dataset(parse_generator(o.generator), o.n, o.seed);
  write_csv(o.out, column_names(2), d.points);
  return kExitOk;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  check_keys(doc, "config", {"version", "spec", "sampler", "train", "generate", "data", "quadrature"});
  if (!doc.contains("version")) throw ConfigError("version", "missing");
  int version = 0;
  read(doc, "version", "config", version);
  if (version != 1) throw ConfigError("version", "unsupported config version");

  RunConfig rc;
  if (doc.contains("spec")) {
    rc.spec = parse_spec(doc.at("spec"));
    rc.has_spec = true;
  }
  if (doc.contains("sampler")) parse_sampler(doc.at("sampler"), rc.sampler);
  if (doc.contains("train")) parse_train(doc.at("train"), rc.train);
  rc.train.sampler = rc.sampler;
  rc.train.validate();
  if (doc.contains("generate")) parse_generate(doc.at("generate"), rc.generate);
  rc.generate.sampler = rc.sampler;
  if (doc.contains("data")) parse_data(doc.at("data"), rc.data);
  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    check_keys(q, "quadrature", {"half_width", "count"});
    double half_width = 12.0;
    int count = 401;
    read(q, "half_width", "quadrature", half_width);
    read(q, "count", "quadrature", count);
    rc.quadrature = QuadratureGrid::make(half_width, count);
  }
  return rc;
}

RunConfig RunConfig::load(const std::string& path) { return parse(slurp(path)); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical exponential-family energy models: training, sampling, analysis"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker threads (HEE_THREADS overrides)");

  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_set = true; });
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
  train_cmd->add_option("--out", o.out, "checkpoint path")->required();
  train_cmd->add_option("--log", o.log, "training log CSV (default <out>.log.csv)");
  seed_opt(train_cmd);

  CLI::App* gen = app.add_subcommand("generate", "draw observations from a trained model");
  gen->add_option("--model", o.model, "checkpoint")->required();
  gen->add_option("--config", o.config, "config with sampler/generate sections");
  gen->add_option("--mode", o.mode, "joint, marginal or ancestral")->required();
  gen->add_flag("--staged", o.staged, "staged marginal generation");
  gen->add_flag("--many-chains", o.many_chains, "one independent chain per sample");
  gen->add_option("--n", o.n, "number of samples");
  gen->add_option("--image", o.image, "WIDTHxHEIGHT: write image rows and a sidecar");
  gen->add_option("--out", o.out, "samples CSV")->required();
  seed_opt(gen);

  CLI::App* an = app.add_subcommand("analyze", "diagnostics");
  an->require_subcommand(1);
  CLI::App* hes = an->add_subcommand("hessian", "energy Hessian at inferred latents");
  hes->add_option("--model", o.model)->required();
  hes->add_option("--clamp", o.clamp, "CSV of observations")->required();
  hes->add_option("--config", o.config);
  hes->add_option("--steps", o.steps, "inference steps before evaluation");
  hes->add_option("--out", o.out)->required();
  seed_opt(hes);

  CLI::App* dw = an->add_subcommand("depthwidth", "lambda_1 and log det against depth");
  dw->add_option("--units", o.units, "total latent units");
  dw->add_option("--depths", o.depths, "comma-separated depths");
  dw->add_option("--trials", o.trials);
  dw->add_option("--observed", o.observed, "observation units");
  dw->add_option("--family", o.family);
  dw->add_option("--activation", o.activation);
  dw->add_option("--scale", o.scale, "weight scale");
  dw->add_option("--steps", o.steps, "inference steps");
  dw->add_option("--config", o.config);
  dw->add_option("--out", o.out)->required();
  dw->add_option("--svg", o.svg, "chart path (default <out>.svg)");
  seed_opt(dw);

  CLI::App* ia = an->add_subcommand("iact", "integrated autocorrelation time per column");
  ia->add_option("--samples", o.samples)->required();
  ia->add_option("--out", o.out);

  CLI::App* md = an->add_subcommand("modes", "mode coverage");
  md->add_option("--samples", o.samples)->required();
  md->add_option("--target", o.target);
  md->add_option("--radius", o.radius);
  md->add_option("--out", o.out);

  CLI::App* kl = an->add_subcommand("kl", "histogram KL(reference || samples)");
  kl->add_option("--samples", o.samples)->required();
  kl->add_option("--reference", o.reference, "reference samples CSV");
  kl->add_option("--target", o.target, "reference generator when no CSV is given");
  kl->add_option("--out", o.out);
  seed_opt(kl);

  for (auto [name, help] : {std::pair{"spectrum", "dominant oscillation frequency per unit"},
                            std::pair{"transient", "average step size"}}) {
    CLI::App* sub = an->add_subcommand(name, help);
    sub->add_option("--model", o.model)->required();
    sub->add_option("--clamp", o.clamp)->required();
    sub->add_option("--config", o.config);
    sub->add_option("--m", o.m, "adaptation strength (overrides config)");
    sub->add_option("--tau-z-ms", o.tau_z_ms);
    sub->add_option("--window", o.window, "window in tau_z");
    sub->add_option("--out", o.out);
    seed_opt(sub);
  }

  CLI::App* bench = app.add_subcommand("bench", "sampler benchmarks");
  bench->require_subcommand(1);
  CLI::App* bs = bench->add_subcommand("sampler", "LS vs SLD on the bundled mixture");
  bs->add_option("--m", o.ms, "comma-separated adaptation strengths");
  bs->add_option("--seeds", o.seeds);
  bs->add_option("--steps", o.bench_steps);
  bs->add_option("--explore-steps", o.explore_steps);
  bs->add_option("--out", o.out)->required();
  seed_opt(bs);

  CLI::App* data = app.add_subcommand("data", "write a synthetic 2D dataset");
  data->add_option("--generator", o.generator);
  data->add_option("--n", o.n);
  data->add_option("--out", o.out)->required();
  seed_opt(data);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (o.threads > 0) set_thread_count(o.threads);
    if (*train_cmd) return cmd_train(o, out);
    if (*gen) return cmd_generate(o);
    if (*hes) return cmd_hessian(o);
    if (*dw) return cmd_depthwidth(o);
    if (*ia) return cmd_iact(o, out);
    if (*md) return cmd_modes(o, out);
    if (*kl) return cmd_kl(o, out);
    if (*bs) return cmd_bench(o);
    if (*data) return cmd_data(o);
    if (an->get_subcommand("spectrum")->parsed()) return cmd_spectrum(o);
    if (an->get_subcommand("transient")->parsed()) return cmd_transient(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Diverged& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const NonFiniteError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const EtaOutOfRange& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace hee
