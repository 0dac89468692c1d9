#include "hee/learn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hee/data.hpp"
#include "hee/error.hpp"
#include "hee/parallel.hpp"

namespace hee {

namespace {

// Chain ids for held-out evaluation live far above the training ids.
constexpr std::uint64_t kEvalChainBase = std::uint64_t{1} << 40;

void step(const ModelSpec& spec, const Params& params, NetworkState& state,
          const SamplerConfig& config, ChainRng& rng) {
  if (config.m > 0.0) {
    sld_step(spec, params, state, config, rng, Mode::Inference);
  } else {
    ls_step(spec, params, state, config, rng, Mode::Inference);
  }
}

Errors errors_for(const ModelSpec& spec, const Params& params, const NetworkState& state,
                  bool exact) {
  return exact ? exact_errors(spec, params, state.x) : local_errors(spec, params, state);
}

void accumulate(Params& sum, const Params& d) {
  for (std::size_t l = 0; l < sum.theta.size(); ++l) sum.theta[l] += d.theta[l];
  sum.eta_top += d.eta_top;
}

void apply(Params& params, const Params& direction, double scale) {
  for (std::size_t l = 0; l < params.theta.size(); ++l) params.theta[l] += scale * direction.theta[l];
  params.eta_top += scale * direction.eta_top;
}

bool diverged(double value, double initial, double factor) {
  return !std::isfinite(value) || value - initial > (factor - 1.0) * std::abs(initial);
}

}  // namespace

std::string_view to_string(UpdateMode mode) {
  return mode == UpdateMode::Online ? "online" : "end_of_inference";
}

UpdateMode parse_update_mode(std::string_view name) {
  if (name == "end_of_inference") return UpdateMode::EndOfInference;
  if (name == "online") return UpdateMode::Online;
  throw ConfigError("train.update_mode", "unknown update mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr", "must be >= 0");
  if (!(lr_end_fraction >= 0.0)) throw ConfigError("train.lr_end_fraction", "must be >= 0");
  if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
  if (inference_steps < 1) throw ConfigError("train.inference_steps", "must be >= 1");
  if (eval_every < 1) throw ConfigError("train.eval_every", "must be >= 1");
  if (eval_size < 1) throw ConfigError("train.eval_size", "must be >= 1");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
    throw ConfigError("train.heldout_fraction", "must lie in (0, 1)");
  }
  if (!(divergence_factor > 1.0)) throw ConfigError("train.divergence_factor", "must be > 1");
  sampler.validate();
}

Errors local_errors(const ModelSpec& spec, const Params& params, const NetworkState& state) {
  Errors eps(state.eps.begin(), state.eps.end());
  const int top = spec.depth();
  const Family fam = spec.families[top];
  VectorXd e(spec.sizes[top]);
  for (int i = 0; i < e.size(); ++i) {
    e[i] = phi(fam, state.x[top][i]) - mean_suff_stat(fam, params.eta_top[i]);
  }
  eps.push_back(e);
  return eps;
}

Errors exact_errors(const ModelSpec& spec, const Params& params, const Layers& x) {
  Errors eps;
  for (int l = 0; l <= spec.depth(); ++l) eps.push_back(exact_eps(spec, params, x, l));
  return eps;
}

Params hebbian_direction(const ModelSpec& spec, const Layers& x, const Errors& eps,
                         bool learn_top) {
  Params d = Params::zeros(spec);
  const Activation act = spec.activation;
  for (int l = 0; l < spec.depth(); ++l) {
    const VectorXd f = x[l + 1].unaryExpr([act](double a) { return activate(act, a); });
    d.theta[l] = eps[l] * f.transpose();
  }
  if (learn_top) d.eta_top = eps[spec.depth()];
  return d;
}

Params hebbian_update(const ModelSpec& spec, const Params& params, const Layers& x,
                      const Errors& eps, double lr, bool learn_top) {
  Params out = params;
  apply(out, hebbian_direction(spec, x, eps, learn_top), lr);
  return out;
}

void write_training_log(const std::string& path, const TrainingLog& log) {
  Eigen::MatrixXd rows(log.rows.size(), 4);
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const TrainingLogRow& r = log.rows[i];
    rows.row(i) << static_cast<double>(r.step), r.heldout_energy, r.lr, r.wallclock_s;
  }
  write_csv(path, {"step", "heldout_energy", "lr", "wallclock_s"}, rows);
}

double heldout_energy(const ModelSpec& spec, const Params& params, const Eigen::MatrixXd& data,
                      const TrainConfig& config) {
  const Eigen::Index n = data.rows();
  std::vector<double> e(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    ChainRng rng(config.seed, kEvalChainBase + i);
    NetworkState state = NetworkState::init(spec, data.row(i).transpose(), true);
    for (long s = 0; s < config.inference_steps; ++s) step(spec, params, state, config.sampler, rng);
    e[i] = energy(spec, params, state.x);
  });
  double sum = 0.0;
  for (double v : e) sum += v;
  return sum / static_cast<double>(n);
}

TrainResult train(const ModelSpec& spec, const Params& params0, const Eigen::MatrixXd& data,
                  const TrainConfig& config) {
  spec.validate();
  params0.validate(spec);
  config.validate();
  if (data.cols() != spec.sizes[0]) {
    throw DimensionMismatch("data has " + std::to_string(data.cols()) + " columns, model expects " +
                            std::to_string(spec.sizes[0]));
  }
  const Eigen::Index n_held =
      std::clamp<Eigen::Index>(std::llround(config.heldout_fraction * data.rows()), 1, data.rows() - 1);
  const Eigen::Index n_train = data.rows() - n_held;
  if (n_train < 1) throw ConfigError("data", "need at least two examples");
  const Eigen::MatrixXd held = data.bottomRows(n_held).topRows(std::min<Eigen::Index>(n_held, config.eval_size));

  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const long batches_per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
  const long total_updates = batches_per_epoch * config.epochs;
  auto lr_at = [&](long u) {
    const double frac = total_updates > 1 ? static_cast<double>(u) / (total_updates - 1) : 0.0;
    return config.lr * (1.0 - (1.0 - config.lr_end_fraction) * frac);
  };

  TrainResult result{params0, {}};
  Params& params = result.params;
  double initial = 0.0;
  auto evaluate = [&](long u, double lr) {
    double e;
    try {
      e = heldout_energy(spec, params, held, config);
    } catch (const EtaOutOfRange& err) {
      throw Diverged(std::string("held-out evaluation failed: ") + err.what());
    }
    if (result.log.rows.empty()) initial = e;
    result.log.rows.push_back({u, e, lr, seconds()});
    if (diverged(e, initial, config.divergence_factor)) {
      throw Diverged("held-out energy " + std::to_string(e) + " exceeds the initial " +
                     std::to_string(initial) + " by more than the divergence factor");
    }
  };
  evaluate(0, lr_at(0));

  std::vector<Eigen::Index> order(n_train);
  long update = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Eigen::Index i = 0; i < n_train; ++i) order[i] = i;
    Rng shuffle(config.seed, 0x5348554646ULL + epoch);
    for (Eigen::Index i = n_train - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.below(static_cast<std::uint64_t>(i + 1))]);
    }
    for (long b = 0; b < batches_per_epoch; ++b, ++update) {
      const Eigen::Index first = b * config.batch_size;
      const int k = static_cast<int>(std::min<Eigen::Index>(config.batch_size, n_train - first));
      const double lr = lr_at(update);
      std::vector<NetworkState> states;
      std::vector<ChainRng> rngs;
      for (int c = 0; c < k; ++c) {
        states.push_back(NetworkState::init(spec, data.row(order[first + c]).transpose(), true));
        rngs.emplace_back(config.seed, static_cast<std::uint64_t>(update) * config.batch_size + c);
      }
      std::vector<Params> dirs(k);
      auto directions = [&] {
        parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
          dirs[c] = hebbian_direction(spec, states[c].x,
                                      errors_for(spec, params, states[c], config.exact_errors),
                                      config.learn_top);
        });
        Params sum = Params::zeros(spec);
        for (const Params& d : dirs) accumulate(sum, d);
        apply(params, sum, lr / k);
      };
      try {
        if (config.update_mode == UpdateMode::EndOfInference) {
          parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
            for (long s = 0; s < config.inference_steps; ++s) {
              step(spec, params, states[c], config.sampler, rngs[c]);
            }
          });
          directions();
        } else {
          for (long s = 0; s < config.inference_steps; ++s) {
            parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
              step(spec, params, states[c], config.sampler, rngs[c]);
            });
            directions();
          }
        }
      } catch (const EtaOutOfRange& err) {
        throw Diverged(std::string("training left the admissible range: ") + err.what());
      } catch (const NonFiniteError& err) {
        throw Diverged(std::string("training produced a non-finite state: ") + err.what());
      }
      const long done = update + 1;
      if (done % config.eval_every == 0 && done < total_updates) evaluate(done, lr_at(std::min(done, total_updates - 1)));
    }
  }
  evaluate(total_updates, lr_at(total_updates - 1));
  return result;
}

}  // namespace hee
