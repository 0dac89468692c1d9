#include "hee/sampler.hpp"

#include <cmath>

#include "hee/error.hpp"

namespace hee {

void SamplerConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sampler.dt", "must be positive");
  if (!(tau_z > 0.0)) throw ConfigError("sampler.tau_z", "must be positive");
  if (!(tau_u > 0.0)) throw ConfigError("sampler.tau_u", "must be positive");
  if (!(tau_v > 0.0)) throw ConfigError("sampler.tau_v", "must be positive");
  if (!(tau_x > 0.0)) throw ConfigError("sampler.tau_x", "must be positive");
  if (!(tau_u < tau_z)) throw ConfigError("sampler.tau_u", "must be smaller than tau_z");
  if (dt > 0.1 * tau_u * (1.0 + 1e-12)) {
    throw ConfigError("sampler.dt", "must not exceed 0.1 * tau_u");
  }
  if (!(m >= 0.0)) throw ConfigError("sampler.m", "must be non-negative");
  if (inner_steps < 1) throw ConfigError("sampler.inner_steps", "must be at least 1");
  if (n_steps < 0) throw ConfigError("sampler.n_steps", "must be non-negative");
  if (burn_in < 0) throw ConfigError("sampler.burn_in", "must be non-negative");
  if (record_every < 1) throw ConfigError("sampler.record_every", "must be at least 1");
}

std::vector<double> ChainRecord::series(int layer, int unit) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const Layers& layers : x) out.push_back(layers[layer][unit]);
  return out;
}

void advance_units(Eigen::Ref<VectorXd> x, Eigen::Ref<VectorXd> v, const VectorXd& drift,
                   double tau, const SamplerConfig& config, Rng& x_rng, Rng* v_rng) {
  const double h = config.dt / tau;
  const double noise = std::sqrt(2.0 * h);
  const Eigen::Index n = x.size();
  if (v_rng == nullptr) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] += h * drift[i] + noise * x_rng.normal();
    return;
  }
  for (Eigen::Index i = 0; i < n; ++i) x[i] += h * (drift[i] - v[i]) + noise * x_rng.normal();

  // tau_v dv = [-(m/2) v + (2 m tau_v / tau) dE/dx] dt + m sqrt(2 tau_v) dW
  const double hv = config.dt / config.tau_v;
  const double leak = 0.5 * config.m * hv;
  const double gain = config.adaptation_feedback ? 2.0 * config.m * h : 0.0;
  const double v_noise = config.m * std::sqrt(2.0 * hv);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] += -leak * v[i] - gain * drift[i] + v_noise * v_rng->normal();
  }
}

void interneuron_relax(const ModelSpec& spec, const Params& params, NetworkState& state, int l,
                       const SamplerConfig& config, Rng& rng) {
  const VectorXd eta = natural_params(spec, params, state.x, l);
  const Family fam = spec.families[l];
  const double h = config.dt / config.inner_steps / config.tau_u;
  const double noise = std::sqrt(2.0 * h);
  VectorXd& u = state.u[l];
  for (int k = 0; k < config.inner_steps; ++k) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] += h * (phi_prime(fam, u[i]) * eta[i] + base_measure_prime(u[i])) + noise * rng.normal();
    }
  }
  state.eps[l] = state.x[l].unaryExpr([fam](double a) { return phi(fam, a); }) -
                 u.unaryExpr([fam](double a) { return phi(fam, a); });
}

namespace {

void step(const ModelSpec& spec, const Params& params, NetworkState& state,
          const SamplerConfig& config, ChainRng& rng, Mode mode, bool adapt) {
  const int depth = spec.depth();
  const bool uses_errors = mode != Mode::MarginalGeneration;
  if (uses_errors) {
    for (int l = 0; l < depth; ++l) interneuron_relax(spec, params, state, l, config, rng.u);
  }

  const int first = mode == Mode::Inference ? 1 : 0;
  std::vector<VectorXd> drifts(depth + 1);
  for (int l = first; l <= depth; ++l) {
    drifts[l] = (l == 0 || !uses_errors) ? drift_prior(spec, params, state.x, l)
                                         : drift_x(spec, params, state, l);
  }

  for (int l = first; l <= depth; ++l) {
    const double tau = l == 0 ? config.tau_x : config.tau_z;
    Rng* v_rng = (adapt && l >= 1) ? &rng.v : nullptr;
    advance_units(state.x[l], state.v[l], drifts[l], tau, config, rng.x, v_rng);
    if (!state.x[l].allFinite() || !state.v[l].allFinite()) {
      throw NonFiniteError("non-finite state at layer " + std::to_string(l) +
                           " (time step too large?)");
    }
  }
  if (uses_errors) state.refresh_eps(spec);
}

}  // namespace

void ls_step(const ModelSpec& spec, const Params& params, NetworkState& state,
             const SamplerConfig& config, ChainRng& rng, Mode mode) {
  step(spec, params, state, config, rng, mode, false);
}

void sld_step(const ModelSpec& spec, const Params& params, NetworkState& state,
              const SamplerConfig& config, ChainRng& rng, Mode mode) {
  step(spec, params, state, config, rng, mode, true);
}

ChainRecord run_chain(const ModelSpec& spec, const Params& params, NetworkState init,
                      const SamplerConfig& config, Mode mode, std::uint64_t chain) {
  config.validate();
  ChainRng rng(config.seed, chain);
  NetworkState state = std::move(init);
  ChainRecord record;

  auto capture = [&](long s) {
    record.steps.push_back(s);
    record.x.push_back(state.x);
    if (config.record_v) record.v.push_back(state.v);
    if (config.record_energy) record.energy.push_back(energy(spec, params, state.x));
  };

  if (config.burn_in == 0) capture(0);
  for (long s = 1; s <= config.n_steps; ++s) {
    if (config.m > 0.0) {
      sld_step(spec, params, state, config, rng, mode);
    } else {
      ls_step(spec, params, state, config, rng, mode);
    }
    if (s >= config.burn_in && (s - config.burn_in) % config.record_every == 0) capture(s);
  }
  return record;
}

void potential_step(const DriftFn& drift, VectorXd& x, VectorXd& v, const SamplerConfig& config,
                    Rng& x_rng, Rng& v_rng) {
  VectorXd d(x.size());
  drift(x, d);
  if (v.size() != x.size()) v = VectorXd::Zero(x.size());
  advance_units(x, v, d, config.tau_z, config, x_rng, config.m > 0.0 ? &v_rng : nullptr);
  if (!x.allFinite()) throw NonFiniteError("non-finite state (time step too large?)");
}

}  // namespace hee
