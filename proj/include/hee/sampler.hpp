#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hee/model.hpp"
#include "hee/rng.hpp"

namespace hee {

enum class Mode { Inference, JointGeneration, MarginalGeneration };

/// Time-discretization and schedule of the stochastic dynamics. Times are in
/// units of tau_z.
struct SamplerConfig {
  double dt = 0.01;
  double tau_z = 1.0;
  double tau_u = 0.1;
  double tau_v = 1.0;
  double tau_x = 1.0;
  /// Adaptation strength; 0 gives first-order Langevin sampling.
  double m = 4.0;
  /// When true the adaptation current also integrates the energy gradient,
  /// which keeps p(x) stationary. When false it is driven by noise only.
  bool adaptation_feedback = true;
  int inner_steps = 10;
  long n_steps = 1000;
  long burn_in = 0;
  long record_every = 1;
  std::uint64_t seed = 0;
  bool record_v = false;
  bool record_energy = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Recorded trajectory of one chain. Entry r of `x` holds all layers at
/// step `steps[r]`; `v` and `energy` are filled only when requested.
struct ChainRecord {
  std::vector<long> steps;
  std::vector<Layers> x;
  std::vector<Layers> v;
  std::vector<double> energy;

  std::size_t size() const { return steps.size(); }
  /// Time series of one unit.
  std::vector<double> series(int layer, int unit) const;
};

/// Advance u_l by `inner_steps` Euler-Maruyama substeps towards
/// p(u | eta_l), eta_l computed from the current x_{l+1}, then refresh eps_l.
void interneuron_relax(const ModelSpec& spec, const Params& params, NetworkState& state, int l,
                       const SamplerConfig& config, Rng& rng);

/// One outer step of first-order Langevin dynamics. Draw order per step:
/// interneuron noise (stream u, layers 0..L-1), then slow-unit noise
/// (stream x, layers 0..L). Throws NonFiniteError if the state blows up.
void ls_step(const ModelSpec& spec, const Params& params, NetworkState& state,
             const SamplerConfig& config, ChainRng& rng, Mode mode);

/// One outer step of second-order Langevin dynamics with adaptation
/// currents on the latent layers. Uses the same u and x draws as ls_step,
/// plus adaptation noise from stream v (layers 1..L).
void sld_step(const ModelSpec& spec, const Params& params, NetworkState& state,
              const SamplerConfig& config, ChainRng& rng, Mode mode);

/// Runs `config.n_steps` steps (SLD when m > 0, LS otherwise), recording step
/// s when s >= burn_in and (s - burn_in) is a multiple of record_every.
/// Step 0 is the initial state. Deterministic given (config.seed, chain).
ChainRecord run_chain(const ModelSpec& spec, const Params& params, NetworkState init,
                      const SamplerConfig& config, Mode mode, std::uint64_t chain = 0);

/// Drift -grad E(x) of an arbitrary differentiable energy.
using DriftFn = std::function<void(const VectorXd& x, VectorXd& drift)>;

/// LS / SLD on a plain energy function, same discretization as the network
/// sampler. `v` is ignored when config.m == 0.
void potential_step(const DriftFn& drift, VectorXd& x, VectorXd& v, const SamplerConfig& config,
                    Rng& x_rng, Rng& v_rng);

/// Euler-Maruyama update of one block of slow units with time constant `tau`,
/// plus the matching adaptation update when `adapt` is set. `v` is read at
/// its pre-step value.
void advance_units(Eigen::Ref<VectorXd> x, Eigen::Ref<VectorXd> v, const VectorXd& drift,
                   double tau, const SamplerConfig& config, Rng& x_rng, Rng* v_rng);

}  // namespace hee
