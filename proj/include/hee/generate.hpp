#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hee/model.hpp"
#include "hee/sampler.hpp"

namespace hee {

/// Sample harvesting for the Langevin generators.
///
/// Single-chain mode (default): one chain runs `sampler.burn_in` steps, then a
/// pilot of `pilot_steps` steps estimates the integrated autocorrelation
/// time of x_0 and the chain keeps one state every `thin` steps (0 means
/// 10 x the pilot estimate). Many-chains mode: chain c is seeded with
/// (sampler.seed, c), runs `sampler.burn_in` steps and contributes its final
/// x_0, so samples are independent.
struct GenerateConfig {
  SamplerConfig sampler;
  bool many_chains = false;
  long thin = 0;
  long pilot_steps = 20000;
  /// Staged marginal generation: Langevin steps spent on each layer.
  long stage_steps = 2000;
};

/// x_0 and latents follow the coupled dynamics targeting p(x_0, ..., x_L);
/// x_0 has time constant tau_x. Returns n x n_0.
Eigen::MatrixXd joint_generate(const ModelSpec& spec, const Params& params,
                               const GenerateConfig& config, int n);

/// Latents follow the prior-only drift and x_0 its conditional drift.
/// Simultaneous mode evolves every layer at once (exact only when each
/// layer relaxes fast relative to its parent). Staged mode draws each
/// sample top-down: layer L, then L-1 given the frozen L, down to x_0, each
/// stage running `stage_steps` Langevin steps; it is always one chain per
/// sample. Returns n x n_0.
Eigen::MatrixXd marginal_generate(const ModelSpec& spec, const Params& params,
                                  const GenerateConfig& config, int n, bool staged);

/// Exact top-down draws using the inverse-CDF conditional sampler. Returns
/// n x n_0; when `layers` is given it receives every layer of every draw.
Eigen::MatrixXd ancestral_oracle(const ModelSpec& spec, const Params& params, int n, Rng& rng,
                                 std::vector<Layers>* layers = nullptr);

/// Writes samples as CSV. When width and height are given the rows are
/// images: values are clamped to [0, 1] and a sidecar `<path>.json` holds
/// {width, height}.
void write_samples(const std::string& path, const Eigen::MatrixXd& samples, int width = 0,
                   int height = 0);

}  // namespace hee
