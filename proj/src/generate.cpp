#include "hee/generate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hee/analyze.hpp"
#include "hee/data.hpp"
#include "hee/error.hpp"
#include "hee/parallel.hpp"

namespace hee {

namespace {

void advance(const ModelSpec& spec, const Params& params, NetworkState& state,
             const SamplerConfig& config, ChainRng& rng, Mode mode) {
  if (config.m > 0.0) {
    sld_step(spec, params, state, config, rng, mode);
  } else {
    ls_step(spec, params, state, config, rng, mode);
  }
}

NetworkState free_state(const ModelSpec& spec) {
  return NetworkState::init(spec, VectorXd::Zero(spec.sizes[0]), false);
}

// One chain, burn-in, pilot IACT estimate, then thinned harvesting.
Eigen::MatrixXd harvest_single(const ModelSpec& spec, const Params& params,
                               const GenerateConfig& config, int n, Mode mode) {
  const SamplerConfig& sc = config.sampler;
  ChainRng rng(sc.seed, 0);
  NetworkState state = free_state(spec);
  for (long s = 0; s < sc.burn_in; ++s) advance(spec, params, state, sc, rng, mode);

  long thin = config.thin;
  if (thin <= 0) {
    std::vector<std::vector<double>> pilot(spec.sizes[0]);
    for (long s = 0; s < config.pilot_steps; ++s) {
      advance(spec, params, state, sc, rng, mode);
      for (int i = 0; i < spec.sizes[0]; ++i) pilot[i].push_back(state.x[0][i]);
    }
    double tau = 1.0;
    for (const auto& series : pilot) tau = std::max(tau, iact(series));
    thin = std::max(1L, static_cast<long>(std::ceil(10.0 * tau)));
  }

  Eigen::MatrixXd out(n, spec.sizes[0]);
  for (int i = 0; i < n; ++i) {
    for (long s = 0; s < thin; ++s) advance(spec, params, state, sc, rng, mode);
    out.row(i) = state.x[0].transpose();
  }
  return out;
}

Eigen::MatrixXd harvest_many(const ModelSpec& spec, const Params& params,
                             const GenerateConfig& config, int n, Mode mode) {
  const SamplerConfig& sc = config.sampler;
  Eigen::MatrixXd out(n, spec.sizes[0]);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t c) {
    ChainRng rng(sc.seed, c);
    NetworkState state = free_state(spec);
    for (long s = 0; s < std::max(1L, sc.burn_in); ++s) advance(spec, params, state, sc, rng, mode);
    out.row(static_cast<Eigen::Index>(c)) = state.x[0].transpose();
  });
  return out;
}

}  // namespace

Eigen::MatrixXd joint_generate(const ModelSpec& spec, const Params& params,
                               const GenerateConfig& config, int n) {
  config.sampler.validate();
  return config.many_chains ? harvest_many(spec, params, config, n, Mode::JointGeneration)
                            : harvest_single(spec, params, config, n, Mode::JointGeneration);
}

Eigen::MatrixXd marginal_generate(const ModelSpec& spec, const Params& params,
                                  const GenerateConfig& config, int n, bool staged) {
  const SamplerConfig& sc = config.sampler;
  sc.validate();
  if (!staged) {
    return config.many_chains ? harvest_many(spec, params, config, n, Mode::MarginalGeneration)
                              : harvest_single(spec, params, config, n, Mode::MarginalGeneration);
  }
  Eigen::MatrixXd out(n, spec.sizes[0]);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t c) {
    ChainRng rng(sc.seed, c);
    NetworkState state = free_state(spec);
    VectorXd drift;
    for (int l = spec.depth(); l >= 0; --l) {
      const double tau = l == 0 ? sc.tau_x : sc.tau_z;
      Rng* v_rng = (sc.m > 0.0 && l >= 1) ? &rng.v : nullptr;
      for (long s = 0; s < config.stage_steps; ++s) {
        drift = drift_prior(spec, params, state.x, l);
        advance_units(state.x[l], state.v[l], drift, tau, sc, rng.x, v_rng);
      }
      if (!state.x[l].allFinite()) throw NonFiniteError("non-finite state in staged generation");
    }
    out.row(static_cast<Eigen::Index>(c)) = state.x[0].transpose();
  });
  return out;
}

Eigen::MatrixXd ancestral_oracle(const ModelSpec& spec, const Params& params, int n, Rng& rng,
                                 std::vector<Layers>* layers) {
  Eigen::MatrixXd out(n, spec.sizes[0]);
  if (layers) layers->clear();
  for (int s = 0; s < n; ++s) {
    Layers x(spec.depth() + 1);
    for (int l = spec.depth(); l >= 0; --l) {
      x[l] = VectorXd::Zero(spec.sizes[l]);
      const VectorXd eta = natural_params(spec, params, x, l);
      for (int i = 0; i < spec.sizes[l]; ++i) {
        x[l][i] = sample_conditional_scalar(spec.families[l], eta[i], rng);
      }
    }
    out.row(s) = x[0].transpose();
    if (layers) layers->push_back(std::move(x));
  }
  return out;
}

void write_samples(const std::string& path, const Eigen::MatrixXd& samples, int width, int height) {
  const bool image = width > 0 && height > 0;
  if (image && static_cast<Eigen::Index>(width) * height != samples.cols()) {
    throw DimensionMismatch("image shape " + std::to_string(width) + "x" + std::to_string(height) +
                            " does not match " + std::to_string(samples.cols()) + " columns");
  }
  if (!image) {
    write_csv(path, column_names(static_cast<int>(samples.cols())), samples);
    return;
  }
  write_csv(path, column_names(static_cast<int>(samples.cols()), "p"),
            samples.cwiseMax(0.0).cwiseMin(1.0));
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot write " + path + ".json");
  side << nlohmann::json{{"width", width}, {"height", height}}.dump() << "\n";
}

}  // namespace hee
