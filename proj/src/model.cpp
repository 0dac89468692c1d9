#include "hee/model.hpp"

#include <cmath>

#include "hee/error.hpp"

namespace hee {

ModelSpec ModelSpec::uniform(std::vector<int> sizes, Family family, Activation activation) {
  ModelSpec spec;
  spec.families.assign(sizes.size(), family);
  spec.sizes = std::move(sizes);
  spec.activation = activation;
  return spec;
}

int ModelSpec::latent_units() const {
  int total = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) total += sizes[l];
  return total;
}

void ModelSpec::validate() const {
  if (sizes.size() < 2) throw ConfigError("spec.sizes", "need an observation layer and at least one latent layer");
  for (int n : sizes) {
    if (n < 1) throw ConfigError("spec.sizes", "every layer needs at least one unit");
  }
  if (families.size() != sizes.size()) {
    throw ConfigError("spec.families", "need one family per layer");
  }
}

Params Params::zeros(const ModelSpec& spec) {
  Params p;
  for (int l = 0; l < spec.depth(); ++l) {
    p.theta.push_back(MatrixXd::Zero(spec.sizes[l], spec.sizes[l + 1]));
  }
  p.eta_top = VectorXd::Zero(spec.sizes.back());
  return p;
}

Params Params::random(const ModelSpec& spec, Rng& rng, double scale) {
  Params p = zeros(spec);
  for (int l = 0; l < spec.depth(); ++l) {
    const double a = scale / std::sqrt(static_cast<double>(spec.sizes[l + 1]));
    MatrixXd& t = p.theta[l];
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = a * (2.0 * rng.uniform() - 1.0);
    }
  }
  return p;
}

void Params::validate(const ModelSpec& spec) const {
  if (static_cast<int>(theta.size()) != spec.depth()) {
    throw ConfigError("theta", "expected " + std::to_string(spec.depth()) + " weight matrices");
  }
  for (int l = 0; l < spec.depth(); ++l) {
    if (theta[l].rows() != spec.sizes[l] || theta[l].cols() != spec.sizes[l + 1]) {
      throw ConfigError("theta", "matrix " + std::to_string(l) + " has the wrong shape");
    }
    if (!theta[l].allFinite()) throw ConfigError("theta", "non-finite weight");
  }
  if (eta_top.size() != spec.sizes.back()) throw ConfigError("eta_top", "wrong length");
  if (!eta_top.allFinite()) throw ConfigError("eta_top", "non-finite value");
}

NetworkState NetworkState::init(const ModelSpec& spec, const VectorXd& x0, bool clamped) {
  Layers layers;
  layers.push_back(x0);
  for (int l = 1; l <= spec.depth(); ++l) layers.push_back(VectorXd::Zero(spec.sizes[l]));
  return from_layers(spec, std::move(layers), clamped);
}

NetworkState NetworkState::from_layers(const ModelSpec& spec, Layers layers, bool clamped) {
  NetworkState s;
  s.x = std::move(layers);
  s.clamped_x0 = clamped;
  for (int l = 0; l < spec.depth(); ++l) s.u.push_back(s.x[l]);
  for (int l = 0; l <= spec.depth(); ++l) s.v.push_back(VectorXd::Zero(spec.sizes[l]));
  s.eps.resize(spec.depth());
  s.refresh_eps(spec);
  return s;
}

void NetworkState::refresh_eps(const ModelSpec& spec) {
  for (int l = 0; l < spec.depth(); ++l) {
    const Family fam = spec.families[l];
    eps[l] = x[l].unaryExpr([fam](double a) { return phi(fam, a); }) -
             u[l].unaryExpr([fam](double a) { return phi(fam, a); });
  }
}

VectorXd natural_params(const ModelSpec& spec, const Params& params, const Layers& x, int l) {
  if (l == spec.depth()) return params.eta_top;
  const Activation act = spec.activation;
  VectorXd eta = params.theta[l] * x[l + 1].unaryExpr([act](double a) { return activate(act, a); });
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (!std::isfinite(eta[i]) || std::abs(eta[i]) > kEtaLimit) {
      throw EtaOutOfRange(l, static_cast<int>(i), eta[i]);
    }
  }
  return eta;
}

double layer_energy(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                    const QuadratureGrid& grid) {
  const VectorXd eta = natural_params(spec, params, x, l);
  const Family fam = spec.families[l];
  double e = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    e -= eta[i] * phi(fam, x[l][i]) + base_measure(x[l][i]) - log_partition(fam, eta[i], grid);
  }
  return e;
}

double energy(const ModelSpec& spec, const Params& params, const Layers& x,
              const QuadratureGrid& grid) {
  double e = 0.0;
  for (int l = 0; l <= spec.depth(); ++l) e += layer_energy(spec, params, x, l, grid);
  return e;
}

VectorXd drift_prior(const ModelSpec& spec, const Params& params, const Layers& x, int l) {
  const VectorXd eta = natural_params(spec, params, x, l);
  const Family fam = spec.families[l];
  VectorXd d(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    d[i] = phi_prime(fam, x[l][i]) * eta[i] + base_measure_prime(x[l][i]);
  }
  return d;
}

VectorXd drift_feedback(const ModelSpec& spec, const Params& params, const Layers& x,
                        const VectorXd& eps_below, int l) {
  const Activation act = spec.activation;
  const VectorXd back = params.theta[l - 1].transpose() * eps_below;
  return x[l].unaryExpr([act](double a) { return activate_prime(act, a); }).cwiseProduct(back);
}

VectorXd drift_x(const ModelSpec& spec, const Params& params, const NetworkState& state, int l) {
  VectorXd d = drift_prior(spec, params, state.x, l);
  if (l >= 1) d += drift_feedback(spec, params, state.x, state.eps[l - 1], l);
  return d;
}

VectorXd exact_eps(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                   const QuadratureGrid& grid) {
  const VectorXd eta = natural_params(spec, params, x, l);
  const Family fam = spec.families[l];
  VectorXd e(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    e[i] = phi(fam, x[l][i]) - mean_suff_stat(fam, eta[i], grid);
  }
  return e;
}

VectorXd energy_gradient(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                         const QuadratureGrid& grid) {
  VectorXd d = drift_prior(spec, params, x, l);
  if (l >= 1) d += drift_feedback(spec, params, x, exact_eps(spec, params, x, l - 1, grid), l);
  return -d;
}

VectorXd flatten_latents(const Layers& x) {
  Eigen::Index total = 0;
  for (std::size_t l = 1; l < x.size(); ++l) total += x[l].size();
  VectorXd flat(total);
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < x.size(); ++l) {
    flat.segment(offset, x[l].size()) = x[l];
    offset += x[l].size();
  }
  return flat;
}

void unflatten_latents(const VectorXd& flat, Layers& x) {
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < x.size(); ++l) {
    x[l] = flat.segment(offset, x[l].size());
    offset += x[l].size();
  }
}

}  // namespace hee
