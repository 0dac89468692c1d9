#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hee/expfam.hpp"
#include "hee/rng.hpp"

namespace hee {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Per-layer values x_0..x_L.
using Layers = std::vector<VectorXd>;

/// Shape of a hierarchical model: observation layer 0 and latent layers 1..L.
struct ModelSpec {
  std::vector<int> sizes;         // n_0..n_L
  std::vector<Family> families;   // one per layer 0..L
  Activation activation = Activation::Tanh;

  /// Same family on every layer.
  static ModelSpec uniform(std::vector<int> sizes, Family family,
                           Activation activation = Activation::Tanh);

  int depth() const { return static_cast<int>(sizes.size()) - 1; }
  int latent_units() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Learnable weights. theta[l] has shape n_l x n_{l+1}; eta_top is the
/// constant natural parameter of the top layer.
struct Params {
  std::vector<MatrixXd> theta;
  VectorXd eta_top;

  static Params zeros(const ModelSpec& spec);
  /// theta entries i.i.d. uniform on [-a, a] with a = scale / sqrt(n_{l+1});
  /// eta_top = 0.
  static Params random(const ModelSpec& spec, Rng& rng, double scale = 1.0);

  void validate(const ModelSpec& spec) const;
};

/// All neuron values of one chain.
///
/// `eps[l]` is derived state (phi(x_l) - phi(u_l)); it is stored so that the
/// learning rule reads only values held by the two adjacent layers.
/// `v[0]` exists for indexing convenience and always stays zero: the
/// observation layer has no adaptation current.
struct NetworkState {
  Layers x;                 // x_0..x_L
  std::vector<VectorXd> u;  // u_0..u_{L-1}
  std::vector<VectorXd> eps;
  std::vector<VectorXd> v;  // v_0..v_L
  bool clamped_x0 = true;

  /// Latents at zero, interneurons at x, adaptation at zero.
  static NetworkState init(const ModelSpec& spec, const VectorXd& x0, bool clamped);
  /// Given latents; interneurons start at x and eps is refreshed.
  static NetworkState from_layers(const ModelSpec& spec, Layers layers, bool clamped);

  void refresh_eps(const ModelSpec& spec);
};

/// eta_l = theta_l f(x_{l+1}); eta_top for l = L. Throws EtaOutOfRange.
VectorXd natural_params(const ModelSpec& spec, const Params& params, const Layers& x, int l);

/// -ln p(x_0..x_L), with every log-partition evaluated by quadrature.
double energy(const ModelSpec& spec, const Params& params, const Layers& x,
              const QuadratureGrid& grid = default_grid());

/// Negative log-density of layer l given its parent.
double layer_energy(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                    const QuadratureGrid& grid = default_grid());

/// phi'(x_l) eta_l + g'(x_l): the prior part of the drift.
VectorXd drift_prior(const ModelSpec& spec, const Params& params, const Layers& x, int l);

/// f'(x_l) theta_{l-1}^T eps_{l-1}: feedback from the error units below (l >= 1).
VectorXd drift_feedback(const ModelSpec& spec, const Params& params, const Layers& x,
                        const VectorXd& eps_below, int l);

/// Deterministic drift of x_l. Layers l >= 1 receive feedback from
/// state.eps[l-1]; layer 0 only has the prior part.
VectorXd drift_x(const ModelSpec& spec, const Params& params, const NetworkState& state, int l);

/// phi(x_l) - A'(eta_l) with A' from quadrature (the value eps_l estimates).
VectorXd exact_eps(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                   const QuadratureGrid& grid = default_grid());

/// Analytic d energy / d x_l (exact error terms); equals -drift_x with eps exact.
VectorXd energy_gradient(const ModelSpec& spec, const Params& params, const Layers& x, int l,
                         const QuadratureGrid& grid = default_grid());

/// Concatenate latent layers 1..L into one vector and back.
VectorXd flatten_latents(const Layers& x);
void unflatten_latents(const VectorXd& flat, Layers& x);

}  // namespace hee
