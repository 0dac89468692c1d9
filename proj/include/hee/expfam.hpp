#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hee/rng.hpp"

namespace hee {

/// Sufficient statistic of a layer: phi(x) = x or phi(x) = sigmoid(x).
/// The base measure is fixed to g(x) = -x^2/2 for every family.
enum class Family { Linear, Sigmoid };

/// Activation f in eta_l = theta_l f(x_{l+1}).
enum class Activation { Identity, Tanh, Sigmoid };

/// Natural parameters must stay inside [-kEtaLimit, kEtaLimit].
inline constexpr double kEtaLimit = 50.0;

std::string_view to_string(Family family);
std::string_view to_string(Activation activation);
/// Throws ConfigError on an unknown name.
Family parse_family(std::string_view name);
Activation parse_activation(std::string_view name);

double sigmoid(double x);

double phi(Family family, double x);
double phi_prime(Family family, double x);
double phi_second(Family family, double x);

inline double base_measure(double x) { return -0.5 * x * x; }
inline double base_measure_prime(double x) { return -x; }

double activate(Activation activation, double x);
double activate_prime(Activation activation, double x);
double activate_second(Activation activation, double x);

/// Trapezoid rule on a uniform grid of offsets in [-half_width, half_width].
/// The integration window is re-centred on the mode of each integrand, so
/// the same grid serves every natural parameter in the supported range.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double half_width = 12.0;
  int count = 401;

  /// Throws ConfigError if count < 201 or half_width <= 0.
  static QuadratureGrid make(double half_width = 12.0, int count = 401);
};

/// Default grid (401 nodes over [-12, 12]).
const QuadratureGrid& default_grid();
/// Replaces the default grid. Not synchronized: call before any sampling.
void set_default_grid(const QuadratureGrid& grid);

/// A(eta) together with its first two derivatives.
struct PartitionMoments {
  double log_partition = 0.0;
  double mean = 0.0;      // A'(eta) = E[phi(x)]
  double variance = 0.0;  // A''(eta) = Var[phi(x)]
};

/// Location of the maximum of eta * phi(x) + g(x). The log-density is unimodal
/// for both families, so this is the single mode.
double conditional_mode(Family family, double eta);

PartitionMoments partition_moments(Family family, double eta,
                                   const QuadratureGrid& grid = default_grid());

double log_partition(Family family, double eta, const QuadratureGrid& grid = default_grid());
double mean_suff_stat(Family family, double eta, const QuadratureGrid& grid = default_grid());
double var_suff_stat(Family family, double eta, const QuadratureGrid& grid = default_grid());

/// Inverse-CDF table for the density exp(eta * phi(x) + g(x) - A(eta)):
/// 4096 cells over mode +/- 12, piecewise-linear CDF.
class ConditionalTable {
 public:
  static constexpr int kCells = 4096;
  static constexpr double kHalfWidth = 12.0;

  ConditionalTable(Family family, double eta);

  double draw(Rng& rng) const;

 private:
  double lo_;
  double step_;
  std::vector<double> cdf_;
};

/// One exact draw from the scalar conditional density. Consumes one uniform.
double sample_conditional_scalar(Family family, double eta, Rng& rng);

}  // namespace hee
