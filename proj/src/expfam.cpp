#include "hee/expfam.hpp"

#include <algorithm>
#include <cmath>

#include "hee/error.hpp"

namespace hee {

std::string_view to_string(Family family) {
  return family == Family::Linear ? "linear" : "sigmoid";
}

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::Identity:
      return "identity";
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
  }
  return "identity";
}

Family parse_family(std::string_view name) {
  if (name == "linear") return Family::Linear;
  if (name == "sigmoid") return Family::Sigmoid;
  throw ConfigError("family", "unknown family '" + std::string(name) + "'");
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("activation", "unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double phi(Family family, double x) { return family == Family::Linear ? x : sigmoid(x); }

double phi_prime(Family family, double x) {
  if (family == Family::Linear) return 1.0;
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

double phi_second(Family family, double x) {
  if (family == Family::Linear) return 0.0;
  const double s = sigmoid(x);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

double activate(Activation activation, double x) {
  switch (activation) {
    case Activation::Identity:
      return x;
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Sigmoid:
      return sigmoid(x);
  }
  return x;
}

double activate_prime(Activation activation, double x) {
  switch (activation) {
    case Activation::Identity:
      return 1.0;
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

double activate_second(Activation activation, double x) {
  switch (activation) {
    case Activation::Identity:
      return 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
  }
  return 0.0;
}

QuadratureGrid QuadratureGrid::make(double half_width, int count) {
  if (count < 201) throw ConfigError("quadrature.count", "must be at least 201");
  if (!(half_width > 0.0)) throw ConfigError("quadrature.half_width", "must be positive");
  QuadratureGrid grid;
  grid.half_width = half_width;
  grid.count = count;
  grid.nodes.resize(count);
  grid.weights.assign(count, 2.0 * half_width / (count - 1));
  for (int i = 0; i < count; ++i) {
    grid.nodes[i] = -half_width + 2.0 * half_width * i / (count - 1);
  }
  grid.weights.front() *= 0.5;
  grid.weights.back() *= 0.5;
  return grid;
}

namespace {
QuadratureGrid& mutable_default_grid() {
  static QuadratureGrid grid = QuadratureGrid::make();
  return grid;
}
}  // namespace

const QuadratureGrid& default_grid() { return mutable_default_grid(); }

void set_default_grid(const QuadratureGrid& grid) { mutable_default_grid() = grid; }

namespace {

void check_eta(double eta) {
  if (!std::isfinite(eta)) throw NonFiniteError("non-finite natural parameter");
  if (std::abs(eta) > kEtaLimit) throw EtaOutOfRange(-1, -1, eta);
}

double log_density_unnormalized(Family family, double eta, double x) {
  return eta * phi(family, x) + base_measure(x);
}

}  // namespace

double conditional_mode(Family family, double eta) {
  if (family == Family::Linear) return eta;
  // Stationary points satisfy x = eta * sigmoid'(x), which has one root
  // between 0 and eta / 4 because sigmoid' <= 1/4 and decreases in |x|.
  double lo = std::min(0.0, 0.25 * eta);
  double hi = std::max(0.0, 0.25 * eta);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double slope = eta * phi_prime(family, mid) - mid;
    if (slope > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PartitionMoments partition_moments(Family family, double eta, const QuadratureGrid& grid) {
  check_eta(eta);
  const double center = conditional_mode(family, eta);
  const double peak = log_density_unnormalized(family, eta, center);

  double mass = 0.0;
  double first = 0.0;
  for (int i = 0; i < grid.count; ++i) {
    const double x = center + grid.nodes[i];
    const double w = grid.weights[i] * std::exp(log_density_unnormalized(family, eta, x) - peak);
    mass += w;
    first += w * phi(family, x);
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) throw NonFiniteError("log-partition integrand");
  const double mean = first / mass;

  double second = 0.0;
  for (int i = 0; i < grid.count; ++i) {
    const double x = center + grid.nodes[i];
    const double w = grid.weights[i] * std::exp(log_density_unnormalized(family, eta, x) - peak);
    const double d = phi(family, x) - mean;
    second += w * d * d;
  }

  PartitionMoments out;
  out.log_partition = peak + std::log(mass);
  out.mean = mean;
  out.variance = second / mass;
  return out;
}

double log_partition(Family family, double eta, const QuadratureGrid& grid) {
  return partition_moments(family, eta, grid).log_partition;
}

double mean_suff_stat(Family family, double eta, const QuadratureGrid& grid) {
  return partition_moments(family, eta, grid).mean;
}

double var_suff_stat(Family family, double eta, const QuadratureGrid& grid) {
  return partition_moments(family, eta, grid).variance;
}

ConditionalTable::ConditionalTable(Family family, double eta) {
  check_eta(eta);
  const double center = conditional_mode(family, eta);
  const double peak = log_density_unnormalized(family, eta, center);
  lo_ = center - kHalfWidth;
  step_ = 2.0 * kHalfWidth / kCells;

  cdf_.resize(kCells + 1);
  cdf_[0] = 0.0;
  double prev = std::exp(log_density_unnormalized(family, eta, lo_) - peak);
  for (int i = 1; i <= kCells; ++i) {
    const double x = lo_ + step_ * i;
    const double cur = std::exp(log_density_unnormalized(family, eta, x) - peak);
    cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * step_;
    prev = cur;
  }
  const double total = cdf_.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw NonFiniteError("sampler table");
  for (double& c : cdf_) c /= total;
}

double ConditionalTable::draw(Rng& rng) const {
  const double target = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  const auto cell = std::clamp<std::ptrdiff_t>(it - cdf_.begin() - 1, 0, kCells - 1);
  const double c0 = cdf_[cell];
  const double c1 = cdf_[cell + 1];
  const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
  return lo_ + step_ * (static_cast<double>(cell) + frac);
}

double sample_conditional_scalar(Family family, double eta, Rng& rng) {
  return ConditionalTable(family, eta).draw(rng);
}

}  // namespace hee
