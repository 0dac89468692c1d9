#include <doctest.h>

#include <cmath>
#include <numeric>

#include "../support/oracles.hpp"
#include "hee/checkpoint.hpp"
#include "hee/error.hpp"
#include "hee/model.hpp"

using namespace hee;

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

Layers random_layers(const ModelSpec& spec, Rng& rng, double scale = 1.0) {
  Layers x;
  for (int n : spec.sizes) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    x.push_back(v);
  }
  return x;
}

// A small random model with mixed families.
ModelSpec random_spec(Rng& rng) {
  ModelSpec spec;
  const int depth = 1 + static_cast<int>(rng.below(3));
  for (int l = 0; l <= depth; ++l) {
    spec.sizes.push_back(1 + static_cast<int>(rng.below(4)));
    spec.families.push_back(rng.uniform() < 0.5 ? Family::Linear : Family::Sigmoid);
  }
  const Activation acts[] = {Activation::Identity, Activation::Tanh, Activation::Sigmoid};
  spec.activation = acts[rng.below(3)];
  return spec;
}

Params random_params(const ModelSpec& spec, Rng& rng) {
  Params p = Params::random(spec, rng, 1.5);
  for (Eigen::Index i = 0; i < p.eta_top.size(); ++i) p.eta_top[i] = rng.normal();
  return p;
}

// Energy from the dense trapezoid oracle, written out layer by layer.
double oracle_energy(const ModelSpec& spec, const Params& params, const Layers& x) {
  double e = 0.0;
  for (int l = 0; l <= spec.depth(); ++l) {
    VectorXd eta = params.eta_top;
    if (l < spec.depth()) {
      VectorXd fx = x[l + 1];
      for (Eigen::Index i = 0; i < fx.size(); ++i) fx[i] = activate(spec.activation, fx[i]);
      eta = params.theta[l] * fx;
    }
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double xi = x[l][i];
      e -= eta[i] * oracle::stat(spec.families[l], xi) - 0.5 * xi * xi -
           oracle::dense(spec.families[l], eta[i]).log_partition;
    }
  }
  return e;
}

double rel_norm(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-12); }

}  // namespace

TEST_CASE("natural parameters") {
  const ModelSpec spec = ModelSpec::uniform({2, 2}, Family::Linear, Activation::Tanh);
  Params p = Params::zeros(spec);
  Layers x{VectorXd::Zero(2), VectorXd::Constant(2, 0.7)};
  CHECK(natural_params(spec, p, x, 0).isZero(0.0));

  p.eta_top << 0.3, -0.4;
  x[0] << 9.0, 9.0;
  CHECK(natural_params(spec, p, x, 1) == p.eta_top);

  p.theta[0] = Eigen::MatrixXd::Identity(2, 2);
  x[1].setZero();
  CHECK(natural_params(spec, p, x, 0).isZero(0.0));

  p.theta[0] *= 100.0;
  x[1] << 1.0, 0.0;
  try {
    natural_params(spec, p, x, 0);
    FAIL("expected EtaOutOfRange");
  } catch (const EtaOutOfRange& e) {
    CHECK(e.layer() == 0);
    CHECK(e.unit() == 0);
  }
}

TEST_CASE("energy examples") {
  const ModelSpec spec = ModelSpec::uniform({3, 2}, Family::Linear);
  const Params p = Params::zeros(spec);
  Layers x{VectorXd::Zero(3), VectorXd::Zero(2)};
  const double e0 = energy(spec, p, x);
  CHECK(std::abs(e0 - 5.0 * kLnSqrt2Pi) < 1e-9);
  x[1][1] = 1.3;
  CHECK(std::abs(energy(spec, p, x) - e0 - 0.5 * 1.3 * 1.3) < 1e-9);
}

TEST_CASE("energy agrees with the dense oracle composition") {
  ModelSpec spec;
  spec.sizes = {3, 2, 2};
  spec.families = {Family::Linear, Family::Sigmoid, Family::Sigmoid};
  spec.activation = Activation::Tanh;
  Rng rng(3);
  const Params p = random_params(spec, rng);
  for (int k = 0; k < 5; ++k) {
    const Layers x = random_layers(spec, rng);
    const double oracle_e = oracle_energy(spec, p, x);
    CHECK(std::abs(energy(spec, p, x) - oracle_e) < 1e-6 * std::max(1.0, std::abs(oracle_e)));
  }
}

TEST_CASE("drift examples") {
  const ModelSpec spec = ModelSpec::uniform({2, 3, 2}, Family::Linear);
  Params p = Params::zeros(spec);
  NetworkState s = NetworkState::init(spec, VectorXd::Zero(2), true);
  for (int l = 0; l <= spec.depth(); ++l) CHECK(drift_x(spec, p, s, l).isZero(0.0));

  // Prior-only drift: Linear layer with eta = 2 at x = 0.
  p.eta_top.setConstant(2.0);
  CHECK(drift_prior(spec, p, s.x, 2).isApprox(VectorXd::Constant(2, 2.0)));

  // drift_x = drift_prior + feedback for any state.
  Rng rng(9);
  Params q = random_params(spec, rng);
  NetworkState t = NetworkState::from_layers(spec, random_layers(spec, rng), true);
  for (int l = 0; l < spec.depth(); ++l) t.u[l] = random_layers(spec, rng)[l];
  t.refresh_eps(spec);
  const VectorXd split = drift_prior(spec, q, t.x, 1) + drift_feedback(spec, q, t.x, t.eps[0], 1);
  CHECK((drift_x(spec, q, t, 1) - split).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient identity on random models") {
  Rng rng(2024);
  const double h = 1e-5;
  for (int trial = 0; trial < 6; ++trial) {
    const ModelSpec spec = random_spec(rng);
    const Params p = random_params(spec, rng);
    Layers x = random_layers(spec, rng);
    for (int l = 1; l <= spec.depth(); ++l) {
      VectorXd fd(spec.sizes[l]);
      for (int i = 0; i < spec.sizes[l]; ++i) {
        Layers a = x, b = x;
        a[l][i] += h;
        b[l][i] -= h;
        fd[i] = (energy(spec, p, a) - energy(spec, p, b)) / (2 * h);
      }
      // Drift with exact error terms in place of the interneuron estimate.
      NetworkState s = NetworkState::from_layers(spec, x, true);
      s.eps[l - 1] = exact_eps(spec, p, x, l - 1);
      const VectorXd drift = drift_x(spec, p, s, l);
      CHECK(rel_norm(-drift, fd) < 1e-5);
      CHECK(rel_norm(energy_gradient(spec, p, x, l), fd) < 1e-5);
    }
  }
}

TEST_CASE("factorization and permutation invariance") {
  ModelSpec spec;
  spec.sizes = {3, 4, 2};
  spec.families = {Family::Sigmoid, Family::Linear, Family::Sigmoid};
  spec.activation = Activation::Sigmoid;
  Rng rng(17);
  Params p = random_params(spec, rng);
  Layers x = random_layers(spec, rng);

  double sum = 0.0;
  for (int l = 0; l <= spec.depth(); ++l) sum += layer_energy(spec, p, x, l);
  CHECK(std::abs(sum - energy(spec, p, x)) < 1e-12 * std::abs(sum));

  // Permute the units of layer 1 (columns of theta_0, rows of theta_1).
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.indices() << 2, 0, 3, 1;
  Params q = p;
  q.theta[0] = p.theta[0] * perm.transpose();
  q.theta[1] = perm * p.theta[1];
  Layers y = x;
  y[1] = perm * x[1];
  CHECK(std::abs(energy(spec, q, y) - energy(spec, p, x)) < 1e-10);
}

TEST_CASE("linear model matches the Gaussian closed form") {
  Rng rng(5);
  const ModelSpec spec = ModelSpec::uniform({3, 2, 2}, Family::Linear, Activation::Identity);
  const Params p = random_params(spec, rng);
  for (int k = 0; k < 5; ++k) {
    const Layers x = random_layers(spec, rng);
    double closed = 0.0;
    for (int l = 0; l <= spec.depth(); ++l) {
      const VectorXd mean = l == spec.depth() ? p.eta_top : VectorXd(p.theta[l] * x[l + 1]);
      closed += 0.5 * (x[l] - mean).squaredNorm() + spec.sizes[l] * kLnSqrt2Pi;
    }
    CHECK(std::abs(energy(spec, p, x) - closed) < 1e-8);
  }
}

TEST_CASE("state initialization and derived error units") {
  const ModelSpec spec = ModelSpec::uniform({2, 3}, Family::Sigmoid);
  VectorXd x0(2);
  x0 << 0.4, -1.0;
  NetworkState s = NetworkState::init(spec, x0, true);
  CHECK(s.x[1].isZero(0.0));
  CHECK(s.u[0] == s.x[0]);
  CHECK(s.eps[0].isZero(0.0));
  CHECK(s.v.size() == 2);
  CHECK(s.v[1].isZero(0.0));

  Layers x{VectorXd::Ones(2), VectorXd::Ones(3)};
  const VectorXd flat = flatten_latents(x);
  CHECK(flat.size() == 3);
  Layers y{VectorXd::Zero(2), VectorXd::Zero(3)};
  unflatten_latents(flat, y);
  CHECK(y[1] == x[1]);
}

TEST_CASE("spec validation") {
  ModelSpec spec = ModelSpec::uniform({2}, Family::Linear);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = ModelSpec::uniform({2, 0}, Family::Linear);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = ModelSpec::uniform({2, 3}, Family::Linear);
  spec.families.pop_back();
  try {
    spec.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "spec.families");
  }
}

TEST_CASE("checkpoint round trip") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelSpec spec = random_spec(rng);
    const Params p = random_params(spec, rng);
    const std::string text = checkpoint_to_json(spec, p);
    const Checkpoint c = checkpoint_from_json(text);
    CHECK(c.spec.sizes == spec.sizes);
    CHECK(c.spec.families == spec.families);
    CHECK(c.spec.activation == spec.activation);
    CHECK(c.params.eta_top == p.eta_top);
    for (int l = 0; l < spec.depth(); ++l) CHECK(c.params.theta[l] == p.theta[l]);
    CHECK(checkpoint_to_json(c.spec, c.params) == text);
  }
  CHECK_THROWS_AS(checkpoint_from_json("{\"version\": 1}"), ConfigError);
  try {
    checkpoint_from_json(R"({"version":1,"spec":{"L":1,"families":["linear","linear"],"activation":"tanh"},"eta_top":[0],"theta":[[0]]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "spec.sizes");
  }
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.json"), IoError);
}
