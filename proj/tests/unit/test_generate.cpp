#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "../support/oracles.hpp"
#include "hee/analyze.hpp"
#include "hee/data.hpp"
#include "hee/error.hpp"
#include "hee/generate.hpp"

using namespace hee;

namespace {

MatrixXd sample_cov(const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd c = s.rowwise() - s.colwise().mean();
  return c.transpose() * c / static_cast<double>(s.rows() - 1);
}

// Mean within 4 standard errors; covariance entries within 4 SE of a
// Gaussian sample covariance.
void check_gaussian(const Eigen::MatrixXd& s, const VectorXd& mean, const MatrixXd& cov) {
  const double n = static_cast<double>(s.rows());
  const VectorXd m = s.colwise().mean().transpose();
  const MatrixXd c = sample_cov(s);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    CHECK(std::abs(m[i] - mean[i]) < 4.0 * std::sqrt(cov(i, i) / n));
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n);
      CHECK(std::abs(c(i, j) - cov(i, j)) < 4.0 * se);
    }
  }
}

// x_0 | x_1 ~ N(theta x_1, I), x_1 ~ N(eta_top, I).
struct LinearMarginal {
  ModelSpec spec = ModelSpec::uniform({2, 2}, Family::Linear, Activation::Identity);
  Params params = Params::zeros(spec);
  LinearMarginal() {
    params.theta[0] << 0.8, -0.4, 0.3, 0.6;
    params.eta_top << 0.5, -1.0;
  }
  VectorXd mean() const { return params.theta[0] * params.eta_top; }
  MatrixXd cov(double shrink = 1.0) const {
    return MatrixXd::Identity(2, 2) + shrink * params.theta[0] * params.theta[0].transpose();
  }
};

}  // namespace

TEST_CASE("ancestral oracle") {
  SUBCASE("zero weights give a standard normal") {
    const ModelSpec spec = ModelSpec::uniform({2, 3}, Family::Linear);
    Rng rng(3);
    const Eigen::MatrixXd s = ancestral_oracle(spec, Params::zeros(spec), 20000, rng);
    check_gaussian(s, VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  }
  SUBCASE("each layer follows its conditional") {
    ModelSpec spec;
    spec.sizes = {2, 3};
    spec.families = {Family::Sigmoid, Family::Sigmoid};
    Rng rng(5);
    Params p = Params::random(spec, rng, 2.0);
    p.eta_top << 1.3, -0.6, 0.2;
    std::vector<Layers> layers;
    ancestral_oracle(spec, p, 20000, rng, &layers);
    REQUIRE(layers.size() == 20000);
    // E[phi(x_l) - A'(eta_l)] = 0 for every unit.
    for (int l = 0; l <= 1; ++l) {
      for (int i = 0; i < spec.sizes[l]; ++i) {
        std::vector<double> resid;
        for (const Layers& x : layers) {
          const double eta = natural_params(spec, p, x, l)[i];
          resid.push_back(oracle::plain_sigmoid(x[l][i]) - mean_suff_stat(Family::Sigmoid, eta));
        }
        double m = 0.0, v = 0.0;
        for (double r : resid) m += r;
        m /= resid.size();
        for (double r : resid) v += (r - m) * (r - m);
        v /= resid.size() - 1;
        CHECK(std::abs(m) < 4.0 * std::sqrt(v / resid.size()));
      }
    }
  }
  SUBCASE("deterministic given the seed") {
    const ModelSpec spec = ModelSpec::uniform({2, 2}, Family::Sigmoid);
    Rng a(9), b(9), init(1);
    const Params p = Params::random(spec, init);
    CHECK(ancestral_oracle(spec, p, 50, a) == ancestral_oracle(spec, p, 50, b));
  }
}

TEST_CASE("joint generation with zero weights") {
  const ModelSpec spec = ModelSpec::uniform({2, 2}, Family::Linear);
  GenerateConfig c;
  c.many_chains = true;
  c.sampler.burn_in = 1000;
  c.sampler.seed = 11;
  const Eigen::MatrixXd s = joint_generate(spec, Params::zeros(spec), c, 3000);
  check_gaussian(s, VectorXd::Zero(2), MatrixXd::Identity(2, 2));
}

TEST_CASE("staged marginal generation is exact for the linear model") {
  const LinearMarginal lm;
  GenerateConfig c;
  c.stage_steps = 1500;
  c.sampler.seed = 21;
  for (double m : {0.0, 4.0}) {
    CAPTURE(m);
    c.sampler.m = m;
    const Eigen::MatrixXd s = marginal_generate(lm.spec, lm.params, c, 3000, true);
    check_gaussian(s, lm.mean(), lm.cov());
  }
}

TEST_CASE("simultaneous marginal generation shows the lag bias") {
  // The filtered parent has variance 1 / (1 + tau_x / tau_z).
  const LinearMarginal lm;
  GenerateConfig c;
  c.many_chains = true;
  c.sampler.m = 0.0;
  c.sampler.burn_in = 2000;
  c.sampler.seed = 22;
  const Eigen::MatrixXd s = marginal_generate(lm.spec, lm.params, c, 3000, false);
  check_gaussian(s, lm.mean(), lm.cov(0.5));
}

TEST_CASE("staged generation matches ancestral draws on a nonlinear model") {
  ModelSpec spec;
  spec.sizes = {2, 4};
  spec.families = {Family::Linear, Family::Sigmoid};
  Rng rng(14);
  Params p = Params::random(spec, rng, 3.0);
  p.eta_top << 2.0, -2.0, 1.0, 0.0;
  const Eigen::MatrixXd exact = ancestral_oracle(spec, p, 1000, rng);
  GenerateConfig c;
  c.stage_steps = 1500;
  c.sampler.seed = 5;
  const Eigen::MatrixXd staged = marginal_generate(spec, p, c, 1000, true);
  CHECK(energy_distance_test(exact, staged, 199).p_value > 0.01);
}

TEST_CASE("single-chain harvesting") {
  const ModelSpec spec = ModelSpec::uniform({2, 2}, Family::Linear);
  GenerateConfig c;
  c.sampler.burn_in = 200;
  c.pilot_steps = 2000;
  c.sampler.seed = 3;
  const Eigen::MatrixXd a = joint_generate(spec, Params::zeros(spec), c, 40);
  const Eigen::MatrixXd b = joint_generate(spec, Params::zeros(spec), c, 40);
  CHECK(a.rows() == 40);
  CHECK(a.cols() == 2);
  CHECK(a == b);
  c.thin = 7;
  CHECK(joint_generate(spec, Params::zeros(spec), c, 5).rows() == 5);
  c.sampler.dt = 0.5;
  CHECK_THROWS_AS(joint_generate(spec, Params::zeros(spec), c, 5), ConfigError);
}

TEST_CASE("write_samples") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "hee_test_generate";
  std::filesystem::create_directories(dir);
  Eigen::MatrixXd s(2, 4);
  s << 0.5, -0.2, 1.7, 0.25, 0.0, 1.0, 0.3, 0.9;

  const std::string plain = (dir / "plain.csv").string();
  write_samples(plain, s);
  CsvTable t = read_csv(plain);
  CHECK(t.header == std::vector<std::string>{"x0", "x1", "x2", "x3"});
  CHECK(t.rows == s);
  CHECK_FALSE(std::filesystem::exists(plain + ".json"));

  const std::string image = (dir / "image.csv").string();
  write_samples(image, s, 2, 2);
  t = read_csv(image);
  CHECK(t.header[0] == "p0");
  CHECK(t.rows(0, 1) == 0.0);
  CHECK(t.rows(0, 2) == 1.0);
  CHECK(t.rows(1, 3) == 0.9);
  std::ifstream side(image + ".json");
  std::string text((std::istreambuf_iterator<char>(side)), {});
  CHECK(text.find("\"width\":2") != std::string::npos);
  CHECK(text.find("\"height\":2") != std::string::npos);

  CHECK_THROWS_AS(write_samples(image, s, 3, 2), DimensionMismatch);
}
