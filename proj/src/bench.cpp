#include "hee/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hee/analyze.hpp"
#include "hee/data.hpp"
#include "hee/parallel.hpp"

namespace hee {

Eigen::MatrixXd MixtureEnergy::modes() const {
  Eigen::MatrixXd m(4, 2);
  for (int k = 0; k < 4; ++k) {
    m(k, 0) = (k & 1) ? separation : -separation;
    m(k, 1) = (k & 2) ? separation : -separation;
  }
  return m;
}

void MixtureEnergy::drift(const VectorXd& x, VectorXd& out) const {
  const double inv = 1.0 / (width * width);
  double logw[4];
  double top = -INFINITY;
  for (int k = 0; k < 4; ++k) {
    const double a = x[0] - ((k & 1) ? separation : -separation);
    const double b = x[1] - ((k & 2) ? separation : -separation);
    logw[k] = -0.5 * inv * (a * a + b * b);
    top = std::max(top, logw[k]);
  }
  double z = 0.0;
  for (double& w : logw) {
    w = std::exp(w - top);
    z += w;
  }
  out = VectorXd::Zero(2);
  for (int k = 0; k < 4; ++k) {
    out[0] += logw[k] / z * (((k & 1) ? separation : -separation) - x[0]) * inv;
    out[1] += logw[k] / z * (((k & 2) ? separation : -separation) - x[1]) * inv;
  }
}

std::vector<BenchRow> bench_sampler(const BenchConfig& config) {
  const std::size_t n_m = config.ms.size();
  std::vector<BenchRow> rows(n_m * config.seeds);
  const Eigen::MatrixXd modes = config.energy.modes();
  const DriftFn drift = [&](const VectorXd& x, VectorXd& out) { config.energy.drift(x, out); };

  parallel_for(rows.size(), [&](std::size_t r) {
    const auto start = std::chrono::steady_clock::now();
    BenchRow& row = rows[r];
    row.m = config.ms[r / config.seeds];
    row.seed = static_cast<int>(r % config.seeds);
    SamplerConfig sc;
    sc.dt = config.dt;
    sc.m = row.m;
    sc.validate();
    ChainRng rng(config.seed, static_cast<std::uint64_t>(row.seed));
    VectorXd x = modes.row(0).transpose();
    VectorXd v = VectorXd::Zero(2);
    bool seen[4] = {true, false, false, false};
    std::vector<double> s0, s1;
    s0.reserve(config.steps);
    s1.reserve(config.steps);
    for (long t = 0; t < config.steps; ++t) {
      potential_step(drift, x, v, sc, rng.x, rng.v);
      if (t < config.explore_steps) {
        for (int k = 0; k < 4; ++k) {
          if ((x - modes.row(k).transpose()).norm() < config.energy.width) seen[k] = true;
        }
      }
      s0.push_back(x[0]);
      s1.push_back(x[1]);
    }
    row.modes_visited = seen[0] + seen[1] + seen[2] + seen[3];
    row.iact = std::max(iact(s0), iact(s1));
    row.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return rows;
}

void write_bench(const std::string& path, const std::vector<BenchRow>& rows) {
  Eigen::MatrixXd out(rows.size(), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(i) << rows[i].m, rows[i].seed, rows[i].iact, rows[i].modes_visited, rows[i].wallclock_s;
  }
  write_csv(path, {"m", "seed", "iact", "modes_visited", "wallclock_s"}, out);
}

}  // namespace hee
