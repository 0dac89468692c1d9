#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hee/sampler.hpp"

namespace hee {

/// Equal-weight mixture of four isotropic Gaussians with means
/// (+-separation, +-separation) and standard deviation `width`.
struct MixtureEnergy {
  double separation = 1.5;
  double width = 0.5;

  Eigen::MatrixXd modes() const;
  /// grad log p at x.
  void drift(const VectorXd& x, VectorXd& out) const;
};

struct BenchConfig {
  std::vector<double> ms{0.0, 2.0, 4.0, 8.0};
  int seeds = 20;
  /// Steps per chain for the IACT estimate.
  long steps = 100000;
  /// Modes visited are counted over the first explore_steps steps only;
  /// over the full run every chain eventually visits all four.
  long explore_steps = 6000;
  double dt = 0.01;
  MixtureEnergy energy;
  std::uint64_t seed = 0;
};

struct BenchRow {
  double m = 0.0;
  int seed = 0;
  /// Largest IACT of the two coordinates, in steps.
  double iact = 0.0;
  /// Distinct modes whose centre the chain came within `width` of.
  int modes_visited = 0;
  double wallclock_s = 0.0;
};

/// LS (m = 0) and SLD chains on the mixture, all started at the
/// (-separation, -separation) mode. Chain `seed` uses the same noise streams
/// for every m. Rows are ordered by m, then seed.
std::vector<BenchRow> bench_sampler(const BenchConfig& config);

/// Columns m, seed, iact, modes_visited, wallclock_s.
void write_bench(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace hee
