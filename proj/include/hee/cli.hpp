#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hee/expfam.hpp"
#include "hee/generate.hpp"
#include "hee/learn.hpp"
#include "hee/model.hpp"
#include "hee/sampler.hpp"

namespace hee {

/// Where training data comes from: a synthetic 2D generator or IDX files.
struct DataConfig {
  std::string generator;
  int n = 4000;
  std::uint64_t seed = 0;
  std::string images;
  std::string labels;
  long limit = -1;
};

/// Version-1 experiment document:
/// {version, spec, sampler, train, generate, data, quadrature}. Every section
/// except version is optional; unknown keys are rejected.
struct RunConfig {
  ModelSpec spec;
  bool has_spec = false;
  SamplerConfig sampler;
  TrainConfig train;  // train.sampler mirrors `sampler`
  GenerateConfig generate;  // generate.sampler mirrors `sampler`
  DataConfig data;
  QuadratureGrid quadrature = QuadratureGrid::make();

  /// Throws ConfigError naming the offending key.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
};

/// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

/// Entry point of the `hee` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hee
