#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hee/model.hpp"
#include "hee/sampler.hpp"

namespace hee {

enum class UpdateMode {
  /// Run the inference chain, then one update from its final state.
  EndOfInference,
  /// Update after every outer step while the chain runs.
  Online,
};

std::string_view to_string(UpdateMode mode);
/// Accepts "end_of_inference" and "online"; throws ConfigError("train.update_mode").
UpdateMode parse_update_mode(std::string_view name);

struct TrainConfig {
  /// Learning rate at the first update; decays linearly to
  /// lr * lr_end_fraction at the last one.
  double lr = 0.01;
  double lr_end_fraction = 0.1;
  int epochs = 1;
  int batch_size = 16;
  long inference_steps = 100;
  UpdateMode update_mode = UpdateMode::EndOfInference;
  SamplerConfig sampler;
  /// Held-out energy is logged every eval_every updates (and at the start
  /// and the end).
  long eval_every = 50;
  int eval_size = 256;
  double heldout_fraction = 0.1;
  /// Diverged when the held-out energy rises above its initial value by
  /// (factor - 1) * |initial|.
  double divergence_factor = 10.0;
  bool learn_top = true;
  /// Use phi(x_l) - A'(eta_l) from quadrature instead of the interneuron
  /// error units.
  bool exact_errors = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Error signal of every layer: entries 0..L-1 are the layer errors, entry
/// L is phi(x_L) - A'(eta_top).
using Errors = std::vector<VectorXd>;

/// Interneuron error units from the state, plus the top-layer error.
Errors local_errors(const ModelSpec& spec, const Params& params, const NetworkState& state);
/// phi(x_l) - A'(eta_l) from quadrature for every layer.
Errors exact_errors(const ModelSpec& spec, const Params& params, const Layers& x);

/// Update direction: theta_l gets eps_l f(x_{l+1})^T, eta_top gets eps_L
/// (zero when learn_top is false). With exact errors this is -d energy / d params.
Params hebbian_direction(const ModelSpec& spec, const Layers& x, const Errors& eps,
                         bool learn_top = true);

/// params + lr * hebbian_direction(...).
Params hebbian_update(const ModelSpec& spec, const Params& params, const Layers& x,
                      const Errors& eps, double lr, bool learn_top = true);

struct TrainingLogRow {
  long step = 0;
  double heldout_energy = 0.0;
  double lr = 0.0;
  double wallclock_s = 0.0;
};

struct TrainingLog {
  std::vector<TrainingLogRow> rows;
};

/// Columns step, heldout_energy, lr, wallclock_s.
void write_training_log(const std::string& path, const TrainingLog& log);

/// Mean exact energy over held-out examples, each evaluated at the end of a
/// clamped inference run. Chain seeds are fixed, so repeated calls with the
/// same params agree.
double heldout_energy(const ModelSpec& spec, const Params& params, const Eigen::MatrixXd& data,
                      const TrainConfig& config);

struct TrainResult {
  Params params;
  TrainingLog log;
};

/// The last heldout_fraction of the rows is held out; the rest is shuffled
/// every epoch and consumed in batches of batch_size independent chains.
/// Throws Diverged when the held-out energy blows up or the weights leave
/// the admissible range.
TrainResult train(const ModelSpec& spec, const Params& params0, const Eigen::MatrixXd& data,
                  const TrainConfig& config);

}  // namespace hee
