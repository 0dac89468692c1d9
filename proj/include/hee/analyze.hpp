#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hee/model.hpp"
#include "hee/sampler.hpp"

namespace hee {

/// Analytic Hessian of the energy with respect to the concatenated latents
/// (x_1, ..., x_L), x_0 held fixed. Log-partition second derivatives come
/// from quadrature, so the result is exact up to quadrature error.
Eigen::MatrixXd hessian(const ModelSpec& spec, const Params& params, const Layers& x,
                        const QuadratureGrid& grid = default_grid());

struct HessianReport {
  double lambda_min = 0.0;
  double log_det = 0.0;
  double lambda_min_hj = 0.0;
  double log_det_hj = 0.0;
  int n_total = 0;
  /// Some eigenvalue of H is zero or negative; log_det is then log|det H|
  /// (or -inf when exactly singular).
  bool singular = false;
  double asymmetry = 0.0;
};

/// lambda_1(H) and log|det H| from a symmetric eigendecomposition;
/// lambda_1(H_J) = min(lambda_1(H) / tau_z, m / (2 tau_v)) and
/// log det H_J = log det H - n log tau_z + n log(m / (2 tau_v)).
/// Throws Error if H is asymmetric beyond 1e-8.
HessianReport hj_quantities(const Eigen::MatrixXd& H, const SamplerConfig& config);

/// The 2n x 2n linearized drift matrix of the second-order dynamics,
/// d(x, v)/dt = -H_J (x, v): [[H / tau_z, I / tau_z], [0, m / (2 tau_v) I]].
Eigen::MatrixXd assemble_hj(const Eigen::MatrixXd& H, const SamplerConfig& config);

struct DepthWidthRow {
  int depth = 0;
  int width = 0;
  double lambda_min_median = 0.0;
  double log_det_median = 0.0;
  double lambda_min_mean = 0.0;
  double log_det_mean = 0.0;
  std::vector<double> lambda_min;  // per trial
  std::vector<double> log_det;
};

struct DepthWidthConfig {
  int total_units = 64;
  std::vector<int> depths{1, 2, 4, 8};
  int trials = 10;
  int observed_units = 8;
  Family family = Family::Sigmoid;
  Activation activation = Activation::Tanh;
  /// theta entries uniform on [-a, a], a = weight_scale / sqrt(n_{l+1}).
  double weight_scale = 1.0;
  /// Inference steps run from an exact joint draw before H is evaluated.
  long inference_steps = 100;
  std::uint64_t seed = 0;
};

/// For each depth L: latent layers of total_units / L units; per trial a
/// random model, an exact ancestral draw of all layers (so the latents are
/// an exact posterior draw given x_0), a short inference run with x_0
/// clamped, then lambda_1(H) and log det H at the final state.
std::vector<DepthWidthRow> depth_width_experiment(const DepthWidthConfig& config);

/// Two-series line chart of median lambda_1 and median log det against L.
std::string depth_width_svg(const std::vector<DepthWidthRow>& rows);

struct IactResult {
  double tau = 0.0;
  /// Zero-variance series: tau is set to the series length.
  bool degenerate = false;
};

/// Integrated autocorrelation time with Geyer's initial positive sequence
/// truncation; autocovariances via FFT.
IactResult iact_report(const std::vector<double>& series);
double iact(const std::vector<double>& series);

struct Coverage {
  int covered = 0;
  std::vector<double> mass;  // fraction of assigned samples per mode
  long assigned = 0;
};

/// Each sample goes to its nearest mode when within `radius`; a mode is
/// covered when it holds at least `min_mass` of the assigned samples.
Coverage mode_coverage(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& modes,
                       double radius = 0.9, double min_mass = 0.05);

struct HistGrid {
  int bins = 64;
  double lo = -4.0;
  double hi = 4.0;
};

/// KL(P || Q) between 2D histograms with one pseudo-count per cell.
/// Points outside the grid are dropped.
double hist_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, const HistGrid& grid = {});

struct TwoSampleResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

/// Energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| in its projection form:
/// |z| = c_d E_w |<z, w>| over unit directions w, evaluated with
/// `directions` directions (evenly spaced angles in 2D, seeded Gaussian
/// directions otherwise). Each 1D term is exact via sorting.
double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int directions = 180,
                       std::uint64_t seed = 0);

/// Permutation test of equal distributions with the statistic above.
TwoSampleResult energy_distance_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                     int permutations = 199, int directions = 180,
                                     std::uint64_t seed = 0);

/// Sliced 2-Wasserstein distance (root mean squared 1D W2 over directions).
double sliced_w2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int directions = 180,
                 std::uint64_t seed = 0);

struct SpectrumPeak {
  int layer = 0;
  int unit = 0;
  double frequency_hz = 0.0;
  bool has_peak = false;
};

/// Welch periodogram (Hann window, segments of the largest power of two
/// <= N/8, 50% overlap) of each latent unit's trajectory over the first
/// `window` tau_z. `interval` is the time between records in tau_z. The
/// dominant nonzero bin is converted to Hz with tau_z_ms; a unit has no peak
/// when the maximum power is below 3 x the median.
std::vector<SpectrumPeak> spectrum_peak(const ChainRecord& record, double interval,
                                        double tau_z_ms = 10.0, double window = 100.0);
SpectrumPeak series_peak(const std::vector<double>& series, double interval, double tau_z_ms);

/// Mean over latent units of the largest |x(t+1) - x(t)| between consecutive
/// records within the first `window` tau_z.
double transient_step(const ChainRecord& record, double interval, double window = 100.0);

double median(std::vector<double> values);

}  // namespace hee
