#include "hee/analyze.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hee/error.hpp"
#include "hee/generate.hpp"
#include "hee/parallel.hpp"

namespace hee {

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Hessian

Eigen::MatrixXd hessian(const ModelSpec& spec, const Params& params, const Layers& x,
                        const QuadratureGrid& grid) {
  const int depth = spec.depth();
  const Activation act = spec.activation;
  std::vector<Eigen::Index> offset(depth + 2, 0);
  for (int l = 1; l <= depth; ++l) offset[l + 1] = offset[l] + spec.sizes[l];
  const Eigen::Index n = offset[depth + 1];
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);

  for (int l = 1; l <= depth; ++l) {
    const Eigen::Index o = offset[l];
    const int nl = spec.sizes[l];
    const VectorXd eta = natural_params(spec, params, x, l);
    const Family fam = spec.families[l];
    for (int i = 0; i < nl; ++i) H(o + i, o + i) += 1.0 - phi_second(fam, x[l][i]) * eta[i];

    // Terms from the layer below, whose natural parameter depends on x_l.
    const VectorXd eta_below = natural_params(spec, params, x, l - 1);
    const Family fam_below = spec.families[l - 1];
    VectorXd err(eta_below.size()), curv(eta_below.size());
    for (Eigen::Index i = 0; i < eta_below.size(); ++i) {
      const PartitionMoments mom = partition_moments(fam_below, eta_below[i], grid);
      err[i] = phi(fam_below, x[l - 1][i]) - mom.mean;
      curv[i] = mom.variance;
    }
    const VectorXd fp = x[l].unaryExpr([act](double a) { return activate_prime(act, a); });
    const VectorXd fpp = x[l].unaryExpr([act](double a) { return activate_second(act, a); });
    const Eigen::MatrixXd& th = params.theta[l - 1];
    const Eigen::MatrixXd scaled = th * fp.asDiagonal();
    H.block(o, o, nl, nl) += scaled.transpose() * curv.asDiagonal() * scaled;
    H.block(o, o, nl, nl).diagonal() -= fpp.cwiseProduct(th.transpose() * err);

    if (l < depth) {
      // d^2 E / dx_l dx_{l+1} = -diag(phi'(x_l)) theta_l diag(f'(x_{l+1}))
      const VectorXd pp = x[l].unaryExpr([fam](double a) { return phi_prime(fam, a); });
      const VectorXd fp_up = x[l + 1].unaryExpr([act](double a) { return activate_prime(act, a); });
      const Eigen::MatrixXd cross = -(pp.asDiagonal() * params.theta[l] * fp_up.asDiagonal());
      H.block(o, offset[l + 1], nl, spec.sizes[l + 1]) = cross;
      H.block(offset[l + 1], o, spec.sizes[l + 1], nl) = cross.transpose();
    }
  }
  return H;
}

HessianReport hj_quantities(const Eigen::MatrixXd& H, const SamplerConfig& config) {
  HessianReport r;
  r.n_total = static_cast<int>(H.rows());
  r.asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (r.asymmetry > 1e-8) throw Error("Hessian is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  r.lambda_min = ev.minCoeff();
  r.singular = r.lambda_min <= 0.0;
  r.log_det = ev.array().abs().log().sum();
  const double adapt = config.m / (2.0 * config.tau_v);
  r.lambda_min_hj = std::min(r.lambda_min / config.tau_z, adapt);
  r.log_det_hj = r.log_det - r.n_total * std::log(config.tau_z) + r.n_total * std::log(adapt);
  return r;
}

Eigen::MatrixXd assemble_hj(const Eigen::MatrixXd& H, const SamplerConfig& config) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topLeftCorner(n, n) = H / config.tau_z;
  J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) / config.tau_z;
  J.bottomRightCorner(n, n) =
      Eigen::MatrixXd::Identity(n, n) * (config.m / (2.0 * config.tau_v));
  return J;
}

// ---------------------------------------------------------------------------
// Depth / width

std::vector<DepthWidthRow> depth_width_experiment(const DepthWidthConfig& config) {
  std::vector<DepthWidthRow> rows;
  for (int depth : config.depths) {
    if (depth < 1 || config.total_units % depth != 0) {
      throw ConfigError("depths", std::to_string(config.total_units) +
                                      " units cannot be split into " + std::to_string(depth) +
                                      " equal layers");
    }
    DepthWidthRow row;
    row.depth = depth;
    row.width = config.total_units / depth;
    std::vector<int> sizes{config.observed_units};
    for (int l = 0; l < depth; ++l) sizes.push_back(row.width);
    const ModelSpec spec = ModelSpec::uniform(sizes, config.family, config.activation);

    row.lambda_min.assign(config.trials, 0.0);
    row.log_det.assign(config.trials, 0.0);
    parallel_for(static_cast<std::size_t>(config.trials), [&](std::size_t t) {
      // Trial t of depth L owns stream (seed, 1000 L + t).
      Rng rng(config.seed, 1000u * static_cast<std::uint64_t>(depth) + t);
      const Params params = Params::random(spec, rng, config.weight_scale);
      std::vector<Layers> draw;
      ancestral_oracle(spec, params, 1, rng, &draw);
      NetworkState state = NetworkState::from_layers(spec, draw[0], true);
      SamplerConfig sc;
      sc.m = 0.0;
      ChainRng chain(config.seed, 1000u * static_cast<std::uint64_t>(depth) + t);
      for (long s = 0; s < config.inference_steps; ++s) {
        ls_step(spec, params, state, sc, chain, Mode::Inference);
      }
      const HessianReport rep = hj_quantities(hessian(spec, params, state.x), sc);
      row.lambda_min[t] = rep.lambda_min;
      row.log_det[t] = rep.log_det;
    });
    row.lambda_min_median = median(row.lambda_min);
    row.log_det_median = median(row.log_det);
    row.lambda_min_mean =
        std::accumulate(row.lambda_min.begin(), row.lambda_min.end(), 0.0) / config.trials;
    row.log_det_mean = std::accumulate(row.log_det.begin(), row.log_det.end(), 0.0) / config.trials;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string depth_width_svg(const std::vector<DepthWidthRow>& rows) {
  const double w = 520, h = 320, left = 70, right = 70, top = 30, bottom = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\""
      << h - bottom << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">layers L</text>\n";
  if (rows.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }

  auto xpos = [&](std::size_t i) {
    return rows.size() == 1 ? (left + w - right) / 2
                            : left + (w - left - right) * static_cast<double>(i) / (rows.size() - 1);
  };
  struct Series {
    const char* name;
    const char* color;
    std::vector<double> v;
    double anchor;  // x of the axis
  };
  std::vector<Series> series{{"median lambda_1(H)", "#1f77b4", {}, left},
                             {"median log det(H)", "#d62728", {}, w - right}};
  for (const auto& r : rows) {
    series[0].v.push_back(r.lambda_min_median);
    series[1].v.push_back(r.log_det_median);
  }
  char buf[64];
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    double lo = *std::min_element(s.v.begin(), s.v.end());
    double hi = *std::max_element(s.v.begin(), s.v.end());
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    auto ypos = [&](double v) { return h - bottom - (h - top - bottom) * (v - lo) / (hi - lo); };
    svg << "<line x1=\"" << s.anchor << "\" y1=\"" << top << "\" x2=\"" << s.anchor << "\" y2=\""
        << h - bottom << "\" stroke=\"" << s.color << "\"/>\n";
    for (double v : {lo, hi}) {
      std::snprintf(buf, sizeof buf, "%.4g", v);
      svg << "<text x=\"" << (k == 0 ? s.anchor - 6 : s.anchor + 6) << "\" y=\"" << ypos(v) + 4
          << "\" text-anchor=\"" << (k == 0 ? "end" : "start") << "\" fill=\"" << s.color << "\">"
          << buf << "</text>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.v.size(); ++i) svg << (i ? " " : "") << xpos(i) << "," << ypos(s.v[i]);
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.v.size(); ++i) {
      svg << "<circle cx=\"" << xpos(i) << "\" cy=\"" << ypos(s.v[i]) << "\" r=\"3\" fill=\""
          << s.color << "\"/>\n";
    }
    svg << "<text x=\"" << (k == 0 ? left : w - right) << "\" y=\"" << top - 10 << "\" text-anchor=\""
        << (k == 0 ? "start" : "end") << "\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    svg << "<text x=\"" << xpos(i) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">"
        << rows[i].depth << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Autocorrelation

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

IactResult iact_report(const std::vector<double>& series) {
  const std::size_t n = series.size();
  IactResult r;
  if (n < 2) {
    r.tau = static_cast<double>(n);
    r.degenerate = true;
    return r;
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  const std::size_t m = next_pow2(2 * n);
  std::vector<double> padded(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = series[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  for (auto& c : spec) c = std::norm(c);
  std::vector<double> acov;
  fft.inv(acov, spec);
  const double c0 = acov[0];
  if (!(c0 > 1e-300 * n)) {
    r.tau = static_cast<double>(n);
    r.degenerate = true;
    return r;
  }
  // Geyer: sum pairs Gamma_k = rho_{2k} + rho_{2k+1} while positive, forced monotone.
  double sum = 0.0, prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double gamma = (acov[2 * k] + acov[2 * k + 1]) / c0;
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    sum += gamma;
  }
  r.tau = std::max(1e-12, -1.0 + 2.0 * sum);
  return r;
}

double iact(const std::vector<double>& series) { return iact_report(series).tau; }

// ---------------------------------------------------------------------------
// Sample comparison

Coverage mode_coverage(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& modes,
                       double radius, double min_mass) {
  Coverage c;
  std::vector<long> counts(modes.rows(), 0);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    Eigen::Index best = -1;
    double best_d = radius * radius;
    for (Eigen::Index k = 0; k < modes.rows(); ++k) {
      const double d = (samples.row(i) - modes.row(k)).squaredNorm();
      if (d <= best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best >= 0) {
      counts[best]++;
      c.assigned++;
    }
  }
  c.mass.assign(modes.rows(), 0.0);
  for (Eigen::Index k = 0; k < modes.rows(); ++k) {
    if (c.assigned > 0) c.mass[k] = static_cast<double>(counts[k]) / c.assigned;
    if (c.assigned > 0 && c.mass[k] >= min_mass) c.covered++;
  }
  return c;
}

double hist_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, const HistGrid& grid) {
  auto histogram = [&](const Eigen::MatrixXd& s) {
    std::vector<double> h(static_cast<std::size_t>(grid.bins) * grid.bins, 1.0);
    const double scale = grid.bins / (grid.hi - grid.lo);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double fx = (s(i, 0) - grid.lo) * scale, fy = (s(i, 1) - grid.lo) * scale;
      if (!(fx >= 0.0 && fx < grid.bins && fy >= 0.0 && fy < grid.bins)) continue;
      h[static_cast<std::size_t>(fx) * grid.bins + static_cast<std::size_t>(fy)] += 1.0;
    }
    const double total = std::accumulate(h.begin(), h.end(), 0.0);
    for (double& v : h) v /= total;
    return h;
  };
  const std::vector<double> hp = histogram(p), hq = histogram(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) kl += hp[i] * std::log(hp[i] / hq[i]);
  return std::max(0.0, kl);
}

namespace {

Eigen::MatrixXd directions(int d, int count, std::uint64_t seed) {
  Eigen::MatrixXd w(count, d);
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = M_PI * k / count;
      w(k, 0) = std::cos(a);
      w(k, 1) = std::sin(a);
    }
    return w;
  }
  Rng rng(seed, 0x534c4943u);
  for (int k = 0; k < count; ++k) {
    for (int j = 0; j < d; ++j) w(k, j) = rng.normal();
    w.row(k).normalize();
  }
  return w;
}

// E_w |<z, w>| = c_d |z| for w uniform on the unit sphere.
double projection_constant(int d) {
  return std::exp(std::lgamma(0.5 * d) - std::lgamma(0.5 * (d + 1))) / std::sqrt(M_PI);
}

// Pooled samples sorted along each direction; the statistic for any split
// of the pool into two groups is then one linear pass per direction.
class ProjectedPool {
 public:
  ProjectedPool(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int count, std::uint64_t seed)
      : n_(x.rows()), m_(y.rows()) {
    if (x.cols() != y.cols()) throw DimensionMismatch("samples differ in dimension");
    const Eigen::MatrixXd w = directions(static_cast<int>(x.cols()), count, seed);
    const Eigen::Index total = n_ + m_;
    values_.resize(count);
    order_.resize(count);
    totals_.resize(count);
    for (int k = 0; k < count; ++k) {
      std::vector<double> proj(total);
      for (Eigen::Index i = 0; i < n_; ++i) proj[i] = x.row(i).dot(w.row(k));
      for (Eigen::Index i = 0; i < m_; ++i) proj[n_ + i] = y.row(i).dot(w.row(k));
      std::vector<int> idx(total);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return proj[a] < proj[b]; });
      values_[k].resize(total);
      double s = 0.0, run = 0.0;
      for (Eigen::Index j = 0; j < total; ++j) {
        values_[k][j] = proj[idx[j]];
        s += j * values_[k][j] - run;
        run += values_[k][j];
      }
      order_[k] = std::move(idx);
      totals_[k] = s;
    }
    scale_ = 1.0 / (projection_constant(static_cast<int>(x.cols())) * count);
  }

  /// in_x[i] marks pool member i as belonging to the first sample.
  double statistic(const std::vector<char>& in_x) const {
    double sum_xx = 0.0, sum_yy = 0.0, sum_xy = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      double cnt[2] = {0.0, 0.0}, run[2] = {0.0, 0.0}, within[2] = {0.0, 0.0};
      const std::vector<double>& v = values_[k];
      const std::vector<int>& idx = order_[k];
      for (std::size_t j = 0; j < v.size(); ++j) {
        const int g = in_x[idx[j]] ? 0 : 1;
        within[g] += cnt[g] * v[j] - run[g];
        cnt[g] += 1.0;
        run[g] += v[j];
      }
      sum_xx += within[0];
      sum_yy += within[1];
      sum_xy += totals_[k] - within[0] - within[1];
    }
    const double n = static_cast<double>(n_), m = static_cast<double>(m_);
    return scale_ * (2.0 * sum_xy / (n * m) - 2.0 * sum_xx / (n * n) - 2.0 * sum_yy / (m * m));
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }

 private:
  Eigen::Index n_, m_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<int>> order_;
  std::vector<double> totals_;
  double scale_ = 1.0;
};

}  // namespace

double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int count,
                       std::uint64_t seed) {
  const ProjectedPool pool(x, y, count, seed);
  std::vector<char> in_x(x.rows() + y.rows(), 0);
  std::fill(in_x.begin(), in_x.begin() + x.rows(), 1);
  return pool.statistic(in_x);
}

TwoSampleResult energy_distance_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                     int permutations, int count, std::uint64_t seed) {
  const ProjectedPool pool(x, y, count, seed);
  std::vector<char> labels(x.rows() + y.rows(), 0);
  std::fill(labels.begin(), labels.begin() + x.rows(), 1);
  TwoSampleResult r;
  r.statistic = pool.statistic(labels);
  r.permutations = permutations;
  Rng rng(seed, 0x5045524du);
  int exceed = 0;
  for (int p = 0; p < permutations; ++p) {
    // Fisher-Yates with the library's portable integer draws.
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
      std::swap(labels[i], labels[rng.below(i + 1)]);
    }
    if (pool.statistic(labels) >= r.statistic) ++exceed;
  }
  r.p_value = (1.0 + exceed) / (1.0 + permutations);
  return r;
}

double sliced_w2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int count,
                 std::uint64_t seed) {
  if (x.cols() != y.cols()) throw DimensionMismatch("samples differ in dimension");
  const Eigen::MatrixXd w = directions(static_cast<int>(x.cols()), count, seed);
  const Eigen::Index q = std::max(x.rows(), y.rows());
  auto quantiles = [q](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out(q);
    for (Eigen::Index i = 0; i < q; ++i) {
      // Linear interpolation of the empirical quantile at (i + 0.5) / q.
      const double pos = (i + 0.5) / q * v.size() - 0.5;
      const double c = std::clamp(pos, 0.0, static_cast<double>(v.size() - 1));
      const std::size_t lo = static_cast<std::size_t>(std::floor(c));
      const std::size_t hi = std::min(lo + 1, v.size() - 1);
      out[i] = v[lo] + (c - lo) * (v[hi] - v[lo]);
    }
    return out;
  };
  double total = 0.0;
  for (int k = 0; k < count; ++k) {
    const VectorXd px = x * w.row(k).transpose(), py = y * w.row(k).transpose();
    const auto a = quantiles(std::vector<double>(px.data(), px.data() + px.size()));
    const auto b = quantiles(std::vector<double>(py.data(), py.data() + py.size()));
    double s = 0.0;
    for (Eigen::Index i = 0; i < q; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    total += s / q;
  }
  return std::sqrt(total / count);
}

// ---------------------------------------------------------------------------
// Oscillations and transients

SpectrumPeak series_peak(const std::vector<double>& series, double interval, double tau_z_ms) {
  SpectrumPeak peak;
  const std::size_t n = series.size();
  std::size_t seg = 1;
  while (seg * 2 <= n / 8) seg *= 2;
  if (seg < 16) return peak;

  std::vector<double> window(seg);
  for (std::size_t i = 0; i < seg; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / seg);
  std::vector<double> power(seg / 2 + 1, 0.0);
  Eigen::FFT<double> fft;
  std::vector<double> buf(seg);
  std::vector<std::complex<double>> out;
  for (std::size_t start = 0; start + seg <= n; start += seg / 2) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += series[start + i];
    mean /= seg;
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (series[start + i] - mean) * window[i];
    fft.fwd(out, buf);
    for (std::size_t k = 0; k <= seg / 2; ++k) power[k] += std::norm(out[k]);
  }
  std::size_t best = 1;
  for (std::size_t k = 2; k <= seg / 2; ++k) {
    if (power[k] > power[best]) best = k;
  }
  const double med = median(std::vector<double>(power.begin() + 1, power.end()));
  peak.has_peak = power[best] >= 3.0 * med && power[best] > 0.0;
  const double cycles_per_tau = best / (seg * interval);
  peak.frequency_hz = cycles_per_tau * 1000.0 / tau_z_ms;
  return peak;
}

namespace {

std::size_t window_records(const ChainRecord& record, double interval, double window) {
  const double n = std::floor(window / interval + 1e-9) + 1.0;
  return std::min(record.size(), static_cast<std::size_t>(n));
}

}  // namespace

std::vector<SpectrumPeak> spectrum_peak(const ChainRecord& record, double interval,
                                        double tau_z_ms, double window) {
  std::vector<SpectrumPeak> peaks;
  if (record.size() == 0) return peaks;
  const std::size_t count = window_records(record, interval, window);
  const Layers& first = record.x.front();
  for (std::size_t l = 1; l < first.size(); ++l) {
    for (Eigen::Index i = 0; i < first[l].size(); ++i) {
      std::vector<double> s(count);
      for (std::size_t t = 0; t < count; ++t) s[t] = record.x[t][l][i];
      SpectrumPeak p = series_peak(s, interval, tau_z_ms);
      p.layer = static_cast<int>(l);
      p.unit = static_cast<int>(i);
      peaks.push_back(p);
    }
  }
  return peaks;
}

double transient_step(const ChainRecord& record, double interval, double window) {
  if (record.size() < 2) return 0.0;
  const std::size_t count = window_records(record, interval, window);
  const Layers& first = record.x.front();
  double total = 0.0;
  int units = 0;
  for (std::size_t l = 1; l < first.size(); ++l) {
    for (Eigen::Index i = 0; i < first[l].size(); ++i) {
      double best = 0.0;
      for (std::size_t t = 1; t < count; ++t) {
        best = std::max(best, std::abs(record.x[t][l][i] - record.x[t - 1][l][i]));
      }
      total += best;
      ++units;
    }
  }
  return units ? total / units : 0.0;
}

}  // namespace hee
