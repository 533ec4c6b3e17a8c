#include "qbreathe/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "qbreathe/fft_guard.hpp"

namespace qbreathe::spectral {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::complex<double>> dft_forward(const std::vector<double>& x) {
  const int n = int(x.size());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  std::vector<double> in(x);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  if (!plan) throw numeric_error("fftw: failed to create r2c plan");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

Spectrum power_spectrum(const TimeSeries& series, const SpectrumOptions& opt) {
  series.validate();
  if (opt.zero_pad_factor < 1)
    throw config_error("power_spectrum: zero_pad_factor must be >= 1");

  const int n = series.count();
  std::vector<double> x(series.samples);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  for (double& v : x) v -= mean;

  if (opt.window == Window::Hann) {
    for (int j = 0; j < n; ++j)
      x[j] *= 0.5 * (1.0 - std::cos(2.0 * kPi * j / n));
  }

  const int n_pad = n * opt.zero_pad_factor;
  x.resize(n_pad, 0.0);

  auto fx = dft_forward(x);

  Spectrum spec;
  spec.dt = series.dt;
  spec.n_samples = n;
  spec.window = opt.window;
  spec.domega = 2.0 * kPi / (n_pad * series.dt);
  spec.magnitude.resize(fx.size());
  for (std::size_t k = 0; k < fx.size(); ++k)
    spec.magnitude[k] = std::abs(fx[k]) * series.dt;
  return spec;
}

std::vector<PeakCandidate> find_peaks(const Spectrum& spec, double min_prominence) {
  if (!(min_prominence > 0.0 && min_prominence < 1.0))
    throw config_error("find_peaks: min_prominence must be in (0,1)");
  const auto& m = spec.magnitude;
  const int n = spec.size();
  if (n < 3) return {};
  const double peak_floor = *std::max_element(m.begin(), m.end()) * min_prominence;

  std::vector<PeakCandidate> out;
  for (int k = 1; k + 1 < n; ++k) {
    if (!(m[k] > m[k - 1] && m[k] >= m[k + 1])) continue;
    // prominence: height above the higher of the two bracketing saddles,
    // walking out to the nearest strictly higher bins (or the ends)
    double left_min = m[k];
    for (int j = k - 1; j >= 0; --j) {
      if (m[j] > m[k]) break;
      left_min = std::min(left_min, m[j]);
      if (j == 0) left_min = std::min(left_min, m[0]);
    }
    double right_min = m[k];
    for (int j = k + 1; j < n; ++j) {
      if (m[j] > m[k]) break;
      right_min = std::min(right_min, m[j]);
    }
    const double prominence = m[k] - std::max(left_min, right_min);
    if (prominence >= peak_floor) {
      out.push_back(PeakCandidate{k, spec.omega_at(k), m[k], prominence});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PeakCandidate& a, const PeakCandidate& b) { return a.height > b.height; });
  return out;
}

LorentzFit fit_lorentzian(const Spectrum& spec, int peak_bin, int window_bins,
                          double residual_threshold) {
  if (window_bins < 5) throw config_error("fit_lorentzian: window_bins must be >= 5");
  const int n = spec.size();
  if (peak_bin < 0 || peak_bin >= n) throw config_error("fit_lorentzian: peak bin out of range");

  const int half = window_bins / 2;
  const int lo = std::max(0, peak_bin - half);
  const int hi = std::min(n - 1, peak_bin + half);
  const int m = hi - lo + 1;
  if (m < 5) throw config_error("fit_lorentzian: window clipped below 5 bins");

  Eigen::VectorXd w(m), y(m);
  for (int i = 0; i < m; ++i) {
    w[i] = spec.omega_at(lo + i);
    y[i] = spec.magnitude[lo + i];
  }

  // model: A gamma^2 / ((w-w0)^2 + gamma^2) + b
  double w0 = spec.omega_at(peak_bin);
  double gamma = 2.0 * spec.domega;
  double b = std::min(y[0], y[m - 1]);
  double amp = spec.magnitude[peak_bin] - b;
  if (amp <= 0.0) amp = spec.magnitude[peak_bin];

  Eigen::Vector4d p(w0, gamma, amp, b);
  double lambda = 1e-3;
  auto eval = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = w[i] - q[0];
      const double g2 = q[1] * q[1];
      const double den = d * d + g2;
      const double core = g2 / den;
      const double model = q[2] * core + q[3];
      r[i] = y[i] - model;
      rss += r[i] * r[i];
      if (jac) {
        (*jac)(i, 0) = q[2] * g2 * 2.0 * d / (den * den);           // d/dw0
        (*jac)(i, 1) = q[2] * 2.0 * q[1] * d * d / (den * den);     // d/dgamma
        (*jac)(i, 2) = core;                                        // d/dA
        (*jac)(i, 3) = 1.0;                                         // d/db
      }
    }
    return rss;
  };

  Eigen::VectorXd r(m);
  Eigen::MatrixXd jac(m, 4);
  double rss = eval(p, r, &jac);
  for (int it = 0; it < 200; ++it) {
    Eigen::Matrix4d jtj = jac.transpose() * jac;
    Eigen::Vector4d jtr = jac.transpose() * r;
    Eigen::Matrix4d damped = jtj;
    for (int d = 0; d < 4; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-30);
    Eigen::Vector4d step = damped.ldlt().solve(jtr);
    Eigen::Vector4d pn = p + step;
    pn[1] = std::abs(pn[1]);
    Eigen::VectorXd rn(m);
    const double rss_n = eval(pn, rn, nullptr);
    if (rss_n < rss) {
      p = pn;
      r = rn;
      rss = rss_n;
      lambda = std::max(lambda * 0.3, 1e-12);
      eval(p, r, &jac);
      if (step.cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, p.cwiseAbs().maxCoeff())) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  LorentzFit fit;
  fit.center = p[0];
  fit.half_width = std::abs(p[1]);
  fit.amplitude = p[2];
  fit.offset = p[3];
  double y_rms = 0.0;
  for (int i = 0; i < m; ++i) y_rms += y[i] * y[i];
  fit.residual = std::sqrt(rss / std::max(y_rms, 1e-300));
  fit.flagged = fit.residual > residual_threshold;

  // covariance estimate for the center, floored at the record resolution
  Eigen::Matrix4d jtj = jac.transpose() * jac;
  double var = 0.0;
  if (m > 4) {
    Eigen::Matrix4d cov = jtj.ldlt().solve(Eigen::Matrix4d::Identity());
    var = std::abs(cov(0, 0)) * rss / (m - 4);
  }
  fit.sigma = std::max(std::sqrt(var), spec.resolution());
  return fit;
}

PeakSet fit_peaks(const Spectrum& spec, double min_prominence, int window_bins) {
  PeakSet set;
  set.resolution = spec.resolution();
  for (const auto& cand : find_peaks(spec, min_prominence)) {
    LorentzFit f = fit_lorentzian(spec, cand.bin, window_bins);
    // window sidelobes produce degenerate fits (flagged residual, negative or
    // runaway amplitude, widths far beyond the record resolution, or centers
    // that slid off the candidate); those never enter the peak set
    if (f.flagged || f.amplitude <= 0.0) continue;
    if (f.half_width > 20.0 * set.resolution) continue;
    if (std::abs(f.center - cand.omega) > 3.0 * set.resolution) continue;
    set.peaks.push_back(Peak{f.center, f.half_width, f.amplitude, f.residual, f.sigma});
  }
  std::sort(set.peaks.begin(), set.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.amplitude > b.amplitude; });
  return set;
}

SineFit fit_sine(const TimeSeries& series, double residual_threshold) {
  series.validate();
  const int n = series.count();

  // spectrum seed
  SpectrumOptions opt;
  opt.window = Window::Hann;
  opt.zero_pad_factor = 4;
  Spectrum spec = power_spectrum(series, opt);
  int kmax = 1;
  for (int k = 2; k < spec.size(); ++k)
    if (spec.magnitude[k] > spec.magnitude[kmax]) kmax = k;
  const double w_seed = spec.omega_at(kmax);
  if (w_seed <= 0.0)
    throw numeric_error("fit_sine: no oscillatory component found");

  // profile out the linear parameters (offset, cos, sin) and minimize the
  // residual sum over the frequency alone
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = series.time_at(i);
    y[i] = series.samples[i];
  }
  Eigen::Vector3d lin;
  auto rss_at = [&](double w) {
    Eigen::MatrixXd a(n, 3);
    for (int i = 0; i < n; ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(w * t[i]);
      a(i, 2) = std::sin(w * t[i]);
    }
    lin = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    return (y - a * lin).squaredNorm();
  };

  // golden-section search around the seed
  const double gr = 0.61803398874989485;
  double a = std::max(w_seed - 2.0 * spec.resolution(), 0.25 * w_seed);
  double b = w_seed + 2.0 * spec.resolution();
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = rss_at(c), fd = rss_at(d);
  for (int it = 0; it < 120 && (b - a) > 1e-13 * w_seed; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = rss_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = rss_at(d);
    }
  }
  const double w_fit = 0.5 * (a + b);
  const double rss = rss_at(w_fit);

  SineFit fit;
  fit.frequency = w_fit;
  fit.offset = lin[0];
  fit.amplitude = std::hypot(lin[1], lin[2]);
  fit.phase = std::atan2(-lin[2], lin[1]);
  double sig = 0.0;
  for (int i = 0; i < n; ++i) sig += (y[i] - lin[0]) * (y[i] - lin[0]);
  fit.residual = std::sqrt(rss / std::max(sig, 1e-300));
  if (fit.residual > residual_threshold)
    throw numeric_error("fit_sine: residual " + std::to_string(fit.residual) +
                        " above threshold " + std::to_string(residual_threshold) +
                        "; signal is not single-mode, use the spectral pipeline");
  return fit;
}

void write_spectrum_csv(const Spectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& provenance,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (const auto& [k, v] : provenance) out << "# " << k << " = " << v << "\n";
  out << "# resolution = " << fmt(spec.resolution()) << "\n";
  out << "omega,magnitude\n";
  for (int k = 0; k < spec.size(); ++k)
    out << fmt(spec.omega_at(k)) << "," << fmt(spec.magnitude[k]) << "\n";
}

void write_peaks_csv(const PeakSet& peaks,
                     const std::vector<std::pair<std::string, std::string>>& provenance,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (const auto& [k, v] : provenance) out << "# " << k << " = " << v << "\n";
  out << "# resolution = " << fmt(peaks.resolution) << "\n";
  out << "center,width,amplitude,sigma\n";
  for (const auto& p : peaks.peaks)
    out << fmt(p.center) << "," << fmt(p.half_width) << "," << fmt(p.amplitude) << ","
        << fmt(p.sigma) << "\n";
}

}  // namespace qbreathe::spectral
