#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbreathe/common.hpp"
#include "qbreathe/timeseries.hpp"

// Frequency extraction from <X^2>(t): one-sided magnitude spectrum, peak
// detection, local Lorentzian fits with sub-bin centers, and a plain sine
// fit for single-mode signals.  Frequencies are angular throughout.

namespace qbreathe::spectral {

enum class Window { None, Hann };

struct SpectrumOptions {
  Window window = Window::Hann;
  int zero_pad_factor = 4;
};

struct Spectrum {
  double domega = 0.0;            // bin spacing (angular)
  std::vector<double> magnitude;  // k = 0 .. n_pad/2, |X(omega_k)| * dt
  double dt = 0.0;
  int n_samples = 0;              // before padding
  Window window = Window::None;

  double omega_at(int k) const { return domega * k; }
  int size() const { return int(magnitude.size()); }
  // resolution of the underlying record, 2*pi/(n*dt); padding does not
  // sharpen it
  double resolution() const { return 2.0 * kPi / (n_samples * dt); }
  double nyquist() const { return kPi / dt; }
};

// Magnitude spectrum of the mean-detrended series.
Spectrum power_spectrum(const TimeSeries& series, const SpectrumOptions& opt = {});

struct PeakCandidate {
  int bin = 0;
  double omega = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

// Local maxima with prominence >= min_prominence * max(magnitude),
// sorted by height, largest first.  min_prominence in (0,1).
std::vector<PeakCandidate> find_peaks(const Spectrum& spec, double min_prominence);

struct LorentzFit {
  double center = 0.0;     // angular frequency
  double half_width = 0.0; // HWHM
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;   // rms residual / rms data in the window
  double sigma = 0.0;      // center uncertainty: max(fit covariance, resolution)
  bool flagged = false;    // residual above threshold; never silent
};

// Least-squares Lorentzian over a window of window_bins around the peak bin.
LorentzFit fit_lorentzian(const Spectrum& spec, int peak_bin, int window_bins = 13,
                          double residual_threshold = 0.25);

struct Peak {
  double center = 0.0;
  double half_width = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;
  double sigma = 0.0;
};

struct PeakSet {
  std::vector<Peak> peaks;   // sorted by amplitude, largest first
  double resolution = 0.0;   // Delta omega = 2*pi/(count*dt)
};

// find_peaks + fit_lorentzian for each candidate.
PeakSet fit_peaks(const Spectrum& spec, double min_prominence = 0.05,
                  int window_bins = 13);

struct SineFit {
  double frequency = 0.0;  // angular
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double residual = 0.0;   // rms residual / rms(signal - offset)
};

// offset + A cos(w t + phi) by nonlinear least squares, seeded from the
// spectrum maximum.  Throws numeric_error when the residual exceeds
// residual_threshold (multi-mode signal: use the spectral pipeline).
SineFit fit_sine(const TimeSeries& series, double residual_threshold = 0.05);

void write_spectrum_csv(const Spectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& provenance,
                        const std::string& path);
void write_peaks_csv(const PeakSet& peaks,
                     const std::vector<std::pair<std::string, std::string>>& provenance,
                     const std::string& path);

}  // namespace qbreathe::spectral
