#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbreathe/cache.hpp"
#include "qbreathe/config.hpp"
#include "qbreathe/spectral.hpp"
#include "qbreathe/timeseries.hpp"

// Experiment orchestration: one config in, CSV artifacts out, with result
// caching, (g, N) sweeps over a worker pool, and mean-field hyperbola
// overlays for the contour data.

namespace qbreathe::driver {

struct RunResult {
  std::filesystem::path dir;           // cache directory holding the artifacts
  bool from_cache = false;
  double breathing_freq_over_omega = 0.0;
  double sigma_over_omega = 0.0;       // resolution-floored uncertainty
  spectral::PeakSet peaks;
  TimeSeries series;
};

// engine -> series.csv -> spectrum.csv/peaks.csv -> result.json, all under
// the config-hash cache directory; identical configs reuse the entry.
RunResult run_experiment(const ExperimentConfig& config);

// The breathing frequency of the lowest band: of the two strongest fitted
// peaks the lower-frequency (relative-motion) one; the nominal CM line is
// dropped when a distinct partner exists.
std::optional<spectral::Peak> select_breathing_peak(const spectral::PeakSet& peaks,
                                                    double omega_post);

struct ContourRow {
  double g = 0.0;
  int n_particles = 0;
  std::string engine;
  double freq_over_omega = 0.0;
  double sigma_over_omega = 0.0;
  std::string meta;     // M or grid summary
  std::string error;    // non-empty when the point failed
};

struct ContourTable {
  std::vector<ContourRow> rows;  // sorted by (g, N, engine)
};

// Parallel sweep over sweep_g x sweep_n; per-point results are cached, so a
// killed sweep resumes with only the missing points.
ContourTable sweep(const ExperimentConfig& config);

void write_contour_csv(const ContourTable& table, const std::string& path);
ContourTable read_contour_csv(const std::string& path);

struct OverlayRow {
  double level = 0.0;       // anchored frequency (omega/Omega units)
  int n_particles = 0;
  double g_hyperbola = 0.0; // g with g (N-1) = const
  double deviation = 0.0;   // freq(g_hyp, N) - level; NaN outside the table
};

struct OverlayTable {
  std::vector<OverlayRow> rows;
  std::vector<std::string> notes;  // skipped levels etc.
};

// Constant-g(N-1) hyperbolas anchored at the largest N of the table, one per
// requested frequency level, with the pointwise deviation of the measured
// frequency from the level.
OverlayTable gp_hyperbola_overlay(const ContourTable& table,
                                  const std::vector<double>& levels);

void write_overlay_csv(const OverlayTable& table, const std::string& path);

// ---- cross-engine validation of the relative-motion coupling ----

struct CouplingValidation {
  struct Point {
    double g = 0.0;
    double ed_extrapolated = 0.0;   // ED ground energy, extrapolated in M
    double envelope = 0.0;          // truncation-error estimate
    double analytic_sqrt2 = 0.0;    // CM + relative level with g_rel = g/sqrt(2)
    double analytic_plain = 0.0;    // same with g_rel = g
  };
  std::vector<Point> points;
  bool sqrt2_wins = false;
};

// Compares ED ground energies against the two candidate normalizations of
// the delta-coupling in relative coordinates.  Throws numeric_error when the
// g/sqrt(2) form does not win decisively (hard failure with diagnostic).
CouplingValidation validate_relative_coupling(const std::vector<double>& g_values,
                                              const std::vector<int>& m_values = {10, 14,
                                                                                  18, 22});

// Largest orbital count <= m_preferred whose Fock dimension fits dense
// propagation for this particle number.
int auto_orbitals(int n_particles, int m_preferred, int dense_dim_max);

}  // namespace qbreathe::driver
