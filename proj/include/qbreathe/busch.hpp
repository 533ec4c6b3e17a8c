#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "qbreathe/timeseries.hpp"
#include "qbreathe/trap_model.hpp"

// Analytic core for two contact-interacting bosons in a harmonic trap.
// In symmetric coordinates R = (x1+x2)/sqrt(2), r = (x1-x2)/sqrt(2) the
// Hamiltonian separates into a free oscillator in R and a unit-mass
// oscillator in r with a delta term (g/sqrt(2)) delta(r).  The even-parity
// relative levels solve the transcendental relation of Busch et al.,
//   g_rel = -2 Gamma(3/4 - E/2) / Gamma(1/4 - E/2),
// which places level 2n in ((2n+1/2), (2n+3/2)) for 0 < g_rel < inf.

namespace qbreathe::busch {

// Relative-motion coupling in symmetric coordinates: delta(x1 - x2) =
// delta(r)/sqrt(2).  Validated against the exact-diagonalization engine
// (see driver::validate_relative_coupling).
inline double g_rel_from_lab(double g_lab) { return g_lab / 1.41421356237309504880; }

// Unit-free coupling for a relative trap of frequency omega (r -> y/sqrt(omega)).
inline double unit_free_coupling(double g_rel, double omega) {
  return g_rel / std::sqrt(omega);
}

// Gamma for real arguments via a Lanczos approximation (reflection for
// x < 0.5); relative accuracy ~1e-13 away from poles.
double gamma_lanczos(double x);

// Left side of the level relation as a function of E (unit-frequency trap).
double level_relation(double energy);

// Root E of level_relation(E) = g_unit_free in the bracket
// (2n + 1/2, 2n + 3/2); g = 0 returns the unperturbed 2n + 1/2.
double even_level_energy(double g_unit_free, int n);

// Even relative level for a trap of frequency omega and lab coupling g_lab.
double even_level_energy_lab(double g_lab, double omega, int n);

struct RelSpectrum {
  double g_lab = 0.0;
  double omega = 1.0;
  std::vector<double> levels;  // E_{2j}, ascending, units of the pre-quench trap
  std::vector<double> shifts;  // eps_{2j} = E_{2j}(g) - E_{2j}(0)
};

RelSpectrum rel_spectrum(double g_lab, double omega, int n_levels);

// Delta_{2i,2j}(g) = [eps_{2j}(g) - eps_{2i}(g)] / Omega_post, evaluated
// with the post-quench relative Hamiltonian; i > j >= 0.
double delta_shift(int i, int j, const trap::QuenchSpec& quench);

enum class LineKind { CenterOfMass, Relative };

struct BandLine {
  LineKind kind;
  int i = 0;  // level indices: relative line couples |phi_{2i}> and |phi_{2j}>
  int j = 0;
  double frequency_over_omega = 0.0;  // units of Omega_post
};

struct BandSpectrum {
  std::vector<BandLine> lines;  // sorted by frequency
};

// All breathing lines with up to max_quanta relative quanta: one CM line at
// exactly 2 and relative lines at (2i-2j) - Delta_{2i,2j}(g).
BandSpectrum band_spectrum(const trap::QuenchSpec& quench, int max_quanta);

// ---- grid representation of the relative motion ----

struct RelGridParams {
  double extent = 0.0;   // half-width L; grid spans [-L, L], node at r = 0
  double spacing = 0.0;  // h
  int n_levels = 1;      // number of even levels requested

  // Defaults scaled to cover the classical turning point of the highest
  // requested level with room for the evanescent tail.
  static RelGridParams for_levels(int n_levels, double omega,
                                  double spacing = 0.0);
};

struct RelEigenGrid {
  double omega = 1.0;
  double g_rel = 0.0;
  double spacing = 0.0;
  int n_half = 0;                 // grid nodes at r = j*h, j = 0..n_half
  Eigen::VectorXd energies;       // even levels, ascending
  Eigen::MatrixXd half_vectors;   // column k: psi at r_j, j >= 0; full-line
                                  // norm h*(u0^2 + 2 sum u_j^2) = 1 after
                                  // the sqrt(2) fold is undone
  std::vector<std::string> warnings;

  // <phi_a | r^2 | phi_b> on the grid.
  double r2_element(int a, int b) const;
  // overlap <phi_a | other_phi_b> of two grids with identical geometry
  double overlap(int a, const RelEigenGrid& other, int b) const;
};

// Even-parity eigenpairs of -1/2 d^2/dr^2 + 1/2 omega^2 r^2 + g_rel delta(r),
// with the delta represented as g_rel/h on the r = 0 diagonal entry.
RelEigenGrid rel_eigensolve_grid(double g_rel, double omega,
                                 const RelGridParams& params);

// ---- analytic quench signal ----

struct AnalyticSignalOptions {
  int max_quanta = 20;      // even truncation of both CM and relative ladders
  double grid_spacing = 0.0;  // 0 -> default
  double tail_warn_threshold = 1e-4;
};

struct AnalyticSignal {
  TimeSeries series;            // <X^2>(t)
  double constant_term = 0.0;
  double cm_amplitude = 0.0;    // cosine amplitude of the 2*Omega_post line
  std::vector<BandLine> lines;  // relative lines with their amplitudes below
  std::vector<double> line_amplitudes;
  double discarded_weight = 0.0;  // truncated expansion weight (CM + rel)
  std::vector<std::string> warnings;
};

// <X^2>(t) for two bosons after the quench, from the eigenbasis of the
// post-quench Hamiltonian: a constant, the CM line at 2*Omega_post, and
// one cosine per relative pair (2i, 2j).
AnalyticSignal breathing_signal_analytic(const trap::QuenchSpec& quench,
                                         const AnalyticSignalOptions& opt,
                                         double t0, double dt, int count);

// Squeeze overlap <2k (omega_b) | 0 (omega_a)> between oscillator ground
// state of frequency omega_a and even eigenstates of frequency omega_b.
double squeeze_overlap(int k, double omega_a, double omega_b);

}  // namespace qbreathe::busch
