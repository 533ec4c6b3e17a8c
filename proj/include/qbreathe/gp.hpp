#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qbreathe/timeseries.hpp"
#include "qbreathe/trap_model.hpp"

// Mean-field limit: 1D Gross-Pitaevskii equation
//   i psi_t = -1/2 psi_xx + 1/2 omega^2 x^2 psi + Lambda |psi|^2 psi,
// normalized to int |psi|^2 dx = 1, with the single interaction parameter
// Lambda = g (N-1).  Split-step Fourier for both imaginary (ground state)
// and real (quench) time.

namespace qbreathe::gp {

struct GPGrid {
  int n_points = 1024;
  double extent = 0.0;  // half-width; 0 -> max(12, 3 R_TF) oscillator lengths

  double resolved_extent(double lambda, double omega) const;
};

// Thomas-Fermi closed forms (strong-coupling limit).
double tf_chemical_potential(double lambda, double omega);
double tf_radius(double lambda, double omega);

struct GPField {
  double extent = 0.0;
  double dx = 0.0;
  double lambda = 0.0;
  double omega = 1.0;  // trap used to prepare/evolve the field
  std::vector<std::complex<double>> psi;
  double energy = 0.0;

  int n() const { return int(psi.size()); }
  double x_at(int j) const { return -extent + j * dx; }
  double norm() const;        // int |psi|^2 dx
  double x2_moment() const;   // int x^2 |psi|^2 dx
};

struct GroundOptions {
  double dtau = 2e-3;
  long max_steps = 2'000'000;
  double rate_tol = 1e-12;  // |dE| per unit imaginary time, relative
  std::vector<double>* energy_history = nullptr;  // checkpoint energies, if wanted
};

// Stationary state by imaginary-time split-step with per-step renormalization;
// energy decreases monotonically along the flow.
GPField gp_ground_state(double lambda, double omega, const GPGrid& grid = {},
                        const GroundOptions& opt = {});

struct EvolveOptions {
  int periods = 60;              // post-quench trap periods
  int samples_per_period = 32;
  double dt_periods = 1e-3;      // integrator step as a fraction of the period
  double boundary_tol = 1e-8;    // max edge density relative to the peak
};

struct EvolveResult {
  TimeSeries x2;                // <x^2>(t) per particle
  GPField final_field;
  double max_norm_error = 0.0;
  double max_energy_rel_error = 0.0;
};

// Real-time Strang split-step evolution in the omega_post trap.
EvolveResult gp_evolve(const GPField& initial, double lambda, double omega_post,
                       const EvolveOptions& opt = {});

struct FrequencyEstimate {
  double frequency = 0.0;  // angular
  double sigma = 0.0;
  double residual = 0.0;
};

// ground state at omega_pre -> quench to omega_post -> sine fit.
FrequencyEstimate mf_breathing_frequency(const trap::QuenchSpec& quench,
                                         const GPGrid& grid = {},
                                         const EvolveOptions& opt = {});

}  // namespace qbreathe::gp
