#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <string>
#include <vector>

#include "qbreathe/fock.hpp"
#include "qbreathe/timeseries.hpp"
#include "qbreathe/trap_model.hpp"

// Numerically exact few-body engine: many-boson Hamiltonian over the
// pre-quench orbitals, ground state, quench propagation and <X^2>(t).
// The basis orbitals stay the pre-quench eigenfunctions at all times; the
// quench enters only through the one-body matrix.

namespace qbreathe::fewbody {

using SparseMat = Eigen::SparseMatrix<double>;

// Second-quantized one-body operator sum_{nm} o_{nm} a^dag_n a_m on the basis.
SparseMat assemble_one_body(const FockBasis& basis, const Eigen::MatrixXd& op);

// H = sum h_nm a^dag_n a_m + (g/2) sum I_abcd a^dag_a a^dag_b a_c a_d with the
// trap frequency quench.omega_post; real symmetric (exactly, by mirrored
// assembly).  Pass quench.pre_quench() for the initial-state Hamiltonian.
SparseMat build_hamiltonian(const FockBasis& basis, const trap::QuenchSpec& quench,
                            const trap::ContactTensorTable& tensor);
SparseMat build_hamiltonian(const FockBasis& basis, const trap::QuenchSpec& quench);

struct GroundStateOptions {
  int dense_dim_max = 4000;
  int lanczos_max_iter = 400;
  double lanczos_tol = 1e-12;
};

struct GroundState {
  double energy = 0.0;
  Eigen::VectorXd coefficients;
};

// Lowest eigenpair: dense solve up to dense_dim_max, Lanczos beyond.
GroundState ground_state(const SparseMat& h, const GroundStateOptions& opt = {});

// (rho_1)_{nm} = <a^dag_m a_n> / N; Hermitian, PSD, unit trace.
Eigen::MatrixXcd one_body_density(const FockBasis& basis, const Eigen::VectorXcd& state);

// N tr(x^2 rho_1) with x^2 taken at the basis frequency.
double x2_expectation(const FockBasis& basis, const Eigen::VectorXcd& state,
                      double omega_basis);

struct PropagationOptions {
  int dense_dim_max = 4000;   // full eigendecomposition up to here
  double mode_cutoff = 1e-9;  // drop eigenmodes with |<u|psi0>| below this
  int krylov_dim = 40;
  double krylov_tol = 1e-10;  // per-step error budget
  bool force_krylov = false;
};

struct PropagationResult {
  TimeSeries x2;
  double max_norm_error = 0.0;        // | ||psi||-1 | over checkpoints
  double max_energy_rel_error = 0.0;  // relative <H> drift over checkpoints
  double max_abs_x = 0.0;             // parity check, should vanish
  std::string method;                 // "eig" or "krylov"
};

// psi(t) = exp(-i H_post t) psi0 sampled on a uniform grid, streaming
// <X^2>(t) plus conservation diagnostics.
PropagationResult propagate_quench(const FockBasis& basis, const Eigen::VectorXcd& psi0,
                                   const SparseMat& h_post, const trap::QuenchSpec& quench,
                                   double dt, int count,
                                   const PropagationOptions& opt = {});

// States at every sample (dense path only; for tests and small systems).
std::vector<Eigen::VectorXcd> propagate_states(const FockBasis& basis,
                                               const Eigen::VectorXcd& psi0,
                                               const SparseMat& h_post, double dt,
                                               int count);

// ---- complete quench pipeline ----

struct EdRunOptions {
  int n_orbitals = 11;
  int periods = 200;             // post-quench trap periods
  int samples_per_period = 32;
  std::size_t basis_cap = FockBasis::kDefaultCap;
  PropagationOptions propagation;
};

// ground state of the pre-quench Hamiltonian, then evolution under the
// post-quench one; returns the <X^2> series with full provenance.
PropagationResult run_quench_experiment(const trap::QuenchSpec& quench,
                                        const EdRunOptions& opt);

// ---- truncation diagnostic for the nominal CM line ----

struct CmMixingEntry {
  int n_orbitals = 0;
  std::size_t dim = 0;
  double cm_freq_over_omega = 0.0;
  double drift = 0.0;       // cm_freq_over_omega - 2
  double amplitude = 0.0;
};

struct CmMixingReport {
  std::vector<CmMixingEntry> entries;  // one per requested M
  double resolution_over_omega = 0.0;  // spectral resolution in Omega_post units
  bool pass = false;                   // |drift| < resolution at the largest M
};

// Fits the nominal center-of-mass peak (the top of the lowest band) for each
// orbital count; exposes the truncation-induced drift away from 2 Omega_post.
CmMixingReport cm_mixing_diagnostic(const trap::QuenchSpec& quench,
                                    const std::vector<int>& m_list,
                                    const EdRunOptions& base = {});

}  // namespace qbreathe::fewbody
