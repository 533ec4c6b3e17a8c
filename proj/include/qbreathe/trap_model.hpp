#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qbreathe/common.hpp"

// Harmonic-trap units and one-/two-body matrix elements shared by all
// engines.  Everything is expressed in oscillator units of the pre-quench
// trap: lengths in a0 = sqrt(hbar/(m*Omega0)), energies in hbar*Omega0,
// frequencies in Omega0.

namespace qbreathe::trap {

// One quench experiment: trap frequency jumps omega_pre -> omega_post at
// t = 0 while the contact interaction strength g stays fixed.
struct QuenchSpec {
  double omega_pre = 1.0;
  double omega_post = 1.0;
  double g = 0.0;
  int n_particles = 1;

  void validate() const;

  // Same trap parameters with the quench switched off (used to build the
  // initial-state Hamiltonian).
  QuenchSpec pre_quench() const {
    QuenchSpec s = *this;
    s.omega_post = s.omega_pre;
    return s;
  }
};

inline QuenchSpec default_quench(double g, int n) {
  // Omega: 1 -> sqrt(0.9)
  return QuenchSpec{1.0, 0.9486832980505137996, g, n};
}

struct HOBasisSpec {
  int n_orbitals = 1;      // M
  double omega_basis = 1.0;

  void validate() const;
};

// Orbital indices above this bound are refused; the normalized recurrence
// is well conditioned here and the quadrature rules stay exact.
inline constexpr int kMaxOrbitalIndex = 60;

// Value of the n-th normalized harmonic-oscillator eigenfunction at x.
// Uses the three-term recurrence on normalized functions (no factorials).
double ho_orbital_eval(int n, double x, double omega);

// <n| x^2 |m> for oscillator eigenstates of frequency omega.
double x2_matrix_element(int n, int m, double omega);

// <n| x |m>, needed for the dipole (parity) diagnostic.
double x_matrix_element(int n, int m, double omega);

// Matrix of -1/2 d^2/dx^2 + 1/2 omega_post^2 x^2 in the first
// basis.n_orbitals eigenfunctions of the omega_pre trap:
//   diag((n+1/2) omega_pre) + 1/2 (omega_post^2 - omega_pre^2) <n|x^2|m>.
Eigen::MatrixXd one_body_hamiltonian_matrix(const HOBasisSpec& basis,
                                            const QuenchSpec& quench);

// Gauss-Hermite rule for weight exp(-x^2) on (-inf, inf); exact for
// polynomials of degree <= 2n-1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

// phi_a phi_b phi_c phi_d overlap integral of four orbitals (frequency
// omega), the g-independent part of the contact interaction.  Symmetric
// under any index permutation; zero for odd a+b+c+d.
double contact_tensor(int a, int b, int c, int d, double omega);

// Cached table of contact_tensor values for all indices < n_orbitals.
// Built once (single-threaded), read-only afterwards.
class ContactTensorTable {
 public:
  ContactTensorTable(int n_orbitals, double omega);

  double operator()(int a, int b, int c, int d) const;
  int n_orbitals() const { return m_; }
  double omega() const { return omega_; }

 private:
  int m_;
  double omega_;
  std::vector<double> packed_;  // sorted-quadruple order
};

}  // namespace qbreathe::trap
