#include "qbreathe/trap_model.hpp"

#include <algorithm>
#include <cmath>

namespace qbreathe::trap {

void QuenchSpec::validate() const {
  if (!(omega_pre > 0.0)) throw config_error("quench: omega_pre must be > 0");
  if (!(omega_post > 0.0)) throw config_error("quench: omega_post must be > 0");
  if (n_particles < 1) throw config_error("quench: n_particles must be >= 1");
  if (g < 0.0) throw config_error("quench: g must be >= 0 (repulsive regime only)");
}

void HOBasisSpec::validate() const {
  if (n_orbitals < 1) throw config_error("basis: n_orbitals must be >= 1");
  if (n_orbitals - 1 > kMaxOrbitalIndex)
    throw config_error("basis: n_orbitals exceeds the orbital stability bound " +
                       std::to_string(kMaxOrbitalIndex + 1));
  if (!(omega_basis > 0.0)) throw config_error("basis: omega_basis must be > 0");
}

namespace {

// Normalized Hermite functions without the Gaussian factor:
// h_n(y) = H_n(y) / sqrt(2^n n! sqrt(pi)), so that phi_n(y) = h_n(y) e^{-y^2/2}.
double hermite_normalized_bare(int n, double y) {
  double h0 = 0.75112554446494248286;  // pi^{-1/4}
  if (n == 0) return h0;
  double h1 = std::sqrt(2.0) * y * h0;
  for (int k = 1; k < n; ++k) {
    double h2 = std::sqrt(2.0 / (k + 1)) * y * h1 - std::sqrt(double(k) / (k + 1)) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace

double ho_orbital_eval(int n, double x, double omega) {
  if (n < 0) throw config_error("ho_orbital_eval: n must be >= 0");
  if (n > kMaxOrbitalIndex)
    throw config_error("ho_orbital_eval: n=" + std::to_string(n) +
                       " above stability bound " + std::to_string(kMaxOrbitalIndex));
  if (!(omega > 0.0)) throw config_error("ho_orbital_eval: omega must be > 0");
  const double y = std::sqrt(omega) * x;
  return std::pow(omega, 0.25) * hermite_normalized_bare(n, y) * std::exp(-0.5 * y * y);
}

double x2_matrix_element(int n, int m, double omega) {
  if (n < 0 || m < 0) throw config_error("x2_matrix_element: indices must be >= 0");
  if (n == m) return (2.0 * n + 1.0) / (2.0 * omega);
  if (m == n + 2) return std::sqrt(double(n + 1) * (n + 2)) / (2.0 * omega);
  if (n == m + 2) return std::sqrt(double(m + 1) * (m + 2)) / (2.0 * omega);
  return 0.0;
}

double x_matrix_element(int n, int m, double omega) {
  if (n < 0 || m < 0) throw config_error("x_matrix_element: indices must be >= 0");
  if (m == n + 1) return std::sqrt((n + 1) / (2.0 * omega));
  if (n == m + 1) return std::sqrt((m + 1) / (2.0 * omega));
  return 0.0;
}

Eigen::MatrixXd one_body_hamiltonian_matrix(const HOBasisSpec& basis,
                                            const QuenchSpec& quench) {
  basis.validate();
  quench.validate();
  const int m = basis.n_orbitals;
  const double wp = quench.omega_pre;
  const double dw2 = 0.5 * (quench.omega_post * quench.omega_post - wp * wp);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (int n = 0; n < m; ++n) {
    h(n, n) = (n + 0.5) * wp + dw2 * x2_matrix_element(n, n, wp);
    if (n + 2 < m) {
      h(n, n + 2) = dw2 * x2_matrix_element(n, n + 2, wp);
      h(n + 2, n) = h(n, n + 2);
    }
  }
  return h;
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw config_error("gauss_hermite: need at least one node");
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const double eps = 1.0e-14;
  const int max_newton = 100;
  const int m_half = (n + 1) / 2;
  double z = 0.0;

  for (int i = 0; i < m_half; ++i) {
    // Stroud-Secrest style initial guesses, refined by Newton on the
    // normalized recurrence (stable for large n).
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }

    double pp = 0.0;
    int it = 0;
    for (; it < max_newton; ++it) {
      double p1 = 0.75112554446494248286;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    if (it >= max_newton)
      throw numeric_error("gauss_hermite: Newton iteration failed for n=" + std::to_string(n));

    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  // For odd n the middle node is exactly zero.
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace {

double contact_tensor_unit(int a, int b, int c, int d, const GaussHermiteRule& rule) {
  // Integrand phi_a phi_b phi_c phi_d = P(x) e^{-2x^2}; substitute x = y/sqrt(2)
  // to match the e^{-y^2} weight.
  if ((a + b + c + d) % 2 != 0) return 0.0;
  const double inv_sqrt2 = 0.70710678118654752440;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i] * inv_sqrt2;
    const double p = hermite_normalized_bare(a, x) * hermite_normalized_bare(b, x) *
                     hermite_normalized_bare(c, x) * hermite_normalized_bare(d, x);
    sum += rule.weights[i] * p;
  }
  return sum * inv_sqrt2;
}

void check_tensor_index(int v) {
  if (v < 0 || v > kMaxOrbitalIndex)
    throw config_error("contact_tensor: orbital index " + std::to_string(v) +
                       " outside [0, " + std::to_string(kMaxOrbitalIndex) + "]");
}

}  // namespace

double contact_tensor(int a, int b, int c, int d, double omega) {
  check_tensor_index(a);
  check_tensor_index(b);
  check_tensor_index(c);
  check_tensor_index(d);
  if (!(omega > 0.0)) throw config_error("contact_tensor: omega must be > 0");
  if ((a + b + c + d) % 2 != 0) return 0.0;
  // Exactness needs nodes >= (a+b+c+d)/2 + 1; use a comfortable margin.
  const int n_nodes = a + b + c + d + 4;
  GaussHermiteRule rule = gauss_hermite(n_nodes);
  // phi^(omega) scaling: each orbital picks up omega^{1/4} and dx one omega^{-1/2}.
  return std::sqrt(omega) * contact_tensor_unit(a, b, c, d, rule);
}

ContactTensorTable::ContactTensorTable(int n_orbitals, double omega)
    : m_(n_orbitals), omega_(omega) {
  if (n_orbitals < 1 || n_orbitals - 1 > kMaxOrbitalIndex)
    throw config_error("ContactTensorTable: n_orbitals out of range");
  if (!(omega > 0.0)) throw config_error("ContactTensorTable: omega must be > 0");

  // Packed storage over sorted quadruples a<=b<=c<=d.
  const auto packed_index = [](int a, int b, int c, int d) -> std::size_t {
    // multiset rank: C(d+3,4) + C(c+2,3) + C(b+1,2) + C(a,1)
    auto c2 = [](std::size_t x) { return x * (x + 1) / 2; };
    auto c3 = [](std::size_t x) { return x * (x + 1) * (x + 2) / 6; };
    auto c4 = [](std::size_t x) { return x * (x + 1) * (x + 2) * (x + 3) / 24; };
    return c4(d) + c3(c) + c2(b) + std::size_t(a);
  };

  const int m = n_orbitals;
  packed_.assign(packed_index(m - 1, m - 1, m - 1, m - 1) + 1, 0.0);
  GaussHermiteRule rule = gauss_hermite(4 * m + 4);
  const double scale = std::sqrt(omega);
  for (int d = 0; d < m; ++d)
    for (int c = 0; c <= d; ++c)
      for (int b = 0; b <= c; ++b)
        for (int a = 0; a <= b; ++a)
          packed_[packed_index(a, b, c, d)] =
              scale * contact_tensor_unit(a, b, c, d, rule);
}

double ContactTensorTable::operator()(int a, int b, int c, int d) const {
  int v[4] = {a, b, c, d};
  for (int x : v)
    if (x < 0 || x >= m_)
      throw config_error("ContactTensorTable: index out of range");
  std::sort(v, v + 4);
  auto c2 = [](std::size_t x) { return x * (x + 1) / 2; };
  auto c3 = [](std::size_t x) { return x * (x + 1) * (x + 2) / 6; };
  auto c4 = [](std::size_t x) { return x * (x + 1) * (x + 2) * (x + 3) / 24; };
  return packed_[c4(v[3]) + c3(v[2]) + c2(v[1]) + std::size_t(v[0])];
}

}  // namespace qbreathe::trap
