#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qbreathe/trap_model.hpp"

using namespace qbreathe;
using namespace qbreathe::trap;

namespace {

// Independent oracle: explicit H_10 polynomial with exact integer
// coefficients, factorial normalization in long double.
long double ho10_reference(long double x) {
  const long double h10 = ((((1024.0L * x * x - 23040.0L) * x * x + 161280.0L) * x * x -
                            403200.0L) * x * x + 302400.0L) * x * x - 30240.0L;
  long double fact10 = 1.0L;
  for (int k = 2; k <= 10; ++k) fact10 *= k;
  const long double norm = std::sqrt(std::pow(2.0L, 10) * fact10 * std::sqrt(3.14159265358979323846264338327950288L));
  return h10 / norm * std::exp(-0.5L * x * x);
}

}  // namespace

TEST_CASE("harmonic orbital values") {
  CHECK(ho_orbital_eval(0, 0.0, 1.0) == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-14));
  CHECK(ho_orbital_eval(1, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(std::abs(ho_orbital_eval(1, 0.0, 3.7)) < 1e-15);

  const double got = ho_orbital_eval(10, 1.3, 1.0);
  const double want = double(ho10_reference(1.3L));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  // frequency scaling phi^(w)(x) = w^(1/4) phi(sqrt(w) x)
  const double w = 2.3;
  CHECK(ho_orbital_eval(4, 0.7, w) ==
        doctest::Approx(std::pow(w, 0.25) * ho_orbital_eval(4, 0.7 * std::sqrt(w), 1.0))
            .epsilon(1e-12));

  CHECK_THROWS_AS(ho_orbital_eval(kMaxOrbitalIndex + 1, 0.0, 1.0), config_error);
  CHECK_THROWS_AS(ho_orbital_eval(-1, 0.0, 1.0), config_error);
  CHECK_THROWS_AS(ho_orbital_eval(0, 0.0, -1.0), config_error);
}

TEST_CASE("x^2 matrix elements") {
  CHECK(x2_matrix_element(0, 0, 1.0) == doctest::Approx(0.5));
  CHECK(x2_matrix_element(0, 2, 1.0) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(x2_matrix_element(2, 0, 1.0) == x2_matrix_element(0, 2, 1.0));
  CHECK(x2_matrix_element(0, 3, 1.0) == 0.0);
  CHECK(x2_matrix_element(0, 1, 1.0) == 0.0);
  CHECK(x2_matrix_element(3, 3, 2.0) == doctest::Approx(7.0 / 4.0));

  // completeness: sum_k <0|x^2|k><k|x^2|0> = <0|x^4|0> = 3/(4 w^2)
  for (double w : {1.0, 0.5, 2.7}) {
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += x2_matrix_element(0, k, w) * x2_matrix_element(k, 0, w);
    CHECK(acc == doctest::Approx(0.75 / (w * w)).epsilon(1e-13));
  }
}

TEST_CASE("one-body quench Hamiltonian") {
  SUBCASE("no quench: exact oscillator ladder") {
    HOBasisSpec basis{3, 1.0};
    QuenchSpec q{1.0, 1.0, 0.0, 1};
    Eigen::MatrixXd h = one_body_hamiltonian_matrix(basis, q);
    CHECK(h(0, 0) == doctest::Approx(0.5));
    CHECK(h(1, 1) == doctest::Approx(1.5));
    CHECK(h(2, 2) == doctest::Approx(2.5));
    CHECK(h.cwiseAbs().sum() == doctest::Approx(4.5));  // strictly diagonal
  }
  SUBCASE("quench to sqrt(0.9)") {
    HOBasisSpec basis{4, 1.0};
    QuenchSpec q = default_quench(0.0, 1);
    Eigen::MatrixXd h = one_body_hamiltonian_matrix(basis, q);
    CHECK(h(0, 0) == doctest::Approx(0.475).epsilon(1e-13));
    CHECK(h(0, 2) == doctest::Approx(-0.05 * std::sqrt(2.0) / 2.0).epsilon(1e-13));
    CHECK((h - h.transpose()).norm() == 0.0);
  }
}

TEST_CASE("gauss-hermite rule moments") {
  for (int n : {5, 24, 61, 130}) {
    auto rule = gauss_hermite(n);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      m0 += rule.weights[i];
      m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
      m4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
    }
    const double sp = std::sqrt(M_PI);
    CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(0.5 * sp).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(0.75 * sp).epsilon(1e-13));
  }
}

TEST_CASE("contact tensor values") {
  // closed-form Gaussian integrals
  CHECK(contact_tensor(0, 0, 0, 0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-13));
  CHECK(contact_tensor(0, 0, 0, 1, 1.0) == 0.0);
  CHECK(contact_tensor(0, 0, 1, 1, 1.0) ==
        doctest::Approx(0.5 / std::sqrt(2.0 * M_PI)).epsilon(1e-13));

  // quadrature oracle at two node counts must agree
  {
    auto rule_a = gauss_hermite(25);
    auto rule_b = gauss_hermite(57);
    auto integral = [](const GaussHermiteRule& r, int a, int b, int c, int d) {
      const double is2 = 1.0 / std::sqrt(2.0);
      double acc = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i] * is2;
        acc += r.weights[i] * ho_orbital_eval(a, x, 1.0) * ho_orbital_eval(b, x, 1.0) *
               ho_orbital_eval(c, x, 1.0) * ho_orbital_eval(d, x, 1.0) *
               std::exp(2.0 * x * x);
      }
      return acc * is2;
    };
    const double ia = integral(rule_a, 2, 3, 4, 5);
    const double ib = integral(rule_b, 2, 3, 4, 5);
    CHECK(ia == doctest::Approx(ib).epsilon(1e-12));
    CHECK(contact_tensor(2, 3, 4, 5, 1.0) == doctest::Approx(ib).epsilon(1e-12));
  }

  // frequency scaling: I^(w) = sqrt(w) I^(1)
  CHECK(contact_tensor(1, 1, 2, 2, 4.0) ==
        doctest::Approx(2.0 * contact_tensor(1, 1, 2, 2, 1.0)).epsilon(1e-13));
}

TEST_CASE("contact tensor permutation symmetry") {
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> pick(0, 7);
  ContactTensorTable table(8, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int v[4] = {pick(rng), pick(rng), pick(rng), pick(rng)};
    const double ref = table(v[0], v[1], v[2], v[3]);
    std::sort(v, v + 4);
    do {
      CHECK(table(v[0], v[1], v[2], v[3]) == ref);
    } while (std::next_permutation(v, v + 4));
  }
}

TEST_CASE("contact tensor table matches direct evaluation") {
  ContactTensorTable table(6, 0.7);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      CHECK(table(a, b, 2, 1) ==
            doctest::Approx(contact_tensor(a, b, 2, 1, 0.7)).epsilon(1e-12));
}

TEST_CASE("quench spec validation") {
  const QuenchSpec bad_omega{1.0, -0.5, 0.0, 1};
  const QuenchSpec bad_g{1.0, 1.0, -0.1, 1};
  const QuenchSpec bad_n{1.0, 1.0, 0.0, 0};
  CHECK_THROWS_AS(bad_omega.validate(), config_error);
  CHECK_THROWS_AS(bad_g.validate(), config_error);
  CHECK_THROWS_AS(bad_n.validate(), config_error);
  CHECK_NOTHROW(default_quench(2.0, 3).validate());
}
