#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbreathe/busch.hpp"
#include "qbreathe/spectral.hpp"
#include "qbreathe/tridiag.hpp"

using namespace qbreathe;
using namespace qbreathe::busch;

TEST_CASE("lanczos gamma against the standard library") {
  for (double x : {0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 3.7, 10.2, 41.5,
                   -0.3, -0.75, -1.2, -2.6, -5.4, -9.9}) {
    const double ref = std::tgamma(x);
    CHECK(gamma_lanczos(x) == doctest::Approx(ref).epsilon(2e-12));
  }
}

TEST_CASE("even level energies") {
  CHECK(even_level_energy(0.0, 0) == doctest::Approx(0.5));
  CHECK(even_level_energy(0.0, 3) == doctest::Approx(6.5));

  // first-order perturbation: E = 1/2 + g/sqrt(pi) + O(g^2); the quadratic
  // term at g = 0.1 is about -2.2e-3
  CHECK(std::abs(even_level_energy(0.1, 0) - (0.5 + 0.1 / std::sqrt(M_PI))) < 3e-3);

  // the relation reproduces itself at the root
  for (double g : {0.3, 1.0, 4.0, 20.0}) {
    for (int n : {0, 1, 4}) {
      const double e = even_level_energy(g, n);
      CHECK(level_relation(e) == doctest::Approx(g).epsilon(1e-10));
      CHECK(e > 2.0 * n + 0.5);
      CHECK(e < 2.0 * n + 1.5);
    }
  }

  // fermionization: E -> 2n + 3/2 with the known 1/g tail
  for (int n : {0, 1, 2}) {
    const double g = 1000.0;
    const double e = even_level_energy(g, n);
    // leading asymptotics: E = 2n + 3/2 - delta, delta = 4 Gamma(n+3/2)/(pi n! g)
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    const double delta = 4.0 * std::tgamma(n + 1.5) / (M_PI * fact * g);
    CHECK(std::abs(e - (2.0 * n + 1.5 - delta)) < 5.0 * delta * delta);
  }

  CHECK_THROWS_AS(even_level_energy(-1.0, 0), config_error);
}

TEST_CASE("level monotonicity and interlacing in g") {
  for (int n : {0, 1, 2}) {
    double prev = 2.0 * n + 0.5;
    for (double g : {0.05, 0.2, 0.8, 2.0, 6.0, 25.0, 200.0}) {
      const double e = even_level_energy(g, n);
      CHECK(e > prev);                // strictly increasing in g
      CHECK(e > 2.0 * n + 0.5);       // interlacing
      CHECK(e < 2.0 * n + 1.5);
      prev = e;
    }
  }
}

TEST_CASE("delta shifts") {
  trap::QuenchSpec q0 = trap::default_quench(0.0, 2);
  CHECK(delta_shift(1, 0, q0) == doctest::Approx(0.0));

  trap::QuenchSpec qinf = trap::default_quench(1.0e5, 2);
  CHECK(std::abs(delta_shift(1, 0, qinf)) < 1e-3);

  for (double g : {0.2, 1.0, 3.0, 10.0}) {
    trap::QuenchSpec q = trap::default_quench(g, 2);
    CHECK(delta_shift(1, 0, q) > 0.0);
    CHECK(delta_shift(2, 0, q) > 0.0);
  }
  CHECK_THROWS_AS(delta_shift(0, 0, q0), config_error);
}

TEST_CASE("band spectrum") {
  SUBCASE("free case collapses to even multiples") {
    trap::QuenchSpec q = trap::default_quench(0.0, 2);
    auto bands = band_spectrum(q, 8);
    for (const auto& line : bands.lines) {
      const double r = line.frequency_over_omega;
      const double nearest = 2.0 * std::round(r / 2.0);
      CHECK(std::abs(r - nearest) < 1e-12);
      CHECK(nearest >= 2.0);
      CHECK(nearest <= 8.0);
    }
  }
  SUBCASE("CM line is exactly 2 for any g") {
    for (double g : {0.0, 0.7, 5.0}) {
      auto bands = band_spectrum(trap::default_quench(g, 2), 6);
      int cm_count = 0;
      for (const auto& line : bands.lines)
        if (line.kind == LineKind::CenterOfMass) {
          ++cm_count;
          CHECK(line.frequency_over_omega == 2.0);
        }
      CHECK(cm_count == 1);
    }
  }
  SUBCASE("sorted and complete") {
    auto bands = band_spectrum(trap::default_quench(1.3, 2), 10);
    // 1 CM + one relative line per pair i > j with 2i <= 10
    CHECK(int(bands.lines.size()) == 1 + 5 * 6 / 2);
    for (std::size_t i = 1; i < bands.lines.size(); ++i)
      CHECK(bands.lines[i].frequency_over_omega >=
            bands.lines[i - 1].frequency_over_omega);
  }
  SUBCASE("first sideband of the softened trap") {
    // quench 1 -> sqrt(0.3), g = 0.4: the phi_2 - phi_4 coupling sits near
    // 1.975 and the phi_0 - phi_2 line near 1.916 (in units of Omega_post)
    trap::QuenchSpec q{1.0, std::sqrt(0.3), 0.4, 2};
    auto bands = band_spectrum(q, 8);
    double f21 = 0.0, f10 = 0.0;
    for (const auto& line : bands.lines) {
      if (line.kind != LineKind::Relative) continue;
      if (line.i == 2 && line.j == 1) f21 = line.frequency_over_omega;
      if (line.i == 1 && line.j == 0) f10 = line.frequency_over_omega;
    }
    CHECK(f10 == doctest::Approx(1.916).epsilon(0.003));
    CHECK(f21 == doctest::Approx(1.975).epsilon(0.003));
  }
}

TEST_CASE("tridiagonal partial eigensolver") {
  // free particle in a box: -1/2 u'' with Dirichlet walls has known levels
  const int n = 400;
  const double h = 1.0 / (n + 1);
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.0 / (h * h));
  Eigen::VectorXd e = Eigen::VectorXd::Constant(n - 1, -0.5 / (h * h));
  auto eig = numerics::lowest_eigenpairs_tridiag(d, e, 3);
  for (int k = 0; k < 3; ++k) {
    // discrete dispersion (1 - cos(k pi h))/h^2
    const double exact = (1.0 - std::cos((k + 1) * M_PI * h)) / (h * h);
    CHECK(eig.values[k] == doctest::Approx(exact).epsilon(1e-10));
  }
  // orthonormal vectors
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(eig.vectors.col(a).dot(eig.vectors.col(b)) ==
            doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("relative-motion grid eigensolver") {
  SUBCASE("free oscillator levels") {
    RelGridParams p;
    p.extent = 10.0;
    p.spacing = 0.01;
    p.n_levels = 4;
    auto grid = rel_eigensolve_grid(0.0, 1.0, p);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(grid.energies[k] - (2.0 * k + 0.5)) < 1e-6);
    CHECK(grid.warnings.empty());
  }
  SUBCASE("interacting ground level matches the transcendental root") {
    RelGridParams p;
    p.extent = 10.0;
    p.spacing = 0.005;
    p.n_levels = 2;
    auto grid = rel_eigensolve_grid(4.0, 1.0, p);
    const double exact = even_level_energy(4.0, 0);
    CHECK(std::abs(grid.energies[0] - exact) < 1e-3);
  }
  SUBCASE("eigenvectors orthonormal under the grid quadrature") {
    RelGridParams p = RelGridParams::for_levels(5, 1.0);
    auto grid = rel_eigensolve_grid(2.0, 1.0, p);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        CHECK(grid.overlap(a, grid, b) ==
              doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
  }
  SUBCASE("odd-parity levels ignore the contact term") {
    // odd functions vanish at r = 0; on the odd fold (no center node) the
    // delta never enters, so levels sit at (2j + 3/2) omega for any g
    const double h = 0.01;
    const int k = 1000;
    Eigen::VectorXd d(k), e(k - 1);
    for (int j = 0; j < k; ++j) {
      const double r = (j + 1) * h;
      d[j] = 1.0 / (h * h) + 0.5 * r * r;
    }
    for (int j = 0; j + 1 < k; ++j) e[j] = -0.5 / (h * h);
    auto eig = numerics::lowest_eigenpairs_tridiag(d, e, 2);
    CHECK(eig.values[0] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(eig.values[1] == doctest::Approx(3.5).epsilon(1e-4));
  }
}

TEST_CASE("squeeze overlaps") {
  const double a = 1.0, b = 0.9486832980505138;
  CHECK(squeeze_overlap(0, a, b) ==
        doctest::Approx(std::pow(a * b, 0.25) * std::sqrt(2.0 / (a + b))).epsilon(1e-14));
  // completeness over even states
  double acc = 0.0;
  for (int k = 0; k < 40; ++k) acc += std::pow(squeeze_overlap(k, a, 0.3), 2);
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-10));
  // identical frequencies: only k = 0 survives
  CHECK(squeeze_overlap(0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(squeeze_overlap(3, 1.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("analytic breathing signal") {
  SUBCASE("free gas: single cosine at 2 Omega_post") {
    // all nonzero lines of the g = 0 expansion coincide at 2 Omega_post, so
    // the signal is constant plus one cosine
    trap::QuenchSpec q = trap::default_quench(0.0, 2);
    AnalyticSignalOptions opt;
    opt.max_quanta = 12;
    const double w = q.omega_post;
    const double period = 2.0 * kPi / w;
    auto sig = breathing_signal_analytic(q, opt, 0.0, period / 32.0, 100 * 32);
    CHECK(sig.discarded_weight < 1e-8);
    auto fit = spectral::fit_sine(sig.series, 1e-6);
    CHECK(std::abs(fit.frequency - 2.0 * w) < 1e-8);
    CHECK(fit.offset == doctest::Approx(sig.constant_term).epsilon(1e-8));
  }
  SUBCASE("time average equals the constant term") {
    trap::QuenchSpec q = trap::default_quench(1.0, 2);
    AnalyticSignalOptions opt;
    const double period = 2.0 * kPi / q.omega_post;
    const int spp = 32, periods = 2400;
    auto sig = breathing_signal_analytic(q, opt, 0.0, period / spp, periods * spp);
    double mean = 0.0;
    for (double v : sig.series.samples) mean += v;
    mean /= sig.series.count();
    CHECK(std::abs(mean - sig.constant_term) < 1e-6);
  }
  SUBCASE("t = 0 value reproduces the pre-quench moments") {
    trap::QuenchSpec q = trap::default_quench(1.7, 2);
    AnalyticSignalOptions opt;
    auto sig = breathing_signal_analytic(q, opt, 0.0, 0.1, 64);
    // <X^2>(0) = <R^2>_pre + <r^2>_pre
    auto pre = rel_eigensolve_grid(g_rel_from_lab(1.7), 1.0, RelGridParams::for_levels(3, 1.0));
    const double expect = 0.5 + pre.r2_element(0, 0);
    CHECK(sig.series.samples[0] == doctest::Approx(expect).epsilon(5e-4));
  }
  SUBCASE("two particles only") {
    trap::QuenchSpec q = trap::default_quench(0.0, 3);
    CHECK_THROWS_AS(breathing_signal_analytic(q, {}, 0.0, 0.1, 64), config_error);
  }
}
