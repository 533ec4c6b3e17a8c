#include "qbreathe/busch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbreathe/tridiag.hpp"

namespace qbreathe::busch {

namespace {

// sin(pi x) with the periodic part removed first, so arguments near
// integers keep full relative accuracy.
double sinpi(double x) {
  double r = x - std::nearbyint(x);
  double s = std::sin(kPi * r);
  // odd/even integer part flips the sign
  long long n = (long long)std::llround(x - r);
  return (n % 2 == 0) ? s : -s;
}

}  // namespace

double gamma_lanczos(double x) {
  // g = 7, n = 9 coefficient set; ~1e-13 relative accuracy in double.
  static const double p[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    const double s = sinpi(x);
    if (s == 0.0) throw numeric_error("gamma_lanczos: pole at x=" + std::to_string(x));
    return kPi / (s * gamma_lanczos(1.0 - x));
  }
  const double z = x - 1.0;
  double acc = p[0];
  for (int i = 1; i < 9; ++i) acc += p[i] / (z + i);
  const double t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

double level_relation(double energy) {
  return -2.0 * gamma_lanczos(0.75 - 0.5 * energy) / gamma_lanczos(0.25 - 0.5 * energy);
}

double even_level_energy(double g_unit_free, int n) {
  if (n < 0) throw config_error("even_level_energy: n must be >= 0");
  if (n > 80) throw config_error("even_level_energy: n too large for a stable Gamma ratio");
  if (g_unit_free < 0.0)
    throw config_error("even_level_energy: attractive branch not supported");
  if (g_unit_free == 0.0) return 2.0 * n + 0.5;

  const double margin = 1e-12;
  double lo = 2.0 * n + 0.5 + margin;
  double hi = 2.0 * n + 1.5 - margin;
  double flo = level_relation(lo) - g_unit_free;
  double fhi = level_relation(hi) - g_unit_free;
  if (!(flo < 0.0) || !(fhi > 0.0))
    throw numeric_error("even_level_energy: root not bracketed for g=" +
                        std::to_string(g_unit_free) + ", n=" + std::to_string(n));

  // Bisection is pole-safe; the relation is monotone between its poles.
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 128; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = level_relation(mid) - g_unit_free;
    if (f == 0.0) return mid;
    if (f < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(mid)) break;
  }
  // Secant polish on log(relation) which is near-linear across the bracket.
  double a = lo, b = hi;
  double fa = std::log(level_relation(a) / g_unit_free);
  double fb = std::log(level_relation(b) / g_unit_free);
  for (int it = 0; it < 4 && fa != fb; ++it) {
    const double c = a - fa * (b - a) / (fb - fa);
    if (!(c > 2.0 * n + 0.5) || !(c < 2.0 * n + 1.5)) break;
    const double fc = std::log(level_relation(c) / g_unit_free);
    a = b;
    fa = fb;
    b = c;
    fb = fc;
  }
  return b;
}

double even_level_energy_lab(double g_lab, double omega, int n) {
  const double c = unit_free_coupling(g_rel_from_lab(g_lab), omega);
  return omega * even_level_energy(c, n);
}

RelSpectrum rel_spectrum(double g_lab, double omega, int n_levels) {
  if (n_levels < 1) throw config_error("rel_spectrum: need at least one level");
  RelSpectrum s;
  s.g_lab = g_lab;
  s.omega = omega;
  s.levels.reserve(n_levels);
  s.shifts.reserve(n_levels);
  for (int j = 0; j < n_levels; ++j) {
    const double e = even_level_energy_lab(g_lab, omega, j);
    s.levels.push_back(e);
    s.shifts.push_back(e - (2.0 * j + 0.5) * omega);
  }
  return s;
}

double delta_shift(int i, int j, const trap::QuenchSpec& quench) {
  if (!(i > j && j >= 0)) throw config_error("delta_shift: need i > j >= 0");
  quench.validate();
  const double omega = quench.omega_post;
  const double c = unit_free_coupling(g_rel_from_lab(quench.g), omega);
  // eps_{2j} - eps_{2i} in units of Omega_post reduces to the unit-frequency
  // level shifts.
  const double ei = even_level_energy(c, i) - (2.0 * i + 0.5);
  const double ej = even_level_energy(c, j) - (2.0 * j + 0.5);
  return ej - ei;
}

BandSpectrum band_spectrum(const trap::QuenchSpec& quench, int max_quanta) {
  if (max_quanta < 2 || max_quanta % 2 != 0)
    throw config_error("band_spectrum: max_quanta must be even and >= 2");
  quench.validate();

  BandSpectrum out;
  out.lines.push_back(BandLine{LineKind::CenterOfMass, 1, 0, 2.0});

  const double c = unit_free_coupling(g_rel_from_lab(quench.g), quench.omega_post);
  const int n_levels = max_quanta / 2 + 1;
  std::vector<double> e(n_levels);
  for (int k = 0; k < n_levels; ++k) e[k] = even_level_energy(c, k);

  for (int i = 1; i < n_levels; ++i)
    for (int j = 0; j < i; ++j)
      out.lines.push_back(BandLine{LineKind::Relative, i, j, e[i] - e[j]});

  std::sort(out.lines.begin(), out.lines.end(), [](const BandLine& a, const BandLine& b) {
    if (a.frequency_over_omega != b.frequency_over_omega)
      return a.frequency_over_omega < b.frequency_over_omega;
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  return out;
}

RelGridParams RelGridParams::for_levels(int n_levels, double omega, double spacing) {
  RelGridParams p;
  p.n_levels = n_levels;
  // classical turning point of the highest level, plus tail room
  const double e_top = (2.0 * n_levels + 1.5) * omega;
  p.extent = std::max(8.0 / std::sqrt(omega), 1.6 * std::sqrt(2.0 * e_top) / omega);
  p.spacing = spacing > 0.0 ? spacing : p.extent / 2400.0;
  return p;
}

namespace {

// Even-parity fold of the symmetric full-line tridiagonal problem:
// basis e_0 = |0>, e_j = (|j> + |-j>)/sqrt(2); the first off-diagonal
// picks up a factor sqrt(2).
numerics::TridiagEigs solve_even_fold(double g_rel, double omega, double h,
                                      int n_half, int n_levels) {
  const int n = n_half + 1;
  Eigen::VectorXd diag(n), off(n - 1);
  const double kin = 1.0 / (h * h);
  for (int j = 0; j < n; ++j) {
    const double r = j * h;
    diag[j] = kin + 0.5 * omega * omega * r * r;
  }
  diag[0] += g_rel / h;
  for (int j = 0; j + 1 < n; ++j) off[j] = -0.5 * kin;
  off[0] *= std::sqrt(2.0);
  return numerics::lowest_eigenpairs_tridiag(diag, off, n_levels);
}

}  // namespace

RelEigenGrid rel_eigensolve_grid(double g_rel, double omega, const RelGridParams& params) {
  if (g_rel < 0.0) throw config_error("rel_eigensolve_grid: g_rel must be >= 0");
  if (!(omega > 0.0)) throw config_error("rel_eigensolve_grid: omega must be > 0");
  if (!(params.spacing > 0.0) || !(params.extent > 0.0))
    throw config_error("rel_eigensolve_grid: extent and spacing must be > 0");
  if (params.n_levels < 1) throw config_error("rel_eigensolve_grid: n_levels >= 1");

  const double h = params.spacing;
  const int n_half = int(std::lround(params.extent / h));
  if (n_half < 8 * params.n_levels)
    throw config_error("rel_eigensolve_grid: grid too small for requested levels");

  // Solve at h and h/2; Richardson-extrapolate the (second-order accurate)
  // eigenvalues and keep the fine-grid eigenvectors.
  auto coarse = solve_even_fold(g_rel, omega, h, n_half, params.n_levels);
  const double h_fine = 0.5 * h;
  const int n_half_fine = 2 * n_half;
  auto fine = solve_even_fold(g_rel, omega, h_fine, n_half_fine, params.n_levels);

  RelEigenGrid out;
  out.omega = omega;
  out.g_rel = g_rel;
  out.spacing = h_fine;
  out.n_half = n_half_fine;
  out.energies = (4.0 * fine.values - coarse.values) / 3.0;
  out.half_vectors = fine.vectors;
  // Normalize to unit full-line norm: with u the folded coefficients the
  // physical norm is h * sum u_j^2, independent of the fold.
  out.half_vectors /= std::sqrt(h_fine);

  // Convergence report against the transcendental roots.
  const double c = unit_free_coupling(g_rel, omega);
  for (int k = 0; k < params.n_levels; ++k) {
    const double e_exact = omega * even_level_energy(c, k);
    const double err = std::abs(out.energies[k] - e_exact);
    const double tol = std::max(1e-3 * omega, 40.0 * h * h * omega * omega * (2.0 * k + 1.0));
    if (err > tol)
      out.warnings.push_back("grid level " + std::to_string(2 * k) +
                             " off the analytic root by " + std::to_string(err) +
                             " (h=" + std::to_string(h) + "; refine the grid)");
  }
  return out;
}

double RelEigenGrid::r2_element(int a, int b) const {
  // h * sum_j u_a(j) r_j^2 u_b(j); the j = 0 node carries r = 0.
  const int n = n_half + 1;
  double acc = 0.0;
  for (int j = 1; j < n; ++j) {
    const double r = j * spacing;
    acc += half_vectors(j, a) * r * r * half_vectors(j, b);
  }
  return acc * spacing;
}

double RelEigenGrid::overlap(int a, const RelEigenGrid& other, int b) const {
  if (n_half != other.n_half || spacing != other.spacing)
    throw config_error("RelEigenGrid::overlap: grids must share geometry");
  double acc = 0.0;
  for (int j = 0; j <= n_half; ++j) acc += half_vectors(j, a) * other.half_vectors(j, b);
  return acc * spacing;
}

double squeeze_overlap(int k, double omega_a, double omega_b) {
  // <2k(b)|0(a)> = (ab)^{1/4} sqrt(2/(a+b)) lambda^k sqrt((2k)!)/(2^k k!),
  // lambda = (b-a)/(a+b); evaluated by recurrence.
  const double lambda = (omega_b - omega_a) / (omega_a + omega_b);
  double term = std::pow(omega_a * omega_b, 0.25) * std::sqrt(2.0 / (omega_a + omega_b));
  for (int i = 0; i < k; ++i)
    term *= lambda * std::sqrt((2.0 * i + 1.0) / (2.0 * i + 2.0));
  return term;
}

AnalyticSignal breathing_signal_analytic(const trap::QuenchSpec& quench,
                                         const AnalyticSignalOptions& opt,
                                         double t0, double dt, int count) {
  quench.validate();
  if (quench.n_particles != 2)
    throw config_error("breathing_signal_analytic: two particles only");
  if (opt.max_quanta < 2 || opt.max_quanta % 2 != 0)
    throw config_error("breathing_signal_analytic: max_quanta must be even and >= 2");
  if (count < 2 || !(dt > 0.0))
    throw config_error("breathing_signal_analytic: bad time grid");

  const double w_pre = quench.omega_pre;
  const double w_post = quench.omega_post;
  const double g_rel = g_rel_from_lab(quench.g);
  const int n_levels = opt.max_quanta / 2 + 1;

  // CM sector: squeeze overlaps of the pre ground state on post eigenstates.
  std::vector<double> cm_amp(n_levels);
  for (int k = 0; k < n_levels; ++k) cm_amp[k] = squeeze_overlap(k, w_pre, w_post);
  double cm_weight = 0.0;
  for (double a : cm_amp) cm_weight += a * a;

  // Relative sector on a common grid (pre and post share geometry so
  // overlaps are plain grid sums).
  RelGridParams gp = RelGridParams::for_levels(n_levels, std::min(w_pre, w_post),
                                               opt.grid_spacing);
  RelEigenGrid post = rel_eigensolve_grid(g_rel, w_post, gp);
  RelGridParams gp_pre = gp;
  gp_pre.n_levels = n_levels;
  RelEigenGrid pre = rel_eigensolve_grid(g_rel, w_pre, gp_pre);

  std::vector<double> rel_amp(n_levels);
  double rel_weight = 0.0;
  for (int k = 0; k < n_levels; ++k) {
    rel_amp[k] = post.overlap(k, pre, 0);
    rel_weight += rel_amp[k] * rel_amp[k];
  }

  AnalyticSignal out;
  out.warnings = post.warnings;
  for (const auto& w : pre.warnings) out.warnings.push_back(w);
  out.discarded_weight = (1.0 - cm_weight) + (1.0 - rel_weight);
  if (out.discarded_weight > opt.tail_warn_threshold)
    out.warnings.push_back("discarded expansion weight " +
                           std::to_string(out.discarded_weight) +
                           "; increase max_quanta");

  // Constant term.
  double c0 = 0.0;
  for (int k = 0; k < n_levels; ++k)
    c0 += rel_weight * trap::x2_matrix_element(2 * k, 2 * k, w_post) * cm_amp[k] * cm_amp[k];
  for (int k = 0; k < n_levels; ++k)
    c0 += cm_weight * post.r2_element(k, k) * rel_amp[k] * rel_amp[k];
  out.constant_term = c0;

  // CM line at 2 Omega_post.
  double a_cm = 0.0;
  for (int k = 0; k + 1 < n_levels; ++k)
    a_cm += trap::x2_matrix_element(2 * k, 2 * k + 2, w_post) * cm_amp[k] * cm_amp[k + 1];
  a_cm *= 2.0 * rel_weight;
  out.cm_amplitude = a_cm;

  // Relative lines: frequencies from the transcendental roots, weights from
  // grid matrix elements and overlaps.
  const double c_post = unit_free_coupling(g_rel, w_post);
  std::vector<double> e_exact(n_levels);
  for (int k = 0; k < n_levels; ++k) e_exact[k] = w_post * even_level_energy(c_post, k);

  std::vector<double> freqs;  // absolute angular frequencies
  std::vector<double> amps;
  freqs.push_back(2.0 * w_post);
  amps.push_back(a_cm);
  for (int i = 1; i < n_levels; ++i)
    for (int j = 0; j < i; ++j) {
      const double amp = 2.0 * cm_weight * post.r2_element(i, j) * rel_amp[i] * rel_amp[j];
      out.lines.push_back(BandLine{LineKind::Relative, i, j,
                                   (e_exact[i] - e_exact[j]) / w_post});
      out.line_amplitudes.push_back(amp);
      freqs.push_back(e_exact[i] - e_exact[j]);
      amps.push_back(amp);
    }

  out.series.t0 = t0;
  out.series.dt = dt;
  out.series.samples.resize(count);
  for (int s = 0; s < count; ++s) {
    const double t = t0 + dt * s;
    double v = c0;
    for (std::size_t l = 0; l < freqs.size(); ++l) v += amps[l] * std::cos(freqs[l] * t);
    out.series.samples[s] = v;
  }
  out.series.add_meta("engine", "analytic");
  out.series.add_meta("omega_pre", w_pre);
  out.series.add_meta("omega_post", w_post);
  out.series.add_meta("g", quench.g);
  out.series.add_meta("n_particles", 2.0);
  out.series.add_meta("max_quanta", double(opt.max_quanta));
  out.series.add_meta("discarded_weight", out.discarded_weight);
  out.series.add_meta("version", std::string(kVersion));
  return out;
}

}  // namespace qbreathe::busch
