#include "qbreathe/gp.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "qbreathe/fft_guard.hpp"
#include "qbreathe/spectral.hpp"

namespace qbreathe::gp {

namespace {

using cplx = std::complex<double>;

// In-place complex FFT pair on a fixed-size buffer.
class FftPair {
 public:
  explicit FftPair(int n) : n_(n) {
    buf_ = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
    if (!buf_) throw numeric_error("gp: fftw_malloc failed");
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_),
                            reinterpret_cast<fftw_complex*>(buf_), FFTW_FORWARD,
                            FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_),
                            reinterpret_cast<fftw_complex*>(buf_), FFTW_BACKWARD,
                            FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw numeric_error("gp: fftw plan creation failed");
  }
  ~FftPair() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  cplx* data() { return buf_; }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }  // unnormalized: scales by n
  int n() const { return n_; }

 private:
  int n_;
  cplx* buf_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

std::vector<double> k_grid(int n, double extent) {
  std::vector<double> k(n);
  const double dk = kPi / extent;  // 2*pi / (2*extent)
  for (int j = 0; j < n; ++j) {
    const int m = (j <= n / 2) ? j : j - n;
    k[j] = dk * m;
  }
  return k;
}

double field_energy(const GPField& f, FftPair& fft, const std::vector<double>& k) {
  const int n = f.n();
  double pot = 0.0, inter = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = std::norm(f.psi[j]);
    const double x = f.x_at(j);
    pot += 0.5 * f.omega * f.omega * x * x * d;
    inter += 0.5 * f.lambda * d * d;
  }
  std::copy(f.psi.begin(), f.psi.end(), fft.data());
  fft.forward();
  // int |psi'|^2 dx = (dx/n) sum_k k^2 |psi_hat_k|^2 for the unnormalized DFT
  double kin = 0.0;
  for (int j = 0; j < n; ++j) kin += 0.5 * k[j] * k[j] * std::norm(fft.data()[j]);
  kin /= double(n);
  return (pot + inter + kin) * f.dx;
}

}  // namespace

double tf_chemical_potential(double lambda, double omega) {
  if (lambda <= 0.0) return 0.5 * omega;
  return std::pow(3.0 * lambda * omega / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
}

double tf_radius(double lambda, double omega) {
  if (lambda <= 0.0) return 0.0;
  return std::sqrt(2.0 * tf_chemical_potential(lambda, omega)) / omega;
}

double GPGrid::resolved_extent(double lambda, double omega) const {
  if (extent > 0.0) return extent;
  return std::max(12.0 / std::sqrt(omega), 3.0 * tf_radius(lambda, omega));
}

double GPField::norm() const {
  double acc = 0.0;
  for (const auto& v : psi) acc += std::norm(v);
  return acc * dx;
}

double GPField::x2_moment() const {
  double acc = 0.0;
  for (int j = 0; j < n(); ++j) acc += x_at(j) * x_at(j) * std::norm(psi[j]);
  return acc * dx;
}

GPField gp_ground_state(double lambda, double omega, const GPGrid& grid,
                        const GroundOptions& opt) {
  if (lambda < 0.0) throw config_error("gp_ground_state: Lambda must be >= 0");
  if (!(omega > 0.0)) throw config_error("gp_ground_state: omega must be > 0");
  if (grid.n_points < 64) throw config_error("gp_ground_state: grid too small");

  GPField f;
  f.lambda = lambda;
  f.omega = omega;
  f.extent = grid.resolved_extent(lambda, omega);
  f.dx = 2.0 * f.extent / grid.n_points;
  f.psi.resize(grid.n_points);

  // initial guess: Gaussian for weak coupling, Thomas-Fermi profile beyond
  const double mu = tf_chemical_potential(lambda, omega);
  for (int j = 0; j < f.n(); ++j) {
    const double x = f.x_at(j);
    if (lambda > 10.0) {
      const double d = std::max(0.0, (mu - 0.5 * omega * omega * x * x) / lambda);
      f.psi[j] = std::sqrt(d);
    } else {
      f.psi[j] = std::pow(omega / kPi, 0.25) * std::exp(-0.5 * omega * x * x);
    }
  }
  {
    const double nrm = std::sqrt(f.norm());
    for (auto& v : f.psi) v /= nrm;
  }

  FftPair fft(f.n());
  const auto k = k_grid(f.n(), f.extent);
  std::vector<double> kin_phase(f.n());

  // converge at the requested step, then refine dtau so the split-step
  // fixed point is within O(dtau_min^2) of the true stationary state.  Each
  // refinement gets a mandatory relaxation budget: the energy rate alone
  // cannot see the tiny fixed-point displacement.
  const double dtau_min = 6.25e-5;
  double dtau = opt.dtau;
  long relax_until = 0;
  auto set_phase = [&]() {
    for (int j = 0; j < f.n(); ++j) kin_phase[j] = std::exp(-0.5 * k[j] * k[j] * dtau);
  };
  set_phase();

  const int check_every = 64;
  double e_prev = field_energy(f, fft, k);
  if (opt.energy_history) opt.energy_history->push_back(e_prev);
  double rate = 1.0;
  long step = 0;
  for (; step < opt.max_steps; ++step) {
    // half potential+interaction, full kinetic, half potential+interaction
    for (int j = 0; j < f.n(); ++j) {
      const double x = f.x_at(j);
      const double v = 0.5 * omega * omega * x * x + lambda * std::norm(f.psi[j]);
      f.psi[j] *= std::exp(-0.5 * dtau * v);
    }
    std::copy(f.psi.begin(), f.psi.end(), fft.data());
    fft.forward();
    for (int j = 0; j < f.n(); ++j) fft.data()[j] *= kin_phase[j];
    fft.backward();
    const double inv_n = 1.0 / f.n();
    for (int j = 0; j < f.n(); ++j) f.psi[j] = fft.data()[j] * inv_n;
    for (int j = 0; j < f.n(); ++j) {
      const double x = f.x_at(j);
      const double v = 0.5 * omega * omega * x * x + lambda * std::norm(f.psi[j]);
      f.psi[j] *= std::exp(-0.5 * dtau * v);
    }
    const double nrm = std::sqrt(f.norm());
    for (auto& v : f.psi) v /= nrm;

    if ((step + 1) % check_every == 0) {
      const double e = field_energy(f, fft, k);
      if (opt.energy_history) opt.energy_history->push_back(e);
      rate = std::abs(e - e_prev) / (check_every * dtau * std::max(1.0, std::abs(e)));
      e_prev = e;
      if (rate < opt.rate_tol && step >= relax_until) {
        if (dtau <= dtau_min) break;
        dtau = std::max(dtau_min, 0.25 * dtau);
        set_phase();
        // damp the displaced components (relax over ~4 trap times)
        relax_until = step + long(4.0 / (std::max(omega, 0.5) * dtau));
      }
    }
  }
  if (step >= opt.max_steps)
    throw numeric_error("gp_ground_state: no convergence, residual rate " +
                        std::to_string(rate));
  f.energy = e_prev;
  return f;
}

EvolveResult gp_evolve(const GPField& initial, double lambda, double omega_post,
                       const EvolveOptions& opt) {
  if (!(omega_post > 0.0)) throw config_error("gp_evolve: omega_post must be > 0");
  if (opt.periods < 1 || opt.samples_per_period < 2)
    throw config_error("gp_evolve: bad sampling parameters");

  EvolveResult res;
  res.final_field = initial;
  GPField& f = res.final_field;
  f.omega = omega_post;
  f.lambda = lambda;

  const double period = 2.0 * kPi / omega_post;
  const double dt_sample = period / opt.samples_per_period;
  const int count = opt.periods * opt.samples_per_period;

  FftPair fft(f.n());
  const auto k = k_grid(f.n(), f.extent);

  // Nonlinear split-step resonance guard: the kinetic phase advance at the
  // grid's Nyquist momentum must stay below pi per step, or the interaction
  // pumps the resonant shells and detonates the high-k tail.
  double dt_target = opt.dt_periods * period;
  if (lambda > 0.0) {
    double k_max = 0.0;
    for (double kv : k) k_max = std::max(k_max, std::abs(kv));
    dt_target = std::min(dt_target, 0.8 * 2.0 * kPi / (k_max * k_max));
  }
  const int substeps = std::max(1, int(std::ceil(dt_sample / dt_target)));
  const double dt = dt_sample / substeps;
  std::vector<cplx> kin_phase(f.n());
  for (int j = 0; j < f.n(); ++j)
    kin_phase[j] = std::exp(cplx(0.0, -0.5 * k[j] * k[j] * dt));

  res.x2.t0 = 0.0;
  res.x2.dt = dt_sample;
  res.x2.samples.resize(count);

  const double e_ref = field_energy(f, fft, k);
  const double norm_ref = f.norm();

  for (int s = 0; s < count; ++s) {
    if (s > 0) {
      for (int sub = 0; sub < substeps; ++sub) {
        for (int j = 0; j < f.n(); ++j) {
          const double x = f.x_at(j);
          const double v = 0.5 * omega_post * omega_post * x * x + lambda * std::norm(f.psi[j]);
          f.psi[j] *= std::exp(cplx(0.0, -0.5 * dt * v));
        }
        std::copy(f.psi.begin(), f.psi.end(), fft.data());
        fft.forward();
        for (int j = 0; j < f.n(); ++j) fft.data()[j] *= kin_phase[j];
        fft.backward();
        const double inv_n = 1.0 / f.n();
        for (int j = 0; j < f.n(); ++j) f.psi[j] = fft.data()[j] * inv_n;
        for (int j = 0; j < f.n(); ++j) {
          const double x = f.x_at(j);
          const double v = 0.5 * omega_post * omega_post * x * x + lambda * std::norm(f.psi[j]);
          f.psi[j] *= std::exp(cplx(0.0, -0.5 * dt * v));
        }
      }
    }
    res.x2.samples[s] = f.x2_moment();

    // diagnostics
    res.max_norm_error = std::max(res.max_norm_error, std::abs(f.norm() - norm_ref));
    double peak = 0.0;
    for (const auto& v : f.psi) peak = std::max(peak, std::norm(v));
    const double edge = std::max(std::norm(f.psi.front()), std::norm(f.psi.back()));
    if (edge > opt.boundary_tol * peak)
      throw numeric_error("gp_evolve: density reached the box boundary (edge/peak " +
                          std::to_string(edge / peak) + "); enlarge the grid");
    if (s % 64 == 0 || s + 1 == count) {
      const double e = field_energy(f, fft, k);
      res.max_energy_rel_error = std::max(
          res.max_energy_rel_error, std::abs(e - e_ref) / std::max(1.0, std::abs(e_ref)));
    }
  }

  res.x2.add_meta("engine", "gp");
  res.x2.add_meta("lambda", lambda);
  res.x2.add_meta("omega_post", omega_post);
  res.x2.add_meta("grid_points", double(f.n()));
  res.x2.add_meta("extent", f.extent);
  res.x2.add_meta("dt", dt);
  res.x2.add_meta("version", std::string(kVersion));
  return res;
}

FrequencyEstimate mf_breathing_frequency(const trap::QuenchSpec& quench,
                                         const GPGrid& grid, const EvolveOptions& opt) {
  quench.validate();
  const double lambda = quench.g * (quench.n_particles - 1);
  GPField ground = gp_ground_state(lambda, quench.omega_pre, grid);
  EvolveResult run = gp_evolve(ground, lambda, quench.omega_post, opt);
  spectral::SineFit fit = spectral::fit_sine(run.x2);
  FrequencyEstimate est;
  est.frequency = fit.frequency;
  est.residual = fit.residual;
  est.sigma = std::max(fit.residual * 2.0 * kPi / run.x2.duration(), 1e-10);
  return est;
}

}  // namespace qbreathe::gp
