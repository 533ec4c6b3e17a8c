#include "qbreathe/fewbody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbreathe/spectral.hpp"

namespace qbreathe::fewbody {

namespace {

using Triplet = Eigen::Triplet<double>;

// Triplets hold the row >= col triangle only; mirroring makes the matrix
// symmetric to the last bit.
SparseMat mirror_lower_triplets(std::vector<Triplet>& trip, std::size_t dim) {
  SparseMat lower(dim, dim);
  lower.setFromTriplets(trip.begin(), trip.end());
  SparseMat full = SparseMat(lower.transpose()) + lower;
  for (int k = 0; k < full.outerSize(); ++k)
    for (SparseMat::InnerIterator it(full, k); it; ++it)
      if (it.row() == it.col()) it.valueRef() *= 0.5;
  full.prune(0.0);
  full.makeCompressed();
  return full;
}

Eigen::VectorXcd apply_real(const SparseMat& h, const Eigen::VectorXcd& x) {
  const Eigen::VectorXd xr = x.real();
  const Eigen::VectorXd xi = x.imag();
  const Eigen::VectorXd yr = h * xr;
  const Eigen::VectorXd yi = h * xi;
  Eigen::VectorXcd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = {yr[i], yi[i]};
  return y;
}

}  // namespace

SparseMat assemble_one_body(const FockBasis& basis, const Eigen::MatrixXd& op) {
  const int m = basis.n_orbitals();
  if (op.rows() != m || op.cols() != m)
    throw config_error("assemble_one_body: operator size does not match basis");
  if (!op.isApprox(op.transpose()))
    throw config_error("assemble_one_body: operator must be symmetric");
  const std::size_t dim = basis.size();

  std::vector<Triplet> trip;
  trip.reserve(dim * (m + 1));
  FockBasis::Occ work(m);
  for (std::size_t s = 0; s < dim; ++s) {
    const std::uint8_t* occ = basis.state(s);
    for (int mo = 0; mo < m; ++mo) {
      if (occ[mo] == 0) continue;
      if (op(mo, mo) != 0.0) trip.emplace_back(int(s), int(s), op(mo, mo) * occ[mo]);
      for (int no = 0; no < m; ++no) {
        if (no == mo || op(no, mo) == 0.0) continue;
        std::copy(occ, occ + m, work.begin());
        const double amp = std::sqrt(double(occ[mo]) * (occ[no] + 1));
        work[mo] -= 1;
        work[no] += 1;
        const std::size_t t = basis.index_of(work);
        if (t >= s) trip.emplace_back(int(t), int(s), op(no, mo) * amp);
      }
    }
  }
  return mirror_lower_triplets(trip, dim);
}

SparseMat build_hamiltonian(const FockBasis& basis, const trap::QuenchSpec& quench,
                            const trap::ContactTensorTable& tensor) {
  quench.validate();
  const int m = basis.n_orbitals();
  if (tensor.n_orbitals() < m)
    throw config_error("build_hamiltonian: contact table smaller than basis");
  if (std::abs(tensor.omega() - quench.omega_pre) > 1e-14)
    throw config_error("build_hamiltonian: contact table frequency mismatch");

  trap::HOBasisSpec spec{m, quench.omega_pre};
  const Eigen::MatrixXd h1 = trap::one_body_hamiltonian_matrix(spec, quench);
  SparseMat h = assemble_one_body(basis, h1);
  if (quench.g == 0.0) return h;

  const std::size_t dim = basis.size();
  const double half_g = 0.5 * quench.g;
  std::vector<Triplet> trip;
  trip.reserve(dim * m * m);

  FockBasis::Occ t2(m), t3(m), t4(m);
  for (std::size_t s = 0; s < dim; ++s) {
    const std::uint8_t* occ = basis.state(s);
    for (int d = 0; d < m; ++d) {
      if (occ[d] == 0) continue;
      const double amp_d = std::sqrt(double(occ[d]));
      for (int c = 0; c < m; ++c) {
        const int nc = occ[c] - (c == d ? 1 : 0);
        if (nc < 1) continue;
        const double amp_c = amp_d * std::sqrt(double(nc));
        std::copy(occ, occ + m, t2.begin());
        t2[d] -= 1;
        t2[c] -= 1;
        for (int b = 0; b < m; ++b) {
          const double amp_b = amp_c * std::sqrt(double(t2[b] + 1));
          std::copy(t2.begin(), t2.end(), t3.begin());
          t3[b] += 1;
          for (int a = (b + c + d) % 2; a < m; a += 2) {  // even a+b+c+d only
            const double val = tensor(a, b, c, d);
            if (val == 0.0) continue;
            const double amp = amp_b * std::sqrt(double(t3[a] + 1));
            std::copy(t3.begin(), t3.end(), t4.begin());
            t4[a] += 1;
            const std::size_t t = basis.index_of(t4);
            if (t >= s) trip.emplace_back(int(t), int(s), half_g * val * amp);
          }
        }
      }
    }
  }
  SparseMat v = mirror_lower_triplets(trip, dim);
  SparseMat result = h + v;
  result.makeCompressed();
  return result;
}

SparseMat build_hamiltonian(const FockBasis& basis, const trap::QuenchSpec& quench) {
  trap::ContactTensorTable tensor(basis.n_orbitals(), quench.omega_pre);
  return build_hamiltonian(basis, quench, tensor);
}

GroundState ground_state(const SparseMat& h, const GroundStateOptions& opt) {
  const std::size_t dim = h.rows();
  if (dim == 0) throw config_error("ground_state: empty Hamiltonian");

  GroundState gs;
  if (int(dim) <= opt.dense_dim_max) {
    const Eigen::MatrixXd hd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hd);
    if (solver.info() != Eigen::Success)
      throw numeric_error("ground_state: dense eigensolver failed");
    gs.energy = solver.eigenvalues()[0];
    gs.coefficients = solver.eigenvectors().col(0);
    // the repulsive bosonic ground state is unique; a degenerate bottom
    // signals a broken Hamiltonian
    if (dim > 1 && solver.eigenvalues()[1] - gs.energy <
                       1e-12 * std::max(1.0, std::abs(gs.energy)))
      throw numeric_error("ground_state: unexpected ground-state degeneracy");
  } else {
    // Lanczos with full reorthogonalization for the lowest pair.
    const int m_max = int(std::min<std::size_t>(opt.lanczos_max_iter, dim));
    Eigen::MatrixXd v(dim, m_max);
    Eigen::VectorXd alpha(m_max), beta(m_max);
    Eigen::VectorXd q = Eigen::VectorXd::Ones(dim);
    for (std::size_t i = 0; i < dim; ++i) q[i] += 1e-4 * std::cos(1.7 * double(i));
    q.normalize();
    bool converged = false;
    double resid = 0.0;
    for (int j = 0; j < m_max && !converged; ++j) {
      v.col(j) = q;
      Eigen::VectorXd w = h * q;
      alpha[j] = q.dot(w);
      w -= alpha[j] * q;
      if (j > 0) w -= beta[j - 1] * v.col(j - 1);
      for (int pass = 0; pass < 2; ++pass)
        w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
      beta[j] = w.norm();
      const int m_used = j + 1;

      if (j >= 10 || beta[j] < 1e-14 || j + 1 == m_max) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m_used, m_used);
        for (int i = 0; i < m_used; ++i) {
          t(i, i) = alpha[i];
          if (i + 1 < m_used) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
        const double e0 = small.eigenvalues()[0];
        Eigen::VectorXd ritz = v.leftCols(m_used) * small.eigenvectors().col(0);
        resid = (h * ritz - e0 * ritz).norm();
        if (resid < opt.lanczos_tol * std::max(1.0, std::abs(e0)) || beta[j] < 1e-14) {
          gs.energy = e0;
          gs.coefficients = ritz.normalized();
          converged = true;
        }
      }
      if (!converged) {
        if (beta[j] < 1e-14) break;
        q = w / beta[j];
      }
    }
    if (!converged)
      throw numeric_error("ground_state: Lanczos did not converge, residual " +
                          std::to_string(resid));
  }
  // sign convention: largest-magnitude coefficient positive
  int imax = 0;
  for (Eigen::Index i = 1; i < gs.coefficients.size(); ++i)
    if (std::abs(gs.coefficients[i]) > std::abs(gs.coefficients[imax])) imax = int(i);
  if (gs.coefficients[imax] < 0) gs.coefficients = -gs.coefficients;
  return gs;
}

Eigen::MatrixXcd one_body_density(const FockBasis& basis, const Eigen::VectorXcd& state) {
  const int m = basis.n_orbitals();
  const std::size_t dim = basis.size();
  if (std::size_t(state.size()) != dim)
    throw config_error("one_body_density: state size does not match basis");

  // rho_{nm} = <a^dag_m a_n> / N: annihilate at n, create at m.
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(m, m);
  FockBasis::Occ work(m);
  for (std::size_t s = 0; s < dim; ++s) {
    const std::complex<double> cs = state[s];
    if (cs == std::complex<double>(0, 0)) continue;
    const std::uint8_t* occ = basis.state(s);
    for (int n = 0; n < m; ++n) {
      if (occ[n] == 0) continue;
      rho(n, n) += std::conj(cs) * cs * double(occ[n]);
      for (int mm = 0; mm < m; ++mm) {
        if (mm == n) continue;
        std::copy(occ, occ + m, work.begin());
        const double amp = std::sqrt(double(occ[n]) * (occ[mm] + 1));
        work[n] -= 1;
        work[mm] += 1;
        const std::size_t t = basis.index_of(work);
        rho(n, mm) += std::conj(state[t]) * cs * amp;
      }
    }
  }
  return rho / double(basis.n_particles());
}

double x2_expectation(const FockBasis& basis, const Eigen::VectorXcd& state,
                      double omega_basis) {
  const int m = basis.n_orbitals();
  const Eigen::MatrixXcd rho = one_body_density(basis, state);
  // N tr(x^2 rho) = sum_{nm} (x^2)_{nm} <a^dag_n a_m>
  double acc = 0.0;
  for (int n = 0; n < m; ++n)
    for (int k = std::max(0, n - 2); k < std::min(m, n + 3); ++k)
      acc += (trap::x2_matrix_element(n, k, omega_basis) * rho(k, n)).real();
  return acc * basis.n_particles();
}

namespace {

struct EigPropagator {
  Eigen::VectorXd energies;  // significant modes only
  Eigen::VectorXcd b;        // their initial amplitudes
  Eigen::MatrixXcd x2_sub, x_sub;
  double dropped_weight = 0.0;
};

EigPropagator make_eig_propagator(const FockBasis& basis, const Eigen::VectorXcd& psi0,
                                  const SparseMat& h_post, const trap::QuenchSpec& quench,
                                  double cutoff) {
  const Eigen::MatrixXd hd(h_post);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hd);
  if (solver.info() != Eigen::Success)
    throw numeric_error("propagate_quench: dense eigensolver failed");

  const Eigen::VectorXd ar = solver.eigenvectors().transpose() * Eigen::VectorXd(psi0.real());
  const Eigen::VectorXd ai = solver.eigenvectors().transpose() * Eigen::VectorXd(psi0.imag());

  std::vector<int> keep;
  double dropped = 0.0;
  for (Eigen::Index j = 0; j < ar.size(); ++j) {
    const double mag = std::hypot(ar[j], ai[j]);
    if (mag > cutoff)
      keep.push_back(int(j));
    else
      dropped += mag * mag;
  }
  if (keep.empty()) throw numeric_error("propagate_quench: initial state has no weight");

  EigPropagator p;
  const int ns = int(keep.size());
  p.energies.resize(ns);
  p.b.resize(ns);
  Eigen::MatrixXd modes(psi0.size(), ns);
  for (int i = 0; i < ns; ++i) {
    p.energies[i] = solver.eigenvalues()[keep[i]];
    p.b[i] = {ar[keep[i]], ai[keep[i]]};
    modes.col(i) = solver.eigenvectors().col(keep[i]);
  }
  p.dropped_weight = dropped;

  const int m = basis.n_orbitals();
  Eigen::MatrixXd x2(m, m), x1(m, m);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) {
      x2(a, c) = trap::x2_matrix_element(a, c, quench.omega_pre);
      x1(a, c) = trap::x_matrix_element(a, c, quench.omega_pre);
    }
  const SparseMat x2_op = assemble_one_body(basis, x2);
  const SparseMat x_op = assemble_one_body(basis, x1);
  p.x2_sub = (modes.transpose() * (x2_op * modes)).cast<std::complex<double>>();
  p.x_sub = (modes.transpose() * (x_op * modes)).cast<std::complex<double>>();
  return p;
}

// one Lanczos exponential substep on psi; returns the error estimate
double krylov_substep(const SparseMat& h, Eigen::VectorXcd& psi, double tau, int m_dim) {
  const std::size_t dim = psi.size();
  const int m = int(std::min<std::size_t>(m_dim, dim));
  Eigen::MatrixXcd v(dim, m);
  Eigen::VectorXd alpha(m), beta(m + 1);
  beta.setZero();
  const double nrm = psi.norm();
  v.col(0) = psi / nrm;
  int m_used = m;
  bool breakdown = false;
  Eigen::VectorXcd w;
  for (int j = 0; j < m; ++j) {
    w = apply_real(h, v.col(j));
    alpha[j] = w.dot(v.col(j)).real();
    w -= alpha[j] * v.col(j);
    if (j > 0) w -= beta[j] * v.col(j - 1);
    w -= v.leftCols(j + 1) * (v.leftCols(j + 1).adjoint() * w);
    beta[j + 1] = w.norm();
    if (beta[j + 1] < 1e-14) {
      m_used = j + 1;
      breakdown = true;
      break;
    }
    if (j + 1 < m) v.col(j + 1) = w / beta[j + 1];
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m_used, m_used);
  for (int i = 0; i < m_used; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m_used) t(i, i + 1) = t(i + 1, i) = beta[i + 1];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
  Eigen::VectorXcd coef = small.eigenvectors().row(0).transpose().cast<std::complex<double>>();
  for (int i = 0; i < m_used; ++i)
    coef[i] *= std::exp(std::complex<double>(0, -tau * small.eigenvalues()[i]));
  const Eigen::VectorXcd expo = small.eigenvectors().cast<std::complex<double>>() * coef;

  psi = nrm * (v.leftCols(m_used) * expo);
  if (breakdown) return 0.0;  // evolution exact in the generated subspace
  return std::abs(beta[m_used] * std::abs(expo[m_used - 1])) * 1.0;
}

}  // namespace

PropagationResult propagate_quench(const FockBasis& basis, const Eigen::VectorXcd& psi0,
                                   const SparseMat& h_post, const trap::QuenchSpec& quench,
                                   double dt, int count, const PropagationOptions& opt) {
  if (!(dt > 0.0) || count < 2) throw config_error("propagate_quench: bad time grid");
  const std::size_t dim = basis.size();
  if (std::size_t(h_post.rows()) != dim || std::size_t(psi0.size()) != dim)
    throw config_error("propagate_quench: dimension mismatch");

  PropagationResult res;
  res.x2.t0 = 0.0;
  res.x2.dt = dt;
  res.x2.samples.resize(count);

  const bool dense = int(dim) <= opt.dense_dim_max && !opt.force_krylov;
  if (dense) {
    res.method = "eig";
    EigPropagator p = make_eig_propagator(basis, psi0, h_post, quench, opt.mode_cutoff);
    const int ns = int(p.energies.size());
    Eigen::VectorXcd e(ns);
    for (int s = 0; s < count; ++s) {
      const double t = dt * s;
      for (int j = 0; j < ns; ++j)
        e[j] = p.b[j] * std::exp(std::complex<double>(0, -p.energies[j] * t));
      res.x2.samples[s] = (e.adjoint() * (p.x2_sub * e))(0).real();
      const double xt = (e.adjoint() * (p.x_sub * e))(0).real();
      res.max_abs_x = std::max(res.max_abs_x, std::abs(xt));
    }
    res.max_norm_error =
        std::abs(std::sqrt(p.b.squaredNorm() + p.dropped_weight) - 1.0) + p.dropped_weight;
    res.max_energy_rel_error = 0.0;  // diagonal evolution conserves <H> identically
  } else {
    res.method = "krylov";
    const int m = basis.n_orbitals();
    Eigen::MatrixXd x2(m, m), x1(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) {
        x2(a, c) = trap::x2_matrix_element(a, c, quench.omega_pre);
        x1(a, c) = trap::x_matrix_element(a, c, quench.omega_pre);
      }
    const SparseMat x2_op = assemble_one_body(basis, x2);
    const SparseMat x_op = assemble_one_body(basis, x1);

    Eigen::VectorXcd psi = psi0;
    const double e_ref = psi.dot(apply_real(h_post, psi)).real();
    for (int s = 0; s < count; ++s) {
      if (s > 0) {
        double remaining = dt;
        double tau = dt;
        int guard = 0;
        while (remaining > 1e-15 * dt) {
          tau = std::min(tau, remaining);
          Eigen::VectorXcd trial = psi;
          const double err = krylov_substep(h_post, trial, tau, opt.krylov_dim);
          const double budget = opt.krylov_tol * (tau / dt);
          if (err <= budget) {
            psi = trial;
            remaining -= tau;
            if (err < 0.1 * budget) tau *= 1.5;
          } else if (tau <= 1e-8 * dt) {
            throw numeric_error(
                "propagate_quench: krylov step refused, error estimate " +
                std::to_string(err) + " exceeds budget at substep " + std::to_string(tau));
          } else {
            tau *= 0.5;
          }
          if (++guard > 100000)
            throw numeric_error("propagate_quench: krylov substepping stalled");
        }
      }
      const double nrm = psi.norm();
      res.max_norm_error = std::max(res.max_norm_error, std::abs(nrm - 1.0));
      const double et = psi.dot(apply_real(h_post, psi)).real();
      res.max_energy_rel_error =
          std::max(res.max_energy_rel_error,
                   std::abs(et - e_ref) / std::max(1.0, std::abs(e_ref)));
      res.x2.samples[s] = psi.dot(apply_real(x2_op, psi)).real();
      const double xt = psi.dot(apply_real(x_op, psi)).real();
      res.max_abs_x = std::max(res.max_abs_x, std::abs(xt));
    }
  }

  res.x2.add_meta("engine", "ed");
  res.x2.add_meta("method", res.method);
  res.x2.add_meta("omega_pre", quench.omega_pre);
  res.x2.add_meta("omega_post", quench.omega_post);
  res.x2.add_meta("g", quench.g);
  res.x2.add_meta("n_particles", double(quench.n_particles));
  res.x2.add_meta("n_orbitals", double(basis.n_orbitals()));
  res.x2.add_meta("version", std::string(kVersion));
  return res;
}

std::vector<Eigen::VectorXcd> propagate_states(const FockBasis& basis,
                                               const Eigen::VectorXcd& psi0,
                                               const SparseMat& h_post, double dt,
                                               int count) {
  (void)basis;
  const Eigen::MatrixXd hd(h_post);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hd);
  if (solver.info() != Eigen::Success)
    throw numeric_error("propagate_states: dense eigensolver failed");
  const Eigen::VectorXd ar = solver.eigenvectors().transpose() * Eigen::VectorXd(psi0.real());
  const Eigen::VectorXd ai = solver.eigenvectors().transpose() * Eigen::VectorXd(psi0.imag());
  const Eigen::MatrixXcd modes = solver.eigenvectors().cast<std::complex<double>>();

  std::vector<Eigen::VectorXcd> out;
  out.reserve(count);
  Eigen::VectorXcd phased(ar.size());
  for (int s = 0; s < count; ++s) {
    const double t = dt * s;
    for (Eigen::Index j = 0; j < ar.size(); ++j)
      phased[j] = std::complex<double>(ar[j], ai[j]) *
                  std::exp(std::complex<double>(0, -solver.eigenvalues()[j] * t));
    out.push_back(modes * phased);
  }
  return out;
}

PropagationResult run_quench_experiment(const trap::QuenchSpec& quench,
                                        const EdRunOptions& opt) {
  quench.validate();
  FockBasis basis(quench.n_particles, opt.n_orbitals, opt.basis_cap);
  trap::ContactTensorTable tensor(opt.n_orbitals, quench.omega_pre);
  const SparseMat h_pre = build_hamiltonian(basis, quench.pre_quench(), tensor);
  GroundStateOptions gopt;
  gopt.dense_dim_max = opt.propagation.dense_dim_max;
  GroundState gs = ground_state(h_pre, gopt);

  const SparseMat h_post = build_hamiltonian(basis, quench, tensor);
  const double period = 2.0 * kPi / quench.omega_post;
  const double dt = period / opt.samples_per_period;
  const int count = opt.periods * opt.samples_per_period;

  const Eigen::VectorXcd psi0 = gs.coefficients.cast<std::complex<double>>();
  PropagationResult res =
      propagate_quench(basis, psi0, h_post, quench, dt, count, opt.propagation);
  res.x2.add_meta("ground_energy", gs.energy);
  res.x2.add_meta("periods", double(opt.periods));
  res.x2.add_meta("samples_per_period", double(opt.samples_per_period));
  return res;
}

CmMixingReport cm_mixing_diagnostic(const trap::QuenchSpec& quench,
                                    const std::vector<int>& m_list,
                                    const EdRunOptions& base) {
  if (quench.n_particles != 2)
    throw config_error("cm_mixing_diagnostic: defined for two particles");
  if (m_list.empty()) throw config_error("cm_mixing_diagnostic: empty orbital list");

  CmMixingReport report;
  const double omega = quench.omega_post;
  for (int m : m_list) {
    EdRunOptions opt = base;
    opt.n_orbitals = m;
    PropagationResult run = run_quench_experiment(quench, opt);

    spectral::Spectrum spec = spectral::power_spectrum(run.x2, {});
    report.resolution_over_omega = spec.resolution() / omega;

    // a stationary signal (possible at tiny bases) has no band-1 peak at all
    double mean = 0.0, rms = 0.0;
    for (double v : run.x2.samples) mean += v;
    mean /= run.x2.count();
    for (double v : run.x2.samples) rms += (v - mean) * (v - mean);
    rms = std::sqrt(rms / run.x2.count());
    const bool has_dynamics = rms > 1e-12 * std::max(1.0, std::abs(mean));

    // the nominal CM line is the top of the lowest band: the
    // highest-frequency sufficiently strong peak in the band-1 window
    auto cands = has_dynamics ? spectral::find_peaks(spec, 0.01)
                              : std::vector<spectral::PeakCandidate>{};
    double max_height = 0.0;
    for (const auto& c : cands) max_height = std::max(max_height, c.height);
    double best = -1.0;
    double best_amp = 0.0;
    for (const auto& c : cands) {
      const double f = c.omega / omega;
      if (f < 1.2 || f > 3.0) continue;
      if (c.height < 0.1 * max_height) continue;
      if (f > best) {
        spectral::LorentzFit fit = spectral::fit_lorentzian(spec, c.bin);
        best = fit.center / omega;
        best_amp = fit.amplitude;
      }
    }
    CmMixingEntry e;
    e.n_orbitals = m;
    e.dim = FockBasis::dimension(quench.n_particles, m);
    if (best < 0.0) {
      // no dynamics in the band (e.g. g = 0 with two orbitals): report NaN
      e.cm_freq_over_omega = std::numeric_limits<double>::quiet_NaN();
      e.drift = std::numeric_limits<double>::quiet_NaN();
      e.amplitude = 0.0;
    } else {
      e.cm_freq_over_omega = best;
      e.drift = best - 2.0;
      e.amplitude = best_amp;
    }
    report.entries.push_back(e);
  }
  const auto& last = report.entries.back();
  report.pass = std::abs(last.drift) < report.resolution_over_omega;
  return report;
}

}  // namespace qbreathe::fewbody
