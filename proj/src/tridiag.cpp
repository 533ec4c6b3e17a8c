#include "qbreathe/tridiag.hpp"

#include <cmath>
#include <limits>

#include "qbreathe/common.hpp"

namespace qbreathe::numerics {

namespace {

// Number of eigenvalues of T strictly below x (Sturm count via the
// shifted LDL^T recurrence).
int sturm_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
  const int n = int(d.size());
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  int count = 0;
  double q = d[0] - x;
  if (q < 0.0) ++count;
  for (int i = 1; i < n; ++i) {
    if (std::abs(q) < tiny) q = (q < 0.0 ? -tiny : tiny);
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solve (T - lambda I) x = b by Gaussian elimination with partial
// pivoting; the factor has bandwidth 2 above the diagonal.
void shifted_tridiag_solve(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                           double lambda, Eigen::VectorXd& x) {
  const int n = int(d.size());
  Eigen::VectorXd a(n), b(n), c(n);  // diagonal, super, super2 of the factor
  Eigen::VectorXd sub(n);            // subdiagonal of T - lambda I
  for (int i = 0; i < n; ++i) a[i] = d[i] - lambda;
  for (int i = 0; i + 1 < n; ++i) {
    b[i] = e[i];
    sub[i] = e[i];
  }
  b[n - 1] = 0.0;
  c.setZero();

  const double tiny = 1e-300;
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(sub[i]) > std::abs(a[i])) {
      std::swap(a[i], sub[i]);
      std::swap(b[i], a[i + 1]);
      std::swap(c[i], b[i + 1]);
      std::swap(x[i], x[i + 1]);
    }
    if (std::abs(a[i]) < tiny) a[i] = (a[i] < 0.0 ? -tiny : tiny);
    const double m = sub[i] / a[i];
    a[i + 1] -= m * b[i];
    b[i + 1] -= m * c[i];
    x[i + 1] -= m * x[i];
  }
  if (std::abs(a[n - 1]) < tiny) a[n - 1] = (a[n - 1] < 0.0 ? -tiny : tiny);

  x[n - 1] /= a[n - 1];
  if (n >= 2) x[n - 2] = (x[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2];
  for (int i = n - 3; i >= 0; --i)
    x[i] = (x[i] - b[i] * x[i + 1] - c[i] * x[i + 2]) / a[i];
}

}  // namespace

TridiagEigs lowest_eigenpairs_tridiag(const Eigen::VectorXd& diag,
                                      const Eigen::VectorXd& offdiag,
                                      int n_lowest) {
  const int n = int(diag.size());
  if (n < 1) throw config_error("tridiag: empty matrix");
  if (int(offdiag.size()) != n - 1)
    throw config_error("tridiag: offdiag size must be n-1");
  if (n_lowest < 1 || n_lowest > n)
    throw config_error("tridiag: n_lowest out of range");

  // Gershgorin bounds.
  double lo = diag[0], hi = diag[0];
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(offdiag[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double span = std::max(hi - lo, 1.0);
  lo -= 1e-8 * span;
  hi += 1e-8 * span;

  TridiagEigs out;
  out.values.resize(n_lowest);
  out.vectors.resize(n, n_lowest);

  for (int k = 0; k < n_lowest; ++k) {
    // Bisect for the (k+1)-th smallest eigenvalue.
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(diag, offdiag, mid) >= k + 1)
        b = mid;
      else
        a = mid;
      if (b - a <= 1e-15 * span + 1e-14 * std::abs(mid)) break;
    }
    double lambda = 0.5 * (a + b);

    // Inverse iteration; a couple of passes suffice for separated spectra.
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    // deterministic perturbation to avoid an unlucky orthogonal start
    for (int i = 0; i < n; ++i) v[i] += 1e-3 * std::sin(0.7 * (i + 1));
    v.normalize();
    for (int pass = 0; pass < 4; ++pass) {
      // bias the shift off the exact eigenvalue for a stable solve
      shifted_tridiag_solve(diag, offdiag, lambda + 1e-12 * span, v);
      // re-orthogonalize against earlier vectors if clustered
      for (int j = 0; j < k; ++j) {
        if (std::abs(out.values[j] - lambda) < 1e-6 * span)
          v -= out.vectors.col(j).dot(v) * out.vectors.col(j);
      }
      const double nv = v.norm();
      if (!(nv > 0.0) || !std::isfinite(nv))
        throw numeric_error("tridiag: inverse iteration broke down");
      v /= nv;
    }
    // Rayleigh-quotient polish of the eigenvalue.
    double rq = 0.0;
    for (int i = 0; i < n; ++i) {
      double hv = diag[i] * v[i];
      if (i > 0) hv += offdiag[i - 1] * v[i - 1];
      if (i + 1 < n) hv += offdiag[i] * v[i + 1];
      rq += v[i] * hv;
    }
    out.values[k] = rq;
    if (v[0] < 0.0 || (n > 1 && v[0] == 0.0 && v[1] < 0.0)) v = -v;  // fixed sign
    out.vectors.col(k) = v;
  }
  return out;
}

}  // namespace qbreathe::numerics
