#pragma once

#include <Eigen/Dense>

namespace qbreathe::numerics {

// Lowest n_lowest eigenpairs of a symmetric tridiagonal matrix
// (diag d[0..n-1], off-diagonal e[0..n-2]) by Sturm-sequence bisection
// plus inverse iteration.  Intended for well-separated low-lying spectra;
// cost O(n_lowest * n), so large grids stay cheap.
struct TridiagEigs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k <-> values[k], unit Euclidean norm
};

TridiagEigs lowest_eigenpairs_tridiag(const Eigen::VectorXd& diag,
                                      const Eigen::VectorXd& offdiag,
                                      int n_lowest);

}  // namespace qbreathe::numerics
