#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mtlab {

struct EigenPairs {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXd vectors;    // B-normalized columns
  Eigen::VectorXd residuals;  // |Ax - μBx| / (|Ax| + |μ||Bx|)
  int iterations = 0;
};

// The count eigenpairs of A x = μ B x nearest sigma (A symmetric, B symmetric positive definite),
// by block shift-invert subspace iteration with Rayleigh–Ritz. Throws EigensolveFail.
EigenPairs shift_invert_eigs(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                             double sigma, int count, double tol = 1e-9, int max_iter = 300,
                             unsigned seed = 12345);

}  // namespace mtlab
