#include "mtlab/sparse_eigen.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mtlab/error.hpp"

namespace mtlab {

using SpMat = Eigen::SparseMatrix<double>;

EigenPairs shift_invert_eigs(const SpMat& A, const SpMat& B, double sigma, int count, double tol,
                             int max_iter, unsigned seed) {
  const int n = int(A.rows());
  if (count < 1 || count > n) throw Error(ErrorCode::InvalidArgument, "bad eigenpair count");
  const int p = std::min(n, count + std::max(4, count));
  SpMat S = A - sigma * B;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::SparseLU<SpMat> lu;
  bool use_lu = false;
  ldlt.compute(S);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd probe(n);
  for (int i = 0; i < n; ++i) probe[i] = normal(rng);
  if (ldlt.info() != Eigen::Success ||
      (S * ldlt.solve(probe) - probe).norm() > 1e-8 * probe.norm()) {
    use_lu = true;
    lu.analyzePattern(S);
    lu.factorize(S);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFail, "shifted matrix is singular");
  }
  auto solve = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
    return use_lu ? Eigen::MatrixXd(lu.solve(rhs)) : Eigen::MatrixXd(ldlt.solve(rhs));
  };

  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = normal(rng);
  EigenPairs out;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd Y = solve(B * X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    Eigen::MatrixXd AQ = A * Q, BQ = B * Q;
    Eigen::MatrixXd Ar = Q.transpose() * AQ, Br = Q.transpose() * BQ;
    Ar = 0.5 * (Ar + Ar.transpose()).eval();
    Br = 0.5 * (Br + Br.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Ar, Br);
    if (ritz.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFail, "Rayleigh-Ritz failed");
    X = Q * ritz.eigenvectors();
    Eigen::VectorXd theta = ritz.eigenvalues();
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(theta[a] - sigma) < std::abs(theta[b] - sigma); });
    order.resize(count);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] < theta[b]; });
    out.values.resize(count);
    out.vectors.resize(n, count);
    out.residuals.resize(count);
    Eigen::MatrixXd AX = AQ * ritz.eigenvectors(), BX = BQ * ritz.eigenvectors();
    for (int k = 0; k < count; ++k) {
      int j = order[k];
      out.values[k] = theta[j];
      out.vectors.col(k) = X.col(j);
      double num = (AX.col(j) - theta[j] * BX.col(j)).norm();
      out.residuals[k] = num / (AX.col(j).norm() + std::abs(theta[j]) * BX.col(j).norm());
    }
    out.iterations = it;
    if (out.residuals.maxCoeff() <= tol) return out;
  }
  throw Error(ErrorCode::EigensolveFail, "subspace iteration did not converge");
}

}  // namespace mtlab
