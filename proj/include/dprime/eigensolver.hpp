#pragma once

// Lowest eigenpairs of a sparse generalized problem A x = mu W x with W a
// positive diagonal, by shift-and-invert block Krylov iteration with
// Rayleigh-Ritz extraction and thick restarts. Blocks make clusters of
// equal eigenvalues (rotational symmetry) come out with full multiplicity.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenOptions {
  int block = 8;
  int max_basis = 0;  // 0: automatic
  double tol = 1e-10;
  int max_iterations = 500;
  std::uint64_t seed = 12345;
};

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // W-orthonormal columns
  int iterations = 0;
  double shift = 0;
};

/// `count` lowest eigenpairs; `shift` must lie strictly below the spectrum.
inline EigenPairs lowest_eigenpairs(const SparseMatrix& A, const Eigen::VectorXd& W, int count, double shift,
                                    EigenOptions opt = {}) {
  const Eigen::Index n = A.rows();
  if (count < 1 || count > n) throw DomainError("lowest_eigenpairs: bad count");
  const Eigen::VectorXd sw = W.cwiseSqrt();

  SparseMatrix S = A;
  for (Eigen::Index i = 0; i < n; ++i) S.coeffRef(i, i) -= shift * W[i];
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("shifted factorization failed", 0);
  if ((ldlt.vectorD().array() <= 0).any())
    throw DomainError("eigensolver shift is not below the spectrum");

  // Symmetric operator (W^{-1/2} A W^{-1/2} - shift)^{-1} = W^{1/2} S^{-1} W^{1/2}.
  auto apply = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y = sw.asDiagonal() * X;
    Y = ldlt.solve(Y);
    return Eigen::MatrixXd(sw.asDiagonal() * Y);
  };

  const int b = std::max(1, std::min<int>(opt.block, static_cast<int>(n)));
  const int max_basis = static_cast<int>(
      std::min<Eigen::Index>(n, opt.max_basis > 0 ? opt.max_basis : std::max(3 * count + 4 * b, 60)));

  Eigen::MatrixXd Q(n, 0), AQ(n, 0);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(n, b);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = gauss(rng);

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    // Orthogonalize the new block against the basis (twice) and within itself.
    for (int pass = 0; pass < 2; ++pass)
      if (Q.cols() > 0) X -= Q * (Q.transpose() * X);
    Eigen::MatrixXd Xn(n, 0);
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      Eigen::VectorXd v = X.col(c);
      for (int pass = 0; pass < 2; ++pass) {
        if (Q.cols() > 0) v -= Q * (Q.transpose() * v);
        if (Xn.cols() > 0) v -= Xn * (Xn.transpose() * v);
      }
      const double nv = v.norm();
      if (nv > 1e-10 * std::max(1.0, X.col(c).norm())) {
        Xn.conservativeResize(n, Xn.cols() + 1);
        Xn.col(Xn.cols() - 1) = v / nv;
      }
    }
    if (Xn.cols() == 0) {
      for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = gauss(rng);
      continue;
    }
    const Eigen::MatrixXd Y = apply(Xn);
    const Eigen::Index m0 = Q.cols();
    Q.conservativeResize(n, m0 + Xn.cols());
    AQ.conservativeResize(n, m0 + Xn.cols());
    Q.rightCols(Xn.cols()) = Xn;
    AQ.rightCols(Xn.cols()) = Y;

    if (Q.cols() < count) {
      X = Y;
      continue;
    }
    Eigen::MatrixXd T = Q.transpose() * AQ;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // Largest Ritz values of the inverse are the lowest eigenvalues.
    const Eigen::Index m = T.rows();
    theta = es.eigenvalues().reverse();
    ritz = es.eigenvectors().rowwise().reverse();

    bool converged = true;
    for (int k = 0; k < count; ++k) {
      const Eigen::VectorXd r = AQ * ritz.col(k) - theta[k] * (Q * ritz.col(k));
      if (r.norm() > opt.tol * std::abs(theta[k])) {
        converged = false;
        break;
      }
    }
    if (converged) {
      EigenPairs out;
      out.shift = shift;
      out.iterations = it;
      out.values.resize(count);
      out.vectors.resize(n, count);
      for (int k = 0; k < count; ++k) {
        out.values[k] = shift + 1.0 / theta[k];
        out.vectors.col(k) = (Q * ritz.col(k)).cwiseQuotient(sw);
      }
      return out;
    }

    X = Y;
    if (Q.cols() + b > max_basis) {
      // Thick restart on the leading Ritz vectors.
      const Eigen::Index keep = std::min<Eigen::Index>(m, count + b);
      const Eigen::MatrixXd Sk = ritz.leftCols(keep);
      Q = (Q * Sk).eval();
      AQ = (AQ * Sk).eval();
      X = AQ.rightCols(std::min<Eigen::Index>(b, keep));
    }
  }
  throw ConvergenceError("block Krylov eigensolver did not converge", opt.max_iterations);
}

}  // namespace dprime
