#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "biconnect/error.hpp"

namespace biconnect {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

inline constexpr double kDefaultCheckTol = 1e-9;
inline constexpr double kRoundTripTol = 1e-12;
inline constexpr std::size_t kMaxSystemDimension = 20000;

/// Orthonormal basis (columns) of ker A. Singular values below
/// `tol * max(σ_max, 1)` count as zero, so a matrix of pure roundoff has
/// full kernel. Each basis vector is phase-fixed so that its
/// first entry of maximal modulus is real and positive.
inline MatrixC nullspace(const MatrixC& a, double tol) {
  const auto n = a.cols();
  if (n == 0) return MatrixC(0, 0);
  if (a.rows() == 0) return MatrixC::Identity(n, n);
  if (static_cast<std::size_t>(a.rows()) > kMaxSystemDimension ||
      static_cast<std::size_t>(n) > kMaxSystemDimension)
    throw CapExceededError("linear system exceeds the dimension cap");
  Eigen::BDCSVD<MatrixC> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(smax, 1.0)) ++rank;
  MatrixC basis = svd.matrixV().rightCols(n - rank);
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double m = std::abs(basis(i, j));
      if (m > best_abs + 1e-12) {
        best_abs = m;
        best = i;
      }
    }
    if (best_abs > 0.0) basis.col(j) *= std::conj(basis(best, j)) / best_abs;
  }
  return basis;
}

/// max |A*A - I| and max |AA* - I| (0 for empty A).
inline double unitarity_defect(const MatrixC& a) {
  if (a.size() == 0) return 0.0;
  const MatrixC l = a.adjoint() * a - MatrixC::Identity(a.cols(), a.cols());
  const MatrixC r = a * a.adjoint() - MatrixC::Identity(a.rows(), a.rows());
  return std::max(l.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff());
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix.
template <class Rng>
MatrixC random_unitary(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixC z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<MatrixC> qr(z);
  MatrixC q = qr.householderQ();
  const MatrixC r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Deterministic generator used for every seeded random object in the library.
using Rng = std::mt19937_64;

}  // namespace biconnect
