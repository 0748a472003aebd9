#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "twistor/error.hpp"

namespace twistor {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr cd kI{0.0, 1.0};

/// Reciprocal condition numbers below this are treated as singular.
inline constexpr double kMinRcond = 1e-13;

/// Integer power by repeated squaring; ipow(0, 0) = 1.
inline cd ipow(cd x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  cd out{1.0};
  while (k > 0) {
    if (k & 1) out *= x;
    x *= x;
    k >>= 1;
  }
  return out;
}

inline CMatrix identity(int n) { return CMatrix::Identity(n, n); }

inline bool is_diagonal(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cd{}) return false;
  return true;
}

/// Spectral norm. Exact shortcut for diagonal input.
inline double norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  if (is_diagonal(m)) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, i)));
    return best;
  }
  return m.operatorNorm();
}

inline CMatrix mat_mul(const CMatrix& a, const CMatrix& b) { return a * b; }

inline CMatrix commutator(const CMatrix& x, const CMatrix& y) { return x * y - y * x; }

inline CMatrix mat_inv(const CMatrix& m) {
  if (is_diagonal(m)) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      lo = std::min(lo, std::abs(m(i, i)));
      hi = std::max(hi, std::abs(m(i, i)));
    }
    if (!(hi > 0.0) || lo < kMinRcond * hi)
      throw Error(ErrorCode::non_invertible, "diagonal matrix is singular");
    CMatrix out = CMatrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, i) = 1.0 / m(i, i);
    return out;
  }
  Eigen::PartialPivLU<CMatrix> lu(m);
  if (!(lu.rcond() >= kMinRcond))
    throw Error(ErrorCode::non_invertible, "reciprocal condition number " + std::to_string(lu.rcond()));
  return lu.inverse();
}

/// Scaling and squaring with a truncated Taylor series.
inline CMatrix mat_exp(const CMatrix& x) {
  const auto n = x.rows();
  if (is_diagonal(x)) {
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = std::exp(x(i, i));
    return out;
  }
  const double size = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (size > 0.5) squarings = static_cast<int>(std::ceil(std::log2(size / 0.5)));
  const CMatrix y = x / std::ldexp(1.0, squarings);
  CMatrix term = CMatrix::Identity(n, n);
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * y / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Principal matrix logarithm.
inline CMatrix mat_log(const CMatrix& x) {
  const auto n = x.rows();
  if (is_diagonal(x)) {
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x(i, i) == cd{}) throw Error(ErrorCode::ill_conditioned, "logarithm of a singular matrix");
      out(i, i) = std::log(x(i, i));
    }
    return out;
  }
  Eigen::PartialPivLU<CMatrix> lu(x);
  if (!(lu.rcond() >= kMinRcond))
    throw Error(ErrorCode::ill_conditioned, "logarithm of a near-singular matrix (rcond " +
                                                std::to_string(lu.rcond()) + ")");
  CMatrix out = x.log();
  if (!out.allFinite()) throw Error(ErrorCode::ill_conditioned, "matrix logarithm is not finite");
  return out;
}

/// d/dt exp(l + t w) at t = 0, via the exponential of the block matrix [[l, w], [0, l]].
inline CMatrix exp_derivative(const CMatrix& l, const CMatrix& w) {
  const auto n = l.rows();
  if (is_diagonal(l) && is_diagonal(w)) {
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = std::exp(l(i, i)) * w(i, i);
    return out;
  }
  CMatrix block = CMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = l;
  block.bottomRightCorner(n, n) = l;
  block.topRightCorner(n, n) = w;
  return mat_exp(block).topRightCorner(n, n);
}

}  // namespace twistor
