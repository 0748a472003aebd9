#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "twistor/cocycle.hpp"
#include "twistor/laurent.hpp"
#include "twistor/matrix.hpp"

namespace twistor {

struct BirkhoffOptions {
  double tol = 1e-12;
  int max_iter = 30;
  int band = -1;          // Laurent band of the factors; -1 means the circle's resolution limit
  double blowup = 1e3;    // ||log D|| above this is treated as divergence
};

/// F12 = psi1^-1 psi2 with psi1 holomorphic in lambda, psi2 holomorphic in zeta and psi2(zeta = 0) = 1.
struct FactorizationResult {
  Cochain0 psi;
  double residual = 0.0;  // max_j || psi1^-1 psi2 - F12 ||
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline int factor_band(const Circle& circle, int requested) {
  if (requested < 0) return circle.max_band();
  if (requested > circle.max_band())
    throw Error(ErrorCode::insufficient_sampling,
                std::to_string(circle.size()) + " samples cannot resolve band " + std::to_string(requested));
  return requested;
}

inline double multiply_back_residual(const CircleSamples& f, const CircleSamples& p1, const CircleSamples& p2) {
  double r = 0.0;
  for (int j = 0; j < f.size(); ++j) r = std::max(r, norm(mat_inv(p1.at(j)) * p2.at(j) - f.at(j)));
  return r;
}

}  // namespace detail

/// Newton-Plemelj iteration. With D = psi1 F psi2^-1 and E = log D split as E = E+ + E-
/// (E+ holding degrees >= 0, E- degrees < 0), the update is psi1 <- exp(-E+) psi1 and
/// psi2 <- exp(E-) psi2, which removes E to first order. After every step the factors are
/// projected back onto their holomorphy class and psi2 is renormalized at zeta = 0.
inline FactorizationResult birkhoff_factorize(const CircleSamples& f, const BirkhoffOptions& opt = {}) {
  const int n = f.dim(), count = f.size();
  const Circle circle(count);
  const int band = detail::factor_band(circle, opt.band);
  const CMatrix one = identity(n);

  for (int j = 0; j < count; ++j) {
    if (!f.at(j).allFinite()) throw Error(ErrorCode::ill_conditioned, "patching matrix is not finite");
    Eigen::PartialPivLU<CMatrix> lu(f.at(j));
    if (!(lu.rcond() >= kMinRcond))
      throw Error(ErrorCode::ill_conditioned, "patching matrix is singular at sample " + std::to_string(j));
  }

  LaurentField c1 = LaurentField::constant(one, band), c2 = LaurentField::constant(one, band);
  CircleSamples p1 = constant_samples(one, count), p2 = constant_samples(one, count);
  CircleSamples e(n, count);
  FactorizationResult r;
  for (int it = 0;; ++it) {
    double size = 0.0;
    for (int j = 0; j < count; ++j) {
      const CMatrix d = p1.at(j) * f.at(j) * mat_inv(p2.at(j));
      e.at(j) = mat_log(d);
      size = std::max(size, norm(e.at(j)));
    }
    r.iterations = it;
    if (!std::isfinite(size) || size > opt.blowup)
      throw Error(ErrorCode::jumping_line, "Birkhoff iteration diverged (||log D|| = " + std::to_string(size) +
                                               " after " + std::to_string(it) + " iterations)");
    if (size <= opt.tol) break;
    if (it == opt.max_iter)
      throw Error(ErrorCode::jumping_line, "Birkhoff iteration did not converge in " + std::to_string(opt.max_iter) +
                                               " iterations (||log D|| = " + std::to_string(size) + ")");

    const LaurentField ec = laurent_from_samples(e, band);
    const LaurentField plus = project(ec, Holomorphy::patch1);
    LaurentField minus = project(ec, Holomorphy::patch2);
    minus.coeff(0).setZero();
    const CircleSamples sp = sample(plus, circle), sm = sample(minus, circle);
    for (int j = 0; j < count; ++j) {
      p1.at(j) = mat_exp(-CMatrix(sp.at(j))) * p1.at(j);
      p2.at(j) = mat_exp(CMatrix(sm.at(j))) * p2.at(j);
    }
    c1 = project(laurent_from_samples(p1, band), Holomorphy::patch1);
    c2 = project(laurent_from_samples(p2, band), Holomorphy::patch2);
    c2.coeff(0) = one;
    p1 = sample(c1, circle);
    p2 = sample(c2, circle);
  }

  r.psi = {std::move(c1), std::move(c2)};
  r.residual = detail::multiply_back_residual(f, p1, p2);
  r.converged = true;
  return r;
}

inline FactorizationResult birkhoff_factorize(const Cochain1& f, const BirkhoffOptions& opt = {}) {
  return birkhoff_factorize(f.f12, opt);
}

/// Exact splitting of F12 = exp(f) for diagonal f: with f = phi1 - phi2 (constant term in
/// phi1), psi1 = exp(-phi1) and psi2 = exp(-phi2), so psi1^-1 psi2 = exp(f).
inline FactorizationResult abelian_factorize(const LaurentField& exponent, const Circle& circle, int band = -1) {
  for (int d = -exponent.band(); d <= exponent.band(); ++d)
    if (!is_diagonal(exponent.coeff(d)))
      throw Error(ErrorCode::wrong_path, "abelian factorization needs a diagonal exponent");
  band = detail::factor_band(circle, band);
  const SplitResult s = cauchy_split(exponent);
  const CircleSamples s1 = sample(s.plus, circle), s2 = sample(s.minus, circle);
  const CircleSamples full = sample(exponent, circle);
  const CMatrix one = identity(exponent.dim());
  // A vanishing half of the exponent gives an exactly constant factor.
  const auto factor = [&](const LaurentField& half, const CircleSamples& v, Holomorphy side) {
    if (half.max_coeff_norm() == 0.0) return LaurentField::constant(one, band);
    return project(laurent_from_samples(pointwise(v, [&](int j) { return mat_exp(-CMatrix(v.at(j))); }), band), side);
  };
  const CircleSamples f = pointwise(full, [&](int j) { return mat_exp(CMatrix(full.at(j))); });

  FactorizationResult r;
  r.psi.psi1 = factor(s.plus, s1, Holomorphy::patch1);
  r.psi.psi2 = factor(s.minus, s2, Holomorphy::patch2);
  r.psi.psi2.coeff(0) = one;
  r.residual = detail::multiply_back_residual(f, sample(r.psi.psi1, circle), sample(r.psi.psi2, circle));
  r.iterations = 0;
  r.converged = true;
  return r;
}

}  // namespace twistor
