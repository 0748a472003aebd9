#pragma once

#include <algorithm>

#include "twistor/laurent.hpp"
#include "twistor/matrix.hpp"

namespace twistor {

// Cochains of the two-set covering. Overlap data lives on the circle samples; patch data is a
// Laurent series in lambda. With two sets the triple-overlap conditions reduce to pair conditions.

/// One group-valued function per patch.
struct Cochain0 {
  LaurentField psi1;
  LaurentField psi2;
};

/// Group-valued overlap data {f12, f21}.
struct Cochain1 {
  CircleSamples f12;
  CircleSamples f21;
};

/// Algebra-valued overlap data {theta12, theta21}.
struct AdditiveCochain1 {
  CircleSamples theta12;
  CircleSamples theta21;
};

struct CheckResult {
  bool ok = true;
  double defect = 0.0;
};

template <class Fn>
CircleSamples pointwise(const CircleSamples& a, Fn&& fn) {
  CircleSamples out(a.dim(), a.size());
  for (int j = 0; j < a.size(); ++j) out.at(j) = fn(j);
  return out;
}

inline CircleSamples constant_samples(const CMatrix& m, int count) {
  CircleSamples out(static_cast<int>(m.rows()), count);
  for (int j = 0; j < count; ++j) out.at(j) = m;
  return out;
}

inline CircleSamples inverse(const CircleSamples& a) {
  return pointwise(a, [&](int j) { return mat_inv(a.at(j)); });
}

/// {f12, f12^-1}: the cocycle determined by a transition matrix.
inline Cochain1 cocycle_from(const CircleSamples& f12) { return {f12, inverse(f12)}; }

inline Cochain1 identity_cochain(int n, int count) {
  return {constant_samples(identity(n), count), constant_samples(identity(n), count)};
}

/// max_j || f21 f12 - 1 ||
inline CheckResult is_cocycle_mult(const Cochain1& f, double tol) {
  double defect = 0.0;
  const CMatrix one = identity(f.f12.dim());
  for (int j = 0; j < f.f12.size(); ++j) defect = std::max(defect, norm(f.f21.at(j) * f.f12.at(j) - one));
  return {defect <= tol, defect};
}

/// max_j || theta12 + theta21 ||
inline CheckResult is_cocycle_add(const AdditiveCochain1& theta, double tol) {
  double defect = 0.0;
  for (int j = 0; j < theta.theta12.size(); ++j)
    defect = std::max(defect, norm(theta.theta12.at(j) + theta.theta21.at(j)));
  return {defect <= tol, defect};
}

/// True when psi1 = psi2 and neither depends on lambda, i.e. psi is a gauge transformation g(x).
inline CheckResult is_global_section(const Cochain0& psi, double tol) {
  double defect = 0.0;
  for (const LaurentField* f : {&psi.psi1, &psi.psi2})
    for (int d = -f->band(); d <= f->band(); ++d)
      if (d != 0) defect = std::max(defect, norm(f->coeff(d)));
  const int band = std::max(psi.psi1.band(), psi.psi2.band());
  for (int d = -band; d <= band; ++d) defect = std::max(defect, norm(psi.psi1.at(d) - psi.psi2.at(d)));
  return {defect <= tol, defect};
}

/// (rho_h f)12 = h12 f12 h21^-1, (rho_h f)21 = h21 f21 h12^-1.
inline Cochain1 act_rho(const Cochain1& h, const Cochain1& f) {
  Cochain1 out{CircleSamples(f.f12.dim(), f.f12.size()), CircleSamples(f.f12.dim(), f.f12.size())};
  for (int j = 0; j < f.f12.size(); ++j) {
    const CMatrix h12_inv = mat_inv(h.f12.at(j));
    const CMatrix h21_inv = mat_inv(h.f21.at(j));
    out.f12.at(j) = h.f12.at(j) * f.f12.at(j) * h21_inv;
    out.f21.at(j) = h.f21.at(j) * f.f21.at(j) * h12_inv;
  }
  return out;
}

/// Group product of two cochains, entry by entry.
inline Cochain1 compose(const Cochain1& h, const Cochain1& k) {
  return {pointwise(h.f12, [&](int j) { return CMatrix(h.f12.at(j) * k.f12.at(j)); }),
          pointwise(h.f21, [&](int j) { return CMatrix(h.f21.at(j) * k.f21.at(j)); })};
}

/// exp(eps theta) entry by entry.
inline Cochain1 exponentiate(const AdditiveCochain1& theta, double eps) {
  return {pointwise(theta.theta12, [&](int j) { return mat_exp(eps * CMatrix(theta.theta12.at(j))); }),
          pointwise(theta.theta21, [&](int j) { return mat_exp(eps * CMatrix(theta.theta21.at(j))); })};
}

/// delta_theta F12 = theta12 F12 - F12 theta21, the derivative of act_rho(exp(eps theta), F) at 0.
inline CircleSamples infinitesimal_action(const AdditiveCochain1& theta, const Cochain1& f) {
  return pointwise(f.f12, [&](int j) {
    return CMatrix(theta.theta12.at(j) * f.f12.at(j) - f.f12.at(j) * theta.theta21.at(j));
  });
}

/// fhat12 = psi1 f12 psi2^-1 on the overlap samples.
inline CheckResult cocycle_equivalent(const Cochain1& fhat, const Cochain1& f, const Cochain0& psi, double tol) {
  const Circle circle(f.f12.size());
  const CircleSamples p1 = sample(psi.psi1, circle);
  const CircleSamples p2 = sample(psi.psi2, circle);
  double defect = 0.0;
  for (int j = 0; j < circle.size(); ++j)
    defect = std::max(defect, norm(fhat.f12.at(j) - p1.at(j) * f.f12.at(j) * mat_inv(p2.at(j))));
  return {defect <= tol, defect};
}

}  // namespace twistor
