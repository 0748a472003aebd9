#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "twistor/cocycle.hpp"
#include "twistor/grid.hpp"
#include "twistor/laurent.hpp"
#include "twistor/penrose_ward.hpp"
#include "twistor/polynomial.hpp"
#include "twistor/sdym_field.hpp"
#include "twistor/twistor_cover.hpp"

namespace twistor {

/// theta = {theta12, theta21}, each a twistor polynomial and therefore holomorphic.
struct SymmetryGenerator {
  std::string name;
  TwistorPolynomial theta12;
  TwistorPolynomial theta21;
};

inline CircleSamples sample_polynomial(const TwistorPolynomial& f, const ComplexCoords& x, const Circle& circle) {
  return tabulate(circle, f.n, [&](int, cd lambda) { return f(x, lambda); });
}

inline AdditiveCochain1 sample_generator(const SymmetryGenerator& g, const ComplexCoords& x, const Circle& circle) {
  return {sample_polynomial(g.theta12, x, circle), sample_polynomial(g.theta21, x, circle)};
}

/// Entrywise [theta, theta'].
inline AdditiveCochain1 bracket(const AdditiveCochain1& a, const AdditiveCochain1& b) {
  return {pointwise(a.theta12, [&](int j) { return commutator(a.theta12.at(j), b.theta12.at(j)); }),
          pointwise(a.theta21, [&](int j) { return commutator(a.theta21.at(j), b.theta21.at(j)); })};
}

struct PhiResult {
  CircleSamples phi12;
  CircleSamples phi21;
  double form_agreement = 0.0;        // psi1 dF psi2^-1 against psi1 theta12 psi1^-1 - psi2 theta21 psi2^-1
  double antisymmetry = 0.0;          // || Phi21 + Phi12 ||
  double decomposition_defect = 0.0;  // || psi1^-1 psi2 - F12 ||
};

/// Phi12 = psi1 (theta12 F12 - F12 theta21) psi2^-1, with Phi21 built independently from F21.
/// Throws stale_factorization when psi no longer factorizes F beyond tol.
inline PhiResult make_phi(const AdditiveCochain1& theta, const Cochain0& psi, const Cochain1& f, double tol) {
  const Circle circle(f.f12.size());
  const CircleSamples p1 = sample(psi.psi1, circle), p2 = sample(psi.psi2, circle);
  PhiResult r{CircleSamples(f.f12.dim(), circle.size()), CircleSamples(f.f12.dim(), circle.size())};
  for (int j = 0; j < circle.size(); ++j) {
    const CMatrix i1 = mat_inv(p1.at(j)), i2 = mat_inv(p2.at(j));
    r.decomposition_defect = std::max(r.decomposition_defect, norm(i1 * p2.at(j) - f.f12.at(j)));
    const CMatrix d12 = theta.theta12.at(j) * f.f12.at(j) - f.f12.at(j) * theta.theta21.at(j);
    const CMatrix d21 = theta.theta21.at(j) * f.f21.at(j) - f.f21.at(j) * theta.theta12.at(j);
    r.phi12.at(j) = p1.at(j) * d12 * i2;
    r.phi21.at(j) = p2.at(j) * d21 * i1;
    const CMatrix alt = p1.at(j) * theta.theta12.at(j) * i1 - p2.at(j) * theta.theta21.at(j) * i2;
    r.form_agreement = std::max(r.form_agreement, norm(r.phi12.at(j) - alt));
    r.antisymmetry = std::max(r.antisymmetry, norm(r.phi21.at(j) + r.phi12.at(j)));
  }
  if (r.decomposition_defect > tol)
    throw Error(ErrorCode::stale_factorization, "psi1^-1 psi2 differs from F12 by " +
                                                    std::to_string(r.decomposition_defect));
  return r;
}

/// Phi12 = phi1 - phi2 with the constant term in phi1.
inline SplitResult split_phi(const CircleSamples& phi12, int band) {
  return cauchy_split(laurent_from_samples(phi12, band));
}

/// delta psi_i = -phi_i psi_i.
inline Cochain0 act_on_psi(const SplitResult& phi, const Cochain0& psi) {
  Cochain0 d{-multiply(phi.plus, psi.psi1, phi.plus.band() + psi.psi1.band()),
             -multiply(phi.minus, psi.psi2, phi.minus.band() + psi.psi2.band())};
  d.psi1.set_holomorphy(Holomorphy::patch1);
  d.psi2.set_holomorphy(Holomorphy::patch2);
  return d;
}

/// || delta(psi1^-1 psi2) - (theta12 F12 - F12 theta21) || on the circle samples.
inline double psi_consistency(const Cochain0& dpsi, const Cochain0& psi, const AdditiveCochain1& theta,
                              const Cochain1& f) {
  const Circle circle(f.f12.size());
  const CircleSamples p1 = sample(psi.psi1, circle), p2 = sample(psi.psi2, circle);
  const CircleSamples d1 = sample(dpsi.psi1, circle), d2 = sample(dpsi.psi2, circle);
  const CircleSamples target = infinitesimal_action(theta, f);
  double r = 0.0;
  for (int j = 0; j < circle.size(); ++j) {
    const CMatrix i1 = mat_inv(p1.at(j));
    const CMatrix dfs = -i1 * d1.at(j) * i1 * p2.at(j) + i1 * d2.at(j);
    r = std::max(r, norm(dfs - target.at(j)));
  }
  return r;
}

/// phi1, phi2 on the grid.
struct SplitField {
  PatchField phi1;
  PatchField phi2;
};

struct SymmetryDiagnostics {
  double antisymmetry = 0.0;
  double form_agreement = 0.0;
  double reassembly = 0.0;
  double psi_consistency = 0.0;
  double decomposition_defect = 0.0;
  double truncation_tail = 0.0;
};

/// Builds and splits Phi12(theta) at every grid point. `patching(p)` returns F12 on the circle at
/// point p.
template <class PatchingFn>
SplitField split_on_grid(const SymmetryGenerator& gen, const PatchField& psi1, const PatchField& psi2,
                         PatchingFn&& patching, const Circle& circle, int band, double tol, const Exec& exec = {},
                         SymmetryDiagnostics* diag = nullptr) {
  const SpacetimeGrid& g = psi1.grid();
  const int n = psi1.dim();
  SplitField out{PatchField(g, PatchId::patch1, n, band), PatchField(g, PatchId::patch2, n, band)};
  std::vector<SymmetryDiagnostics> local(g.size());
  parallel_for(g.size(), exec, [&](std::size_t p) {
    const ComplexCoords x = complex_coords(g.position(g.unflatten(p)));
    const AdditiveCochain1 theta = sample_generator(gen, x, circle);
    const Cochain0 psi{psi1.at(p), psi2.at(p)};
    const Cochain1 f = cocycle_from(patching(p));
    const PhiResult phi = make_phi(theta, psi, f, tol);
    const LaurentField full = laurent_from_samples(phi.phi12, circle.max_band());
    const SplitResult s = cauchy_split(full);
    SymmetryDiagnostics& d = local[p];
    d.antisymmetry = phi.antisymmetry;
    d.form_agreement = phi.form_agreement;
    d.decomposition_defect = phi.decomposition_defect;
    d.truncation_tail = std::max(out.phi1.set(p, s.plus), out.phi2.set(p, s.minus));
    // Consistency is measured for the splitting that is kept, so truncation shows up here.
    const SplitResult kept{out.phi1.at(p), out.phi2.at(p)};
    d.psi_consistency = psi_consistency(act_on_psi(kept, psi), psi, theta, f);
    const LaurentField back = out.phi1.at(p) - out.phi2.at(p);
    for (int k = -band; k <= band; ++k) d.reassembly = std::max(d.reassembly, norm(back.coeff(k) - full.coeff(k)));
  });
  SymmetryDiagnostics total;
  for (const auto& d : local) {
    total.antisymmetry = std::max(total.antisymmetry, d.antisymmetry);
    total.form_agreement = std::max(total.form_agreement, d.form_agreement);
    total.reassembly = std::max(total.reassembly, d.reassembly);
    total.psi_consistency = std::max(total.psi_consistency, d.psi_consistency);
    total.decomposition_defect = std::max(total.decomposition_defect, d.decomposition_defect);
    total.truncation_tail = std::max(total.truncation_tail, d.truncation_tail);
  }
  out.phi1.truncation_tail = out.phi2.truncation_tail = total.truncation_tail;
  if (diag) *diag = total;
  return out;
}

/// delta B^(i)_a = V_a phi_i + [B^(i)_a, phi_i] on both patches.
inline Connection01 act_on_connection(const Connection01& b, const SplitField& phi, const Exec& exec = {}) {
  auto one_patch = [&](const PatchConnection& bc, const PatchField& f) {
    const PatchId patch = f.patch();
    const int band = f.band() + std::max(1, bc.b1.band());
    PatchConnection out{PatchField(f.grid(), patch, f.dim(), band), PatchField(f.grid(), patch, f.dim(), band)};
    for (int a = 1; a <= 2; ++a) {
      const PatchField vf = frame_apply(patch, a, f, exec);
      parallel_for(f.points(), exec, [&](std::size_t p) {
        const LaurentField fp = f.at(p), bp = bc[a].at(p);
        LaurentField d = vf.at(p).with_band(band);
        d += multiply(bp, fp, band);
        d -= multiply(fp, bp, band);
        out[a].set(p, d);
      });
    }
    return out;
  };
  return {one_patch(b.patch1, phi.phi1), one_patch(b.patch2, phi.phi2)};
}

/// delta A from the lambda^0 contour averages of delta B:
/// delta A_y = <delta B^(2)_2>, delta A_z = -<delta B^(2)_1>, delta A_ybar = <delta B^(1)_1>,
/// delta A_zbar = <delta B^(1)_2>.
inline GaugePotential act_on_potential(const Connection01& db) {
  const int n = db.patch1.b1.dim();
  GaugePotential da(db.patch1.b1.grid(), n);
  for (std::size_t p = 0; p < da.points(); ++p) {
    da.at(Component::y, p) = contour_average(db.patch2.b2.at(p), 0);
    da.at(Component::z, p) = -contour_average(db.patch2.b1.at(p), 0);
    da.at(Component::ybar, p) = contour_average(db.patch1.b1.at(p), 0);
    da.at(Component::zbar, p) = contour_average(db.patch1.b2.at(p), 0);
  }
  return da;
}

inline GaugePotential act_on_potential(const Connection01& b, const SplitField& phi, const Exec& exec = {}) {
  return act_on_potential(act_on_connection(b, phi, exec));
}

/// Shifts both phi_i by the same lambda-free section.
inline SplitField shift_split(const SplitField& phi, const GridField& section) {
  SplitField out = phi;
  const int n = phi.phi1.dim();
  for (std::size_t p = 0; p < section.points(); ++p) {
    out.phi1.coeff(p, 0) += section.matrix(p, n);
    out.phi2.coeff(p, 0) += section.matrix(p, n);
  }
  return out;
}

/// delta A_c = d_c phi + [A_c, phi] for c in (y, z, ybar, zbar).
inline GaugePotential linearized_gauge(const GaugePotential& a, const GridField& section, const Exec& exec = {}) {
  const int n = a.dim();
  GaugePotential out(a.grid(), n);
  for (auto c : kComponents) {
    const GridField d = wirtinger(section, wirtinger_of(c), exec);
    for (std::size_t p = 0; p < a.points(); ++p)
      out.at(c, p) = d.matrix(p, n) + commutator(a.at(c, p), section.matrix(p, n));
  }
  return out;
}

struct FreedomReport {
  double gauge_difference = 0.0;  // || (dA' - dA) - (d phi + [A, phi]) ||
  double residual_change = 0.0;   // change of the linearized self-duality residual
};

inline FreedomReport splitting_freedom_check(const GaugePotential& a, const Connection01& b, const SplitField& phi,
                                             const GridField& section, const Exec& exec = {}, int min_margin = 2) {
  const GaugePotential da = act_on_potential(b, phi, exec);
  const GaugePotential da2 = act_on_potential(b, shift_split(phi, section), exec);
  const GaugePotential expected = linearized_gauge(a, section, exec);
  FreedomReport r;
  const SpacetimeGrid& g = a.grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    for (auto c : kComponents)
      r.gauge_difference =
          std::max(r.gauge_difference, norm(da2.at(c, p) - da.at(c, p) - expected.at(c, p)));
  }
  r.residual_change = std::abs(sdym_residual_complex(linearized_field_strength(a, da2, exec), min_margin) -
                               sdym_residual_complex(linearized_field_strength(a, da, exec), min_margin));
  return r;
}

struct BracketReport {
  double raw = 0.0;         // max coefficient of phi([theta, theta']) - [phi(theta), phi(theta')]
  double quotiented = 0.0;  // the same after removing the best common lambda-free section
};

/// Compares phi([theta, theta']) with [phi(theta), phi(theta')] on both patches at one point.
inline BracketReport bracket_homomorphism_check(const AdditiveCochain1& theta, const AdditiveCochain1& theta2,
                                                const Cochain0& psi, const Cochain1& f, double tol) {
  const int band = Circle(f.f12.size()).max_band();
  const SplitResult s1 = split_phi(make_phi(theta, psi, f, tol).phi12, band);
  const SplitResult s2 = split_phi(make_phi(theta2, psi, f, tol).phi12, band);
  const SplitResult lhs = split_phi(make_phi(bracket(theta, theta2), psi, f, tol).phi12, band);
  const int wide = 2 * band;
  const LaurentField d1 = lhs.plus - (multiply(s1.plus, s2.plus, wide) - multiply(s2.plus, s1.plus, wide));
  const LaurentField d2 = lhs.minus - (multiply(s1.minus, s2.minus, wide) - multiply(s2.minus, s1.minus, wide));
  BracketReport r;
  r.raw = std::max(d1.max_coeff_norm(), d2.max_coeff_norm());
  const CMatrix common = 0.5 * (d1.at(0) + d2.at(0));
  LaurentField q1 = d1, q2 = d2;
  q1.coeff(0) -= common;
  q2.coeff(0) -= common;
  r.quotiented = std::max(q1.max_coeff_norm(), q2.max_coeff_norm());
  return r;
}

}  // namespace twistor
