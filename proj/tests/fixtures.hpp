#pragma once

#include "twistor/twistor.hpp"

namespace fixtures {

using namespace twistor;

/// A patch field from fn(coords, lambda), projected on the circle to the given band.
template <class Fn>
PatchField patch_field(const SpacetimeGrid& g, PatchId patch, int n, int band, const Circle& circle, Fn&& fn) {
  PatchField out(g, patch, n, band);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const ComplexCoords x = complex_coords(g.position(g.unflatten(p)));
    out.set(p, laurent_from_samples(tabulate(circle, n, [&](int, cd l) { return CMatrix(fn(x, l)); }),
                                    circle.max_band()));
  }
  return out;
}

/// Largest norm over interior points (margin >= m) and circle samples of f.
inline double interior_max(const PatchField& f, const Circle& circle, int m = 2) {
  double best = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) {
    if (f.grid().margin(f.grid().unflatten(p)) < m) continue;
    best = std::max(best, sample(f.at(p), circle).max_norm());
  }
  return best;
}

/// psi1, psi2 of the abelian fixture exp(w1 w2 / lambda), scaled by eps.
struct AbelianFixture {
  PatchField psi1, psi2;
};

inline AbelianFixture abelian_psi(const SpacetimeGrid& g, int n, const Circle& circle, double eps = 1.0) {
  TwistorPolynomial f(n);
  f.add(eps * identity(n), 1, 1, -1);
  const int band = circle.max_band();
  AbelianFixture a{PatchField(g, PatchId::patch1, n, band), PatchField(g, PatchId::patch2, n, band)};
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto r = abelian_factorize(f.to_laurent(complex_coords(g.position(g.unflatten(p))), f.band()), circle);
    a.psi1.set(p, r.psi.psi1);
    a.psi2.set(p, r.psi.psi2);
  }
  return a;
}

inline double max_distance(const GaugePotential& a, const GaugePotential& b, int margin = 2) {
  return a.distance(b, margin);
}

}  // namespace fixtures
