#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "twistor/grid.hpp"
#include "twistor/parallel.hpp"
#include "twistor/penrose_ward.hpp"
#include "twistor/twistor_cover.hpp"

namespace twistor {

/// F_{mu nu} for mu < nu on the grid (mu, nu = 0..3 for x1..x4), with the complex combinations
/// F_yz, F_ybar zbar and F_y ybar + F_z zbar cached.
class FieldStrength {
 public:
  static constexpr std::array<std::pair<int, int>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

  FieldStrength() = default;
  FieldStrength(const SpacetimeGrid& grid, int n) : n_(n) {
    for (auto& c : real_) c = GridField(grid, n * n);
    for (auto& c : complex_) c = GridField(grid, n * n);
  }

  int dim() const noexcept { return n_; }
  const SpacetimeGrid& grid() const noexcept { return real_[0].grid(); }
  std::size_t points() const noexcept { return real_[0].points(); }

  static int pair_index(int mu, int nu) {
    for (int k = 0; k < 6; ++k)
      if (kPairs[k].first == mu && kPairs[k].second == nu) return k;
    return -1;
  }

  /// F_{mu nu} with F_{nu mu} = -F_{mu nu} and F_{mu mu} = 0.
  CMatrix real(int mu, int nu, std::size_t p) const {
    if (mu == nu) return CMatrix::Zero(n_, n_);
    if (mu > nu) return -real(nu, mu, p);
    return real_[pair_index(mu, nu)].matrix(p, n_);
  }
  Eigen::Map<CMatrix> real_slot(int k, std::size_t p) { return real_[k].matrix(p, n_); }

  /// Cached complex components: 0 -> F_yz, 1 -> F_ybar zbar, 2 -> F_y ybar + F_z zbar.
  Eigen::Map<const CMatrix> complex(int k, std::size_t p) const { return complex_[k].matrix(p, n_); }
  Eigen::Map<CMatrix> complex_slot(int k, std::size_t p) { return complex_[k].matrix(p, n_); }

 private:
  int n_ = 0;
  std::array<GridField, 6> real_;
  std::array<GridField, 3> complex_;
};

namespace detail {

// K(mu, a) = d x^mu / d u^a for u = (y, ybar, z, zbar).
inline std::array<std::array<cd, 4>, 4> coordinate_jacobian() {
  const cd h{0.5, 0.0}, ih{0.0, 0.5};
  //                 y          ybar       z          zbar
  return {{{h, h, 0.0, 0.0}, {-ih, ih, 0.0, 0.0}, {0.0, 0.0, h, h}, {0.0, 0.0, ih, -ih}}};
}

// F_ab = K(mu, a) K(nu, b) F_{mu nu}.
inline CMatrix complex_component(const FieldStrength& f, int a, int b, std::size_t p) {
  static const auto k = coordinate_jacobian();
  CMatrix out = CMatrix::Zero(f.dim(), f.dim());
  for (const auto& [mu, nu] : FieldStrength::kPairs) {
    const cd w = k[mu][a] * k[nu][b] - k[nu][a] * k[mu][b];
    if (w != cd{}) out += w * f.real(mu, nu, p);
  }
  return out;
}

inline int residual_margin(const SpacetimeGrid& g, int wanted) {
  int m = wanted;
  for (int e : g.extents) m = std::min(m, (e - 1) / 2);
  return m;
}

inline std::array<GridField, 4> real_components(const GaugePotential& a) {
  const int n = a.dim();
  std::array<GridField, 4> ar;
  for (int mu = 0; mu < 4; ++mu) {
    ar[mu] = GridField(a.grid(), n * n);
    for (std::size_t p = 0; p < a.points(); ++p) ar[mu].matrix(p, n) = a.real(mu, p);
  }
  return ar;
}

inline void fill_complex(FieldStrength& f, std::size_t p) {
  // u = (y, ybar, z, zbar)
  f.complex_slot(0, p) = complex_component(f, 0, 2, p);
  f.complex_slot(1, p) = complex_component(f, 1, 3, p);
  f.complex_slot(2, p) = complex_component(f, 0, 1, p) + complex_component(f, 2, 3, p);
}

}  // namespace detail

/// F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] with 4th-order differences.
inline FieldStrength field_strength(const GaugePotential& a, const Exec& exec = {}) {
  const int n = a.dim();
  const SpacetimeGrid& g = a.grid();
  const auto ar = detail::real_components(a);
  FieldStrength f(g, n);
  parallel_for(g.size(), exec, [&](std::size_t p) {
    CMatrix d1(n, n), d2(n, n);
    for (int k = 0; k < 6; ++k) {
      const auto [mu, nu] = FieldStrength::kPairs[k];
      d1.setZero();
      d2.setZero();
      accumulate_partial(ar[nu], p, mu, 1.0, std::span<cd>(d1.data(), n * n), Stencil::closure);
      accumulate_partial(ar[mu], p, nu, 1.0, std::span<cd>(d2.data(), n * n), Stencil::closure);
      f.real_slot(k, p) = d1 - d2 + commutator(ar[mu].matrix(p, n), ar[nu].matrix(p, n));
    }
    detail::fill_complex(f, p);
  });
  return f;
}

/// First-order change of F under A -> A + dA:
/// d_mu dA_nu - d_nu dA_mu + [A_mu, dA_nu] + [dA_mu, A_nu].
inline FieldStrength linearized_field_strength(const GaugePotential& a, const GaugePotential& da,
                                               const Exec& exec = {}) {
  const int n = a.dim();
  const SpacetimeGrid& g = a.grid();
  const auto ar = detail::real_components(a);
  const auto dr = detail::real_components(da);
  FieldStrength f(g, n);
  parallel_for(g.size(), exec, [&](std::size_t p) {
    CMatrix d1(n, n), d2(n, n);
    for (int k = 0; k < 6; ++k) {
      const auto [mu, nu] = FieldStrength::kPairs[k];
      d1.setZero();
      d2.setZero();
      accumulate_partial(dr[nu], p, mu, 1.0, std::span<cd>(d1.data(), n * n), Stencil::closure);
      accumulate_partial(dr[mu], p, nu, 1.0, std::span<cd>(d2.data(), n * n), Stencil::closure);
      f.real_slot(k, p) = d1 - d2 + commutator(ar[mu].matrix(p, n), dr[nu].matrix(p, n)) +
                          commutator(dr[mu].matrix(p, n), ar[nu].matrix(p, n));
    }
    detail::fill_complex(f, p);
  });
  return f;
}

/// max over points of max(||F_yz||, ||F_ybar zbar||, ||F_y ybar + F_z zbar||).
inline double sdym_residual_complex(const FieldStrength& f, int min_margin = 2) {
  double best = 0.0;
  const SpacetimeGrid& g = f.grid();
  for (std::size_t p = 0; p < f.points(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    for (int k = 0; k < 3; ++k) best = std::max(best, norm(f.complex(k, p)));
  }
  return best;
}

/// (*F)_{mu nu} = (eps / 2) eps_{mu nu rho sigma} F_{rho sigma} for mu < nu.
inline CMatrix hodge_dual(const FieldStrength& f, int mu, int nu, std::size_t p, int sign) {
  // eps_{0123} = 1; for each pair the complementary pair and the permutation sign.
  static constexpr std::array<std::array<int, 3>, 6> dual{{{2, 3, 1}, {1, 3, -1}, {1, 2, 1},
                                                           {0, 3, 1}, {0, 2, -1}, {0, 1, 1}}};
  const auto& d = dual[FieldStrength::pair_index(mu, nu)];
  return static_cast<double>(sign * d[2]) * f.real(d[0], d[1], p);
}

/// max over points and pairs of || *F - F ||.
inline double sdym_residual_hodge(const FieldStrength& f, int sign, int min_margin = 2) {
  double best = 0.0;
  const SpacetimeGrid& g = f.grid();
  for (std::size_t p = 0; p < f.points(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    for (const auto& [mu, nu] : FieldStrength::kPairs)
      best = std::max(best, norm(hodge_dual(f, mu, nu, p, sign) - f.real(mu, nu, p)));
  }
  return best;
}

/// The abelian self-dual fixture A_ybar = y, A_zbar = -z (all other components zero).
inline GaugePotential abelian_fixture(const SpacetimeGrid& grid, int n, double sign = -1.0,
                                      const Exec& exec = {}) {
  return tabulate_potential(
      grid, n,
      [&](Component c, const ComplexCoords& x) -> CMatrix {
        if (c == Component::ybar) return x.y * identity(n);
        if (c == Component::zbar) return sign * x.z * identity(n);
        return CMatrix::Zero(n, n);
      },
      exec);
}

/// Orientation sign of the volume form, chosen once as the sign whose Hodge star annihilates
/// the abelian self-dual fixture.
inline int orientation_sign() {
  static const int sign = [] {
    const SpacetimeGrid g = SpacetimeGrid::centered(5, 0.5);
    const FieldStrength f = field_strength(abelian_fixture(g, 1));
    return sdym_residual_hodge(f, 1) <= sdym_residual_hodge(f, -1) ? 1 : -1;
  }();
  return sign;
}

/// max over deep-interior points and nu of || sum_mu (d_mu F_{mu nu} + [A_mu, F_{mu nu}]) ||,
/// the Yang-Mills equation D_mu F_{mu nu} = 0.
inline double ym_residual(const GaugePotential& a, const FieldStrength& f, const Exec& exec = {},
                          int min_margin = 4) {
  const int n = a.dim();
  const SpacetimeGrid& g = a.grid();
  const int margin = detail::residual_margin(g, min_margin);
  std::array<std::array<GridField, 4>, 4> full;  // full[mu][nu] = F_{mu nu}
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      full[mu][nu] = GridField(g, n * n);
      for (std::size_t p = 0; p < g.size(); ++p) full[mu][nu].matrix(p, n) = f.real(mu, nu, p);
    }
  std::vector<double> worst(g.size(), 0.0);
  parallel_for(g.size(), exec, [&](std::size_t p) {
    if (g.margin(g.unflatten(p)) < margin) return;
    for (int nu = 0; nu < 4; ++nu) {
      CMatrix acc = CMatrix::Zero(n, n);
      for (int mu = 0; mu < 4; ++mu) {
        if (mu == nu) continue;
        accumulate_partial(full[mu][nu], p, mu, 1.0, std::span<cd>(acc.data(), n * n), Stencil::closure);
        acc += commutator(a.real(mu, p), full[mu][nu].matrix(p, n));
      }
      worst[p] = std::max(worst[p], norm(acc));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

inline double ym_residual(const GaugePotential& a, const Exec& exec = {}) {
  return ym_residual(a, field_strength(a, exec), exec);
}

/// A^g = g^-1 A g + g^-1 dg, component by component in (y, z, ybar, zbar). The derivative is
/// taken through log g.
inline GaugePotential gauge_transform(const GaugePotential& a, const GridField& g, const Exec& exec = {}) {
  const int n = a.dim();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const LogChart chart = log_chart(g, n, exec);
  GaugePotential out(a.grid(), n);
  parallel_for(a.points(), exec, [&](std::size_t p) {
    std::vector<cd> mc(4 * nn);
    maurer_cartan_at(
        chart, p, 4, [&](int k, int) { return wirtinger_weights(wirtinger_of(kComponents[k])); }, Side::left,
        Stencil::closure, mc);
    const CMatrix gp = g.matrix(p, n);
    const CMatrix gi = mat_inv(gp);
    for (int k = 0; k < 4; ++k) {
      const Component c = kComponents[k];
      Eigen::Map<const CMatrix> dg(mc.data() + k * nn, n, n);
      out.at(c, p) = gi * a.at(c, p) * gp + dg;
    }
  });
  return out;
}

/// Pointwise gauge-invariant scalars.
struct GaugeSignature {
  std::vector<cd> trace_ff;                // tr(F_{mu nu} F_{mu nu}), summed over all mu, nu
  std::vector<cd> density;                 // eps_{mu nu rho sigma} tr(F_{mu nu} F_{rho sigma})
  std::vector<std::vector<cd>> eigen;      // eigenvalues of sum F_{mu nu} F_{mu nu}
};

inline GaugeSignature gauge_invariant_signature(const FieldStrength& f, const Exec& exec = {}) {
  const std::size_t np = f.points();
  const int n = f.dim();
  GaugeSignature s{std::vector<cd>(np), std::vector<cd>(np), std::vector<std::vector<cd>>(np)};
  parallel_for(np, exec, [&](std::size_t p) {
    CMatrix sum = CMatrix::Zero(n, n);
    for (const auto& [mu, nu] : FieldStrength::kPairs) {
      const CMatrix m = f.real(mu, nu, p);
      sum += 2.0 * m * m;
    }
    s.trace_ff[p] = sum.trace();
    s.density[p] = 8.0 * ((f.real(0, 1, p) * f.real(2, 3, p)).trace() - (f.real(0, 2, p) * f.real(1, 3, p)).trace() +
                          (f.real(0, 3, p) * f.real(1, 2, p)).trace());
    Eigen::ComplexEigenSolver<CMatrix> es(sum, false);
    const auto& ev = es.eigenvalues();
    s.eigen[p].assign(ev.data(), ev.data() + ev.size());
  });
  return s;
}

namespace detail {

inline double multiset_distance(std::vector<cd> a, const std::vector<cd>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  auto cost = [&](const std::vector<cd>& x) {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c = std::max(c, std::abs(x[i] - b[i]));
    return c;
  };
  if (a.size() <= 6) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      std::vector<cd> x(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) x[i] = a[perm[i]];
      best = std::min(best, cost(x));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Larger multisets: greedy nearest matching.
  double worst = 0.0;
  for (const cd& v : b) {
    auto it = std::min_element(a.begin(), a.end(), [&](cd l, cd r) { return std::abs(l - v) < std::abs(r - v); });
    worst = std::max(worst, std::abs(*it - v));
    a.erase(it);
  }
  return worst;
}

}  // namespace detail

/// Largest pointwise difference between two signatures over points with the given margin.
inline double signature_discrepancy(const GaugeSignature& a, const GaugeSignature& b, const SpacetimeGrid& g,
                                    int min_margin = 2) {
  double best = 0.0;
  for (std::size_t p = 0; p < a.trace_ff.size(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    best = std::max({best, std::abs(a.trace_ff[p] - b.trace_ff[p]), std::abs(a.density[p] - b.density[p]),
                     detail::multiset_distance(a.eigen[p], b.eigen[p])});
  }
  return best;
}

/// 100 h^4 times the scale of the field: the default tolerance for identities that hold only up
/// to the finite-difference error.
inline double discretization_tolerance(const SpacetimeGrid& g, double scale = 1.0) {
  const double h = g.max_spacing();
  return 100.0 * h * h * h * h * std::max(scale, 1.0);
}

/// Named residual norms with their tolerances.
struct ResidualReport {
  struct Entry {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass() const { return value <= tolerance; }
  };
  std::vector<Entry> entries;

  void add(std::string name, double value, double tolerance) { entries.push_back({std::move(name), value, tolerance}); }
  bool pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.pass(); });
  }
  const Entry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

}  // namespace twistor
