#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "twistor/grid.hpp"
#include "twistor/laurent.hpp"
#include "twistor/parallel.hpp"
#include "twistor/twistor_cover.hpp"

namespace twistor {

/// B1, B2 of the flat (0,1)-connection on one patch; B3 vanishes identically.
struct PatchConnection {
  PatchField b1;
  PatchField b2;

  const PatchField& operator[](int a) const { return a == 1 ? b1 : b2; }
  PatchField& operator[](int a) { return a == 1 ? b1 : b2; }
  PatchId patch() const { return b1.patch(); }
};

struct Connection01 {
  PatchConnection patch1;
  PatchConnection patch2;

  const PatchConnection& operator[](PatchId p) const { return p == PatchId::patch1 ? patch1 : patch2; }
};

enum class Component { y, z, ybar, zbar };
inline constexpr std::array<Component, 4> kComponents{Component::y, Component::z, Component::ybar, Component::zbar};

inline const char* name(Component c) {
  switch (c) {
    case Component::y: return "y";
    case Component::z: return "z";
    case Component::ybar: return "ybar";
    case Component::zbar: return "zbar";
  }
  return "?";
}

inline Wirtinger wirtinger_of(Component c) {
  switch (c) {
    case Component::y: return Wirtinger::y;
    case Component::z: return Wirtinger::z;
    case Component::ybar: return Wirtinger::ybar;
    case Component::zbar: return Wirtinger::zbar;
  }
  return Wirtinger::y;
}

/// A = A_y dy + A_z dz + A_ybar dybar + A_zbar dzbar on the grid.
class GaugePotential {
 public:
  GaugePotential() = default;
  GaugePotential(const SpacetimeGrid& grid, int n) : n_(n) {
    for (auto& c : comps_) c = GridField(grid, n * n);
  }

  int dim() const noexcept { return n_; }
  const SpacetimeGrid& grid() const noexcept { return comps_[0].grid(); }
  std::size_t points() const noexcept { return comps_[0].points(); }

  GridField& operator[](Component c) { return comps_[static_cast<int>(c)]; }
  const GridField& operator[](Component c) const { return comps_[static_cast<int>(c)]; }

  Eigen::Map<CMatrix> at(Component c, std::size_t p) { return (*this)[c].matrix(p, n_); }
  Eigen::Map<const CMatrix> at(Component c, std::size_t p) const { return (*this)[c].matrix(p, n_); }

  /// Real-axis component A_mu (mu = 0..3 for x1..x4):
  /// A1 = A_y + A_ybar, A2 = i(A_y - A_ybar), A3 = A_z + A_zbar, A4 = i(A_zbar - A_z).
  CMatrix real(int mu, std::size_t p) const {
    switch (mu) {
      case 0: return at(Component::y, p) + at(Component::ybar, p);
      case 1: return kI * (at(Component::y, p) - at(Component::ybar, p));
      case 2: return at(Component::z, p) + at(Component::zbar, p);
      default: return kI * (at(Component::zbar, p) - at(Component::z, p));
    }
  }

  /// Max over points and components of || A - A' ||.
  double distance(const GaugePotential& o, int min_margin = 0) const {
    double best = 0.0;
    for (std::size_t p = 0; p < points(); ++p) {
      if (grid().margin(grid().unflatten(p)) < min_margin) continue;
      for (auto c : kComponents) best = std::max(best, norm(at(c, p) - o.at(c, p)));
    }
    return best;
  }

 private:
  int n_ = 0;
  std::array<GridField, 4> comps_;
};

/// Fills a potential from fn(component, coords).
template <class Fn>
GaugePotential tabulate_potential(const SpacetimeGrid& grid, int n, Fn&& fn, const Exec& exec = {}) {
  GaugePotential a(grid, n);
  parallel_for(grid.size(), exec, [&](std::size_t p) {
    const ComplexCoords x = complex_coords(grid.position(grid.unflatten(p)));
    for (auto c : kComponents) a.at(c, p) = fn(c, x);
  });
  return a;
}

/// -(V_a psi) psi^-1 at one grid point with central differences (a = 3 gives zero).
inline LaurentField delta0(const PatchField& psi, PatchId patch, int a, const Index4& x, const Circle& circle) {
  const LaurentField v = frame_apply(patch, a, psi, x);
  if (a == 3) return v;
  const CircleSamples vs = sample(v, circle);
  const CircleSamples ps = sample(psi.at(psi.grid().flatten(x)), circle);
  CircleSamples out(psi.dim(), circle.size());
  for (int j = 0; j < circle.size(); ++j) out.at(j) = -vs.at(j) * mat_inv(ps.at(j));
  LaurentField b = laurent_from_samples(out, circle.max_band());
  b.set_holomorphy(holomorphy_of(patch));
  return b;
}

/// B_a = -(V_a psi) psi^-1 for a = 1, 2 on the whole grid, computed through log psi and
/// stored to `band` (the dropped tail is recorded on each component).
inline PatchConnection delta0(const PatchField& psi, const Circle& circle, int band, const Exec& exec = {}) {
  const int n = psi.dim();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const GridField values = sample_on_circle(psi, circle, exec);
  const LogChart chart = log_chart(values, n, exec);
  const PatchId patch = psi.patch();
  PatchConnection out{PatchField(psi.grid(), patch, n, band), PatchField(psi.grid(), patch, n, band)};
  std::vector<double> tails(psi.points(), 0.0);
  parallel_for(psi.points(), exec, [&](std::size_t p) {
    std::vector<cd> mc(2 * circle.size() * nn);
    maurer_cartan_at(
        chart, p, 2, [&](int k, int j) { return frame_weights(patch, k + 1, circle.point(j)); }, Side::right,
        Stencil::closure, mc);
    for (int k = 0; k < 2; ++k) {
      CircleSamples s(n, circle.size());
      for (std::size_t i = 0; i < circle.size() * nn; ++i) s.raw()[i] = -mc[k * circle.size() * nn + i];
      tails[p] = std::max(tails[p], out[k + 1].set(p, laurent_from_samples(s, circle.max_band())));
    }
  });
  const double tail = *std::max_element(tails.begin(), tails.end());
  out.b1.truncation_tail = out.b2.truncation_tail = tail;
  return out;
}

/// Largest || B^(1)_a - lambda B^(2)_a || over coefficients and points with the given margin.
inline double patch_mismatch(const Connection01& b, int min_margin = 2) {
  double best = 0.0;
  const SpacetimeGrid& g = b.patch1.b1.grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    for (int a = 1; a <= 2; ++a) {
      const LaurentField f1 = b.patch1[a].at(p), f2 = b.patch2[a].at(p);
      const int band = std::max(f1.band(), f2.band() + 1);
      for (int d = -band; d <= band; ++d) best = std::max(best, norm(f1.at(d) - f2.at(d - 1)));
    }
  }
  return best;
}

struct ConnectionReport {
  double patch_mismatch = 0.0;          // global-form consistency of the two patches
  double psi_holomorphy_defect = 0.0;   // wrong-side coefficients of psi1, psi2
};

/// B^(i)_a = delta0(psi_i). Throws not_global_form when the two patches disagree by more than tol.
inline Connection01 connection_from_cochain(const PatchField& psi1, const PatchField& psi2, const Circle& circle,
                                            int band, double tol, const Exec& exec = {},
                                            ConnectionReport* report = nullptr) {
  if (psi1.patch() != PatchId::patch1 || psi2.patch() != PatchId::patch2)
    throw Error(ErrorCode::out_of_range, "connection_from_cochain expects (patch 1, patch 2) fields");
  Connection01 b{delta0(psi1, circle, band, exec), delta0(psi2, circle, band, exec)};
  ConnectionReport r;
  r.patch_mismatch = patch_mismatch(b);
  r.psi_holomorphy_defect = std::max(antiholomorphic_defect(psi1), antiholomorphic_defect(psi2));
  if (report) *report = r;
  if (r.patch_mismatch > tol)
    throw Error(ErrorCode::not_global_form, "patch mismatch " + std::to_string(r.patch_mismatch) +
                                                " exceeds tolerance " + std::to_string(tol));
  return b;
}

/// max over points (with margin) and circle samples of || V1 B2 - V2 B1 + [B1, B2] || on one
/// patch, plus the wrong-side coefficients of B1, B2 (their d/d lambda-bar defect).
inline double flatness_residual(const PatchConnection& b, const Circle& circle, const Exec& exec = {},
                                int min_margin = 2) {
  const PatchId patch = b.patch();
  const PatchField v1b2 = frame_apply(patch, 1, b.b2, exec);
  const PatchField v2b1 = frame_apply(patch, 2, b.b1, exec);
  const SpacetimeGrid& g = b.b1.grid();
  std::vector<double> worst(g.size(), 0.0);
  parallel_for(g.size(), exec, [&](std::size_t p) {
    if (g.margin(g.unflatten(p)) < min_margin) return;
    const LaurentField b1 = b.b1.at(p), b2 = b.b2.at(p);
    const CircleSamples s1 = sample(b1, circle), s2 = sample(b2, circle);
    const CircleSamples d12 = sample(v1b2.at(p), circle), d21 = sample(v2b1.at(p), circle);
    double r = std::max(holomorphy_defect(b1, holomorphy_of(patch)), holomorphy_defect(b2, holomorphy_of(patch)));
    for (int j = 0; j < circle.size(); ++j)
      r = std::max(r, norm(d12.at(j) - d21.at(j) + commutator(s1.at(j), s2.at(j))));
    worst[p] = r;
  });
  return *std::max_element(worst.begin(), worst.end());
}

inline double flatness_residual(const Connection01& b, const Circle& circle, const Exec& exec = {},
                                int min_margin = 2) {
  return std::max(flatness_residual(b.patch1, circle, exec, min_margin),
                  flatness_residual(b.patch2, circle, exec, min_margin));
}

/// Largest Laurent coefficient of B^(1)_a outside degrees {0, 1}, including truncation tails.
inline double linearity_defect(const Connection01& b, int min_margin = 2) {
  double best = std::max(b.patch1.b1.truncation_tail, b.patch1.b2.truncation_tail);
  const SpacetimeGrid& g = b.patch1.b1.grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.margin(g.unflatten(p)) < min_margin) continue;
    for (int a = 1; a <= 2; ++a) {
      const LaurentField f = b.patch1[a].at(p);
      for (int d = -f.band(); d <= f.band(); ++d)
        if (d != 0 && d != 1) best = std::max(best, norm(f.coeff(d)));
    }
  }
  return best;
}

/// Reads A off B^(1)_1 = A_ybar - lambda A_z and B^(1)_2 = A_zbar + lambda A_y. The remaining
/// coefficients must vanish (relative tolerance `tol`), otherwise B is not the lift of a potential.
inline GaugePotential extract_potential(const Connection01& b, double tol, double* defect = nullptr,
                                        int min_margin = 2) {
  const PatchConnection& c = b.patch1;
  const int n = c.b1.dim();
  GaugePotential a(c.b1.grid(), n);
  double scale = 1.0;
  for (std::size_t p = 0; p < a.points(); ++p) {
    const LaurentField f1 = c.b1.at(p), f2 = c.b2.at(p);
    a.at(Component::ybar, p) = f1.at(0);
    a.at(Component::z, p) = -f1.at(1);
    a.at(Component::zbar, p) = f2.at(0);
    a.at(Component::y, p) = f2.at(1);
    scale = std::max({scale, f1.max_coeff_norm(), f2.max_coeff_norm()});
  }
  const double def = linearity_defect(b, min_margin);
  if (defect) *defect = def;
  if (def > tol * scale)
    throw Error(ErrorCode::not_linear_in_lambda, "Laurent coefficients outside degrees {0, 1} reach " +
                                                     std::to_string(def) + " (tolerance " +
                                                     std::to_string(tol * scale) + ")");
  return a;
}

/// Both patches' B from A: B^(1)_1 = A_ybar - lambda A_z, B^(1)_2 = A_zbar + lambda A_y,
/// B^(2)_1 = zeta A_ybar - A_z, B^(2)_2 = zeta A_zbar + A_y.
inline Connection01 reconstruct_connection(const GaugePotential& a, int band = 1) {
  const int n = a.dim();
  const SpacetimeGrid& g = a.grid();
  Connection01 b{{PatchField(g, PatchId::patch1, n, band), PatchField(g, PatchId::patch1, n, band)},
                 {PatchField(g, PatchId::patch2, n, band), PatchField(g, PatchId::patch2, n, band)}};
  for (std::size_t p = 0; p < a.points(); ++p) {
    b.patch1.b1.coeff(p, 0) = a.at(Component::ybar, p);
    b.patch1.b1.coeff(p, 1) = -a.at(Component::z, p);
    b.patch1.b2.coeff(p, 0) = a.at(Component::zbar, p);
    b.patch1.b2.coeff(p, 1) = a.at(Component::y, p);
    b.patch2.b1.coeff(p, -1) = a.at(Component::ybar, p);
    b.patch2.b1.coeff(p, 0) = -a.at(Component::z, p);
    b.patch2.b2.coeff(p, -1) = a.at(Component::zbar, p);
    b.patch2.b2.coeff(p, 0) = a.at(Component::y, p);
  }
  return b;
}

/// Ad_psi B_a = psi^-1 B_a psi + psi^-1 V_a psi on psi's patch, stored to `band`
/// (-1: the circle's resolution limit).
inline PatchConnection adjoint_action(const PatchField& psi, const PatchConnection& b, const Circle& circle,
                                      int band = -1, const Exec& exec = {}) {
  if (psi.patch() != b.patch()) throw Error(ErrorCode::out_of_range, "adjoint_action patches differ");
  if (band < 0) band = circle.max_band();
  const int n = psi.dim();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const PatchId patch = psi.patch();
  const GridField values = sample_on_circle(psi, circle, exec);
  const LogChart chart = log_chart(values, n, exec);
  PatchConnection out{PatchField(psi.grid(), patch, n, band), PatchField(psi.grid(), patch, n, band)};
  std::vector<double> tails(psi.points(), 0.0);
  parallel_for(psi.points(), exec, [&](std::size_t p) {
    std::vector<cd> mc(2 * circle.size() * nn);
    maurer_cartan_at(
        chart, p, 2, [&](int k, int j) { return frame_weights(patch, k + 1, circle.point(j)); }, Side::left,
        Stencil::closure, mc);
    for (int k = 0; k < 2; ++k) {
      const CircleSamples bs = sample(b[k + 1].at(p), circle);
      CircleSamples s(n, circle.size());
      for (int j = 0; j < circle.size(); ++j) {
        Eigen::Map<const CMatrix> v(values.at(p).data() + j * nn, n, n);
        Eigen::Map<const CMatrix> m(mc.data() + (static_cast<std::size_t>(k) * circle.size() + j) * nn, n, n);
        s.at(j) = mat_inv(v) * bs.at(j) * v + m;
      }
      tails[p] = std::max(tails[p], out[k + 1].set(p, laurent_from_samples(s, circle.max_band())));
    }
  });
  const double tail = *std::max_element(tails.begin(), tails.end());
  out.b1.truncation_tail = out.b2.truncation_tail = tail;
  return out;
}

/// max over points and real components of || A_mu + A_mu^dagger || (zero for su(n)-valued A).
inline double anti_hermiticity_defect(const GaugePotential& a) {
  double best = 0.0;
  for (std::size_t p = 0; p < a.points(); ++p)
    for (int mu = 0; mu < 4; ++mu) {
      const CMatrix m = a.real(mu, p);
      best = std::max(best, norm(m + m.adjoint()));
    }
  return best;
}

}  // namespace twistor
