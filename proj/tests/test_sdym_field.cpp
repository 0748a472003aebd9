#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "twistor/twistor.hpp"

using namespace twistor;

namespace {

/// Potential from real-axis components A_mu(x), mu = 0..3, via A_y = (A1 - i A2) / 2 and so on.
template <class Fn>
GaugePotential from_real(const SpacetimeGrid& g, int n, Fn&& fn) {
  GaugePotential a(g, n);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.position(g.unflatten(p));
    const std::array<CMatrix, 4> r{fn(0, x), fn(1, x), fn(2, x), fn(3, x)};
    a.at(Component::y, p) = 0.5 * (r[0] - kI * r[1]);
    a.at(Component::ybar, p) = 0.5 * (r[0] + kI * r[1]);
    a.at(Component::z, p) = 0.5 * (r[2] + kI * r[3]);
    a.at(Component::zbar, p) = 0.5 * (r[2] - kI * r[3]);
  }
  return a;
}

/// su(2) generators T_a = -(i/2) sigma_a with [T_a, T_b] = eps_abc T_c.
std::array<CMatrix, 3> su2() {
  std::array<CMatrix, 3> t;
  for (auto& m : t) m = CMatrix::Zero(2, 2);
  t[0](0, 1) = t[0](1, 0) = cd(0, -0.5);
  t[1](0, 1) = -0.5;
  t[1](1, 0) = 0.5;
  t[2](0, 0) = cd(0, -0.5);
  t[2](1, 1) = cd(0, 0.5);
  return t;
}

/// 't Hooft symbol eta^a_{mu nu} with the fourth coordinate as index 3.
double eta(int a, int mu, int nu) {
  if (mu < 3 && nu < 3) {
    const int e[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
                            {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
                            {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
    return e[a][mu][nu];
  }
  if (nu == 3 && mu == a) return 1.0;
  if (mu == 3 && nu == a) return -1.0;
  return 0.0;
}

/// Instanton of size rho centred at c: A_mu = 2 eta^a_{mu nu} x^nu T_a / (x^2 + rho^2) with x shifted by c.
GaugePotential instanton(const SpacetimeGrid& g, double rho, std::array<double, 4> c = {}) {
  const auto t = su2();
  return from_real(g, 2, [&](int mu, std::array<double, 4> x) {
    for (int k = 0; k < 4; ++k) x[k] -= c[k];
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    CMatrix m = CMatrix::Zero(2, 2);
    for (int a = 0; a < 3; ++a)
      for (int nu = 0; nu < 4; ++nu) m += 2.0 * eta(a, mu, nu) * x[nu] * t[a];
    return CMatrix(m / (r2 + rho * rho));
  });
}

GridField unitary_gauge(const SpacetimeGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  const CMatrix m0 = rng.anti_hermitian(2), m1 = rng.anti_hermitian(2, 0.7), m2 = rng.anti_hermitian(2, 0.4);
  GridField out(g, 4);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.position(g.unflatten(p));
    out.matrix(p, 2) = oracle::expm(m0 + x[0] * m1 + x[1] * x[3] * m2);
  }
  return out;
}

double max_field(const FieldStrength& f, int margin = 0) {
  double best = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) {
    if (f.grid().margin(f.grid().unflatten(p)) < margin) continue;
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) best = std::max(best, norm(f.real(mu, nu, p)));
  }
  return best;
}

}  // namespace

TEST_CASE("zero potential", "[field]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(9, 0.1);
  const GaugePotential a(g, 2);
  const FieldStrength f = field_strength(a);
  CHECK(max_field(f) == 0.0);
  CHECK(sdym_residual_complex(f) == 0.0);
  CHECK(sdym_residual_hodge(f, 1) == 0.0);
  CHECK(sdym_residual_hodge(f, -1) == 0.0);
  CHECK(ym_residual(a) == 0.0);
  const GaugeSignature s = gauge_invariant_signature(f);
  for (std::size_t p = 0; p < g.size(); ++p) {
    CHECK(s.trace_ff[p] == cd{});
    CHECK(s.density[p] == cd{});
  }
}

TEST_CASE("abelian self-dual fixture", "[field]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(7, 0.1);
  const GaugePotential a = abelian_fixture(g, 2);
  const FieldStrength f = field_strength(a);
  // A_1 = y, A_2 = -i y, A_3 = -z, A_4 = -i z, so F_12 = F_34 = -2i and the rest vanish.
  const CMatrix one = identity(2);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    err = std::max(err, norm(f.real(0, 1, p) + 2.0 * kI * one));
    err = std::max(err, norm(f.real(2, 3, p) + 2.0 * kI * one));
    for (auto [mu, nu] : {std::pair{0, 2}, {0, 3}, {1, 2}, {1, 3}}) err = std::max(err, norm(f.real(mu, nu, p)));
    err = std::max(err, norm(f.real(1, 0, p) - 2.0 * kI * one));
  }
  CHECK(err < 1e-12);
  CHECK(orientation_sign() == 1);
  CHECK(sdym_residual_complex(f) < 1e-12);
  CHECK(sdym_residual_hodge(f, orientation_sign()) < 1e-12);
  // The opposite orientation sees *F - F = -F_34 - F_12 on the (1,2) plane.
  CHECK(sdym_residual_hodge(f, -orientation_sign()) == Catch::Approx(4.0));
  CHECK(ym_residual(a) < 1e-12);

  // A_zbar = +z flips F_z zbar and leaves F_y ybar + F_z zbar = 2.
  const FieldStrength anti = field_strength(abelian_fixture(g, 2, 1.0));
  CHECK(sdym_residual_complex(anti) == Catch::Approx(2.0));
  CHECK(sdym_residual_hodge(anti, orientation_sign()) == Catch::Approx(4.0));
}

TEST_CASE("constant potentials give commutators", "[field]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(5, 0.2);
  Rng rng(4);
  const std::array<CMatrix, 4> c{rng.matrix(3), rng.matrix(3), rng.matrix(3), rng.matrix(3)};
  const GaugePotential a = from_real(g, 3, [&](int mu, const std::array<double, 4>&) { return c[mu]; });
  const FieldStrength f = field_strength(a);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu)
        err = std::max(err, oracle::spectral(f.real(mu, nu, p) - (c[mu] * c[nu] - c[nu] * c[mu])));
  CHECK(err < 1e-13);
}

TEST_CASE("instanton is self-dual for one orientation and solves Yang-Mills", "[field]") {
  // Both grids share the region |x_mu| <= 0.4 four points away from their boundary.
  double prev_sd = 0.0, prev_ym = 0.0;
  for (auto [h, extent] : {std::pair{0.2, 13}, {0.1, 17}}) {
    const SpacetimeGrid g = SpacetimeGrid::centered(extent, h);
    const GaugePotential a = instanton(g, 1.5, {0.13, -0.07, 0.05, 0.11});
    const FieldStrength f = field_strength(a);
    const double plus = sdym_residual_hodge(f, 1, 4), minus = sdym_residual_hodge(f, -1, 4);
    const double sd = std::min(plus, minus), ym = ym_residual(a, f);
    INFO("h = " << h << " hodge(+) " << plus << " hodge(-) " << minus << " complex " << sdym_residual_complex(f)
                << " ym " << ym);
    CHECK(std::max(plus, minus) > 1.0);
    CHECK(sd <= discretization_tolerance(g));
    CHECK(ym <= discretization_tolerance(g));
    // The complex form agrees with the Hodge form of the calibrated orientation.
    const double c = sdym_residual_complex(f, 4), hc = sdym_residual_hodge(f, orientation_sign(), 4);
    CHECK(hc <= 4.0 * c + discretization_tolerance(g));
    CHECK(c <= 4.0 * hc + discretization_tolerance(g));
    if (prev_sd > 0.0) {
      CHECK(prev_sd / sd > 12.0);
      CHECK(prev_ym / ym > 12.0);
    }
    prev_sd = sd;
    prev_ym = ym;
  }
}

TEST_CASE("random potentials are neither self-dual nor Yang-Mills", "[field]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(9, 0.1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::array<std::array<CMatrix, 3>, 4> c;
    for (auto& row : c)
      for (auto& m : row) m = rng.matrix(2);
    const GaugePotential a = from_real(g, 2, [&](int mu, const std::array<double, 4>& x) {
      return CMatrix(c[mu][0] + x[(mu + 1) % 4] * c[mu][1] + x[mu] * x[(mu + 2) % 4] * c[mu][2]);
    });
    const FieldStrength f = field_strength(a);
    const double cx = sdym_residual_complex(f), hx = sdym_residual_hodge(f, orientation_sign());
    CHECK(cx > 1e-2);
    CHECK(ym_residual(a, f) > 1e-2);
    CHECK(hx <= 4.0 * cx + discretization_tolerance(g));
    CHECK(cx <= 4.0 * hx + discretization_tolerance(g));
  }
}

TEST_CASE("gauge transformations", "[gauge]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(9, 0.1);
  const GaugePotential a = instanton(g, 0.8);
  const FieldStrength f = field_strength(a);
  const double disc = discretization_tolerance(g);

  SECTION("identity") {
    GridField one(g, 4);
    for (std::size_t p = 0; p < g.size(); ++p) one.matrix(p, 2) = identity(2);
    CHECK(gauge_transform(a, one).distance(a) < 1e-15);
  }
  SECTION("pure gauge is flat") {
    const GaugePotential pure = gauge_transform(GaugePotential(g, 2), unitary_gauge(g, 3));
    const FieldStrength fp = field_strength(pure);
    CHECK(max_field(fp, 2) <= disc);
    CHECK(sdym_residual_complex(fp) <= disc);
  }
  SECTION("the field strength is conjugated") {
    const GridField u = unitary_gauge(g, 5);
    const FieldStrength fg = field_strength(gauge_transform(a, u));
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (g.margin(g.unflatten(p)) < 2) continue;
      const oracle::Mat up = u.matrix(p, 2);
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = mu + 1; nu < 4; ++nu)
          err = std::max(err, oracle::spectral(fg.real(mu, nu, p) - up.inverse() * f.real(mu, nu, p) * up));
    }
    CHECK(err <= disc);
    CHECK(std::abs(sdym_residual_complex(fg) - sdym_residual_complex(f)) <= disc);
    CHECK(std::abs(sdym_residual_hodge(fg, -1) - sdym_residual_hodge(f, -1)) <= disc);
  }
  SECTION("signatures are gauge invariant and separate different fields") {
    const GridField u = unitary_gauge(g, 7);
    const GaugeSignature s = gauge_invariant_signature(f);
    const GaugeSignature sg = gauge_invariant_signature(field_strength(gauge_transform(a, u)));
    double scale = 0.0;
    for (const cd& v : s.trace_ff) scale = std::max(scale, std::abs(v));
    CHECK(signature_discrepancy(s, sg, g) <= discretization_tolerance(g, scale));
    const GaugeSignature other = gauge_invariant_signature(field_strength(instanton(g, 1.2)));
    CHECK(signature_discrepancy(s, other, g) > 1.0);
    const GaugeSignature ab1 = gauge_invariant_signature(field_strength(abelian_fixture(g, 2)));
    GaugePotential doubled = abelian_fixture(g, 2);
    for (auto c : kComponents)
      for (std::size_t p = 0; p < g.size(); ++p) doubled.at(c, p) *= 2.0;
    CHECK(signature_discrepancy(ab1, gauge_invariant_signature(field_strength(doubled)), g) > 1.0);
  }
}

TEST_CASE("signature values on the abelian fixture", "[gauge]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(5, 0.1);
  const GaugeSignature s = gauge_invariant_signature(field_strength(abelian_fixture(g, 2)));
  // F_12 = F_34 = -2i times the identity: sum over ordered pairs of F F is 4 (-4) I = -16 I.
  for (std::size_t p = 0; p < g.size(); ++p) {
    CHECK(std::abs(s.trace_ff[p] - cd(-32.0)) < 1e-12);
    CHECK(std::abs(s.density[p] - cd(8.0 * -4.0 * 2.0)) < 1e-12);
    for (const cd& e : s.eigen[p]) CHECK(std::abs(e - cd(-16.0)) < 1e-12);
  }
}

TEST_CASE("linearized field strength matches a finite difference in the potential", "[field]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(7, 0.1);
  const GaugePotential a = instanton(g, 1.0);
  Rng rng(12);
  const std::array<CMatrix, 2> c{rng.matrix(2), rng.matrix(2)};
  const GaugePotential da = from_real(g, 2, [&](int mu, const std::array<double, 4>& x) {
    return CMatrix(c[0] * x[mu] + c[1] * static_cast<double>(mu));
  });
  const FieldStrength lin = linearized_field_strength(a, da);
  const FieldStrength f0 = field_strength(a);
  const double eps = 1e-6;
  GaugePotential moved = a;
  for (auto comp : kComponents)
    for (std::size_t p = 0; p < g.size(); ++p) moved.at(comp, p) += eps * da.at(comp, p);
  const FieldStrength f1 = field_strength(moved);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = mu + 1; nu < 4; ++nu)
        err = std::max(err, norm((f1.real(mu, nu, p) - f0.real(mu, nu, p)) / eps - lin.real(mu, nu, p)));
  CHECK(err < 1e-5);
}

TEST_CASE("discretization tolerance", "[field]") {
  CHECK(discretization_tolerance(SpacetimeGrid::centered(5, 0.1)) == Catch::Approx(1e-2));
  CHECK(discretization_tolerance(SpacetimeGrid::centered(5, 0.1), 3.0) == Catch::Approx(3e-2));
  CHECK(discretization_tolerance(SpacetimeGrid::centered(5, 0.05), 0.5) == Catch::Approx(100 * std::pow(0.05, 4)));
}
