#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "twistor/grid.hpp"
#include "twistor/laurent.hpp"
#include "twistor/twistor_cover.hpp"

namespace twistor {

/// sum_t coeff_t w1^p w2^q lambda^r with p, q >= 0. Holomorphic on the twistor space by
/// construction, since w1, w2 and lambda are.
struct TwistorPolynomial {
  struct Term {
    CMatrix coeff;
    int p = 0, q = 0, r = 0;
  };

  int n = 1;
  std::vector<Term> terms;

  TwistorPolynomial() = default;
  explicit TwistorPolynomial(int dim) : n(dim) {}

  TwistorPolynomial& add(const CMatrix& c, int p, int q, int r) {
    if (p < 0 || q < 0) throw Error(ErrorCode::out_of_range, "twistor polynomial exponents p, q must be >= 0");
    terms.push_back({c, p, q, r});
    return *this;
  }

  bool empty() const { return terms.empty(); }

  /// Smallest and largest lambda degree after expanding w1, w2.
  std::pair<int, int> lambda_range() const {
    if (terms.empty()) return {0, 0};
    int lo = terms.front().r, hi = lo;
    for (const auto& t : terms) {
      lo = std::min(lo, t.r);
      hi = std::max(hi, t.r + t.p + t.q);
    }
    return {lo, hi};
  }
  int band() const {
    const auto [lo, hi] = lambda_range();
    return std::max(-lo, hi);
  }

  bool is_diagonal() const {
    return std::all_of(terms.begin(), terms.end(), [](const Term& t) { return twistor::is_diagonal(t.coeff); });
  }

  CMatrix operator()(const ComplexCoords& x, cd lambda) const {
    CMatrix out = CMatrix::Zero(n, n);
    const cd a = w1(x, lambda), b = w2(x, lambda);
    for (const auto& t : terms) out += (ipow(a, t.p) * ipow(b, t.q) * ipow(lambda, t.r)) * t.coeff;
    return out;
  }

  /// Exact Laurent expansion in lambda at the spacetime point x.
  LaurentField to_laurent(const ComplexCoords& x, int band) const {
    LaurentField out(n, band);
    for (const auto& t : terms) {
      // w1^p = sum_k C(p,k) z^(p-k) ybar^k lambda^k,  w2^q = sum_l C(q,l) y^(q-l) (-zbar)^l lambda^l
      for (int k = 0; k <= t.p; ++k) {
        const cd ck = binomial(t.p, k) * ipow(x.z, t.p - k) * ipow(x.ybar, k);
        for (int l = 0; l <= t.q; ++l) {
          const int d = t.r + k + l;
          if (d < -band || d > band) continue;
          const cd cl = binomial(t.q, l) * ipow(x.y, t.q - l) * ipow(-x.zbar, l);
          out.coeff(d) += (ck * cl) * t.coeff;
        }
      }
    }
    return out;
  }

  TwistorPolynomial scaled(cd s) const {
    TwistorPolynomial out = *this;
    for (auto& t : out.terms) t.coeff *= s;
    return out;
  }

 private:
  static double binomial(int a, int b) {
    double v = 1.0;
    for (int i = 1; i <= b; ++i) v = v * (a - b + i) / i;
    return v;
  }
};

/// Polynomial in (y, z, ybar, zbar) with matrix coefficients, used for explicit potentials.
struct SpacetimePolynomial {
  struct Term {
    CMatrix coeff;
    std::array<int, 4> exps{};  // powers of y, z, ybar, zbar
  };

  int n = 1;
  std::vector<Term> terms;

  CMatrix operator()(const ComplexCoords& x) const {
    CMatrix out = CMatrix::Zero(n, n);
    for (const auto& t : terms)
      out += (ipow(x.y, t.exps[0]) * ipow(x.z, t.exps[1]) * ipow(x.ybar, t.exps[2]) *
              ipow(x.zbar, t.exps[3])) *
             t.coeff;
    return out;
  }
};

/// Portable uniform draws from a 64-bit Mersenne twister, so seeded runs reproduce across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  cd complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  /// Entries uniform in the square [-1, 1] + i[-1, 1], rescaled to spectral norm `scale`.
  CMatrix matrix(int n, double scale = 1.0) {
    CMatrix m(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) m(i, j) = complex();
    const double s = norm(m);
    return s > 0.0 ? CMatrix(m * (scale / s)) : m;
  }

  /// Anti-hermitian matrix with spectral norm `scale`.
  CMatrix anti_hermitian(int n, double scale = 1.0) {
    const CMatrix m = matrix(n);
    CMatrix a = 0.5 * (m - m.adjoint());
    const double s = norm(a);
    return s > 0.0 ? CMatrix(a * (scale / s)) : a;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Shape of randomly drawn twistor polynomials.
struct RandomPolynomialSpec {
  int terms = 3;
  int max_w_degree = 1;  // p + q <= max_w_degree
  int r_min = -1;
  int r_max = 1;
  double scale = 1.0;  // spectral norm of every coefficient
};

inline TwistorPolynomial random_twistor_polynomial(Rng& rng, int n, const RandomPolynomialSpec& spec) {
  TwistorPolynomial f(n);
  for (int t = 0; t < spec.terms; ++t) {
    const int deg = rng.integer(0, spec.max_w_degree);
    const int p = rng.integer(0, deg);
    f.add(rng.matrix(n, spec.scale), p, deg - p, rng.integer(spec.r_min, spec.r_max));
  }
  return f;
}

}  // namespace twistor
