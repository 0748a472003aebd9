#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "twistor/grid.hpp"
#include "twistor/laurent.hpp"
#include "twistor/matrix.hpp"
#include "twistor/parallel.hpp"

namespace twistor {

/// Patch 1 uses the fibre coordinate lambda, patch 2 uses zeta = 1 / lambda.
enum class PatchId { patch1, patch2 };

inline Holomorphy holomorphy_of(PatchId patch) {
  return patch == PatchId::patch1 ? Holomorphy::patch1 : Holomorphy::patch2;
}

inline PatchId other(PatchId patch) { return patch == PatchId::patch1 ? PatchId::patch2 : PatchId::patch1; }

/// Holomorphic twistor coordinates w1 = z + lambda ybar and w2 = y - lambda zbar.
inline cd w1(const ComplexCoords& c, cd lambda) { return c.z + lambda * c.ybar; }
inline cd w2(const ComplexCoords& c, cd lambda) { return c.y - lambda * c.zbar; }

/// A Laurent field in lambda at every grid point. Coefficients are always indexed by lambda
/// degree, also on patch 2.
class PatchField {
 public:
  PatchField() = default;
  PatchField(const SpacetimeGrid& grid, PatchId patch, int n, int band)
      : patch_(patch), n_(n), band_(band), coeffs_(grid, (2 * band + 1) * n * n) {}

  PatchId patch() const noexcept { return patch_; }
  int dim() const noexcept { return n_; }
  int band() const noexcept { return band_; }
  const SpacetimeGrid& grid() const noexcept { return coeffs_.grid(); }
  std::size_t points() const noexcept { return coeffs_.points(); }

  const GridField& coeffs() const noexcept { return coeffs_; }
  GridField& coeffs() noexcept { return coeffs_; }

  Eigen::Map<CMatrix> coeff(std::size_t p, int d) { return {slot(p, d), n_, n_}; }
  Eigen::Map<const CMatrix> coeff(std::size_t p, int d) const { return {slot(p, d), n_, n_}; }

  LaurentField at(std::size_t p) const {
    LaurentField f(n_, band_, holomorphy_of(patch_));
    std::copy(coeffs_.at(p).begin(), coeffs_.at(p).end(), f.raw().begin());
    return f;
  }

  /// Stores f at p, dropping degrees beyond the band; returns the largest dropped norm.
  double set(std::size_t p, const LaurentField& f) {
    double tail = 0.0;
    const LaurentField g = f.band() == band_ ? f : f.with_band(band_, &tail);
    std::copy(g.raw().begin(), g.raw().end(), coeffs_.at(p).begin());
    return tail;
  }

  /// Largest norm of coefficients dropped when this field was assembled.
  double truncation_tail = 0.0;

 private:
  cd* slot(std::size_t p, int d) {
    return coeffs_.at(p).data() + static_cast<std::size_t>(d + band_) * n_ * n_;
  }
  const cd* slot(std::size_t p, int d) const {
    return coeffs_.at(p).data() + static_cast<std::size_t>(d + band_) * n_ * n_;
  }

  PatchId patch_ = PatchId::patch1;
  int n_ = 0;
  int band_ = 0;
  GridField coeffs_;
};

/// Real-axis weights of the frame vector V_a at fibre point lambda.
/// Patch 1: V1 = d_ybar - lambda d_z, V2 = d_zbar + lambda d_y.
/// Patch 2: V1 = zeta d_ybar - d_z,  V2 = zeta d_zbar + d_y.
inline std::array<cd, 4> frame_weights(PatchId patch, int a, cd lambda) {
  const bool first = a == 1;
  const auto lead = wirtinger_weights(first ? Wirtinger::ybar : Wirtinger::zbar);
  const auto tail = wirtinger_weights(first ? Wirtinger::z : Wirtinger::y);
  const double sign = first ? -1.0 : 1.0;
  const cd c_lead = patch == PatchId::patch1 ? cd{1.0} : 1.0 / lambda;
  const cd c_tail = patch == PatchId::patch1 ? sign * lambda : cd{sign};
  std::array<cd, 4> w{};
  for (int mu = 0; mu < 4; ++mu) w[mu] = c_lead * lead[mu] + c_tail * tail[mu];
  return w;
}

namespace detail {

// In coefficient space V_a shifts degrees: on patch 1
//   (V1 f)_d = (d_ybar f)_d - (d_z f)_{d-1},  (V2 f)_d = (d_zbar f)_d + (d_y f)_{d-1},
// on patch 2 the leading term reads degree d+1 and the trailing term degree d.
inline void frame_kernel(const PatchField& f, PatchId patch, std::size_t p, int a, Stencil mode,
                         LaurentField& out) {
  const int n = f.dim(), band = f.band();
  const std::size_t size = f.coeffs().components();
  std::vector<cd> lead(size), trail(size);
  const bool first = a == 1;
  accumulate_directional(f.coeffs(), p, wirtinger_weights(first ? Wirtinger::ybar : Wirtinger::zbar), 1.0, lead,
                         mode);
  accumulate_directional(f.coeffs(), p, wirtinger_weights(first ? Wirtinger::z : Wirtinger::y), 1.0, trail, mode);
  const double sign = first ? -1.0 : 1.0;
  const int shift_lead = patch == PatchId::patch1 ? 0 : 1;
  const int shift_trail = patch == PatchId::patch1 ? -1 : 0;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  auto add = [&](int d, const std::vector<cd>& src, int src_d, double s) {
    if (src_d < -band || src_d > band) return;
    const cd* from = src.data() + static_cast<std::size_t>(src_d + band) * nn;
    cd* to = out.coeff(d).data();
    for (std::size_t k = 0; k < nn; ++k) to[k] += s * from[k];
  };
  for (int d = -out.band(); d <= out.band(); ++d) {
    add(d, lead, d + shift_lead, 1.0);
    add(d, trail, d + shift_trail, sign);
  }
}

}  // namespace detail

/// V_a f at a single grid point with central differences; a = 3 (the d/d lambda-bar direction)
/// is zero on Laurent fields. Throws a margin error within 2 points of a face.
inline LaurentField frame_apply(PatchId patch, int a, const PatchField& f, const Index4& x) {
  if (!f.grid().contains(x)) throw Error(ErrorCode::out_of_range, "frame_apply index outside the grid");
  if (a < 1 || a > 3) throw Error(ErrorCode::out_of_range, "frame index must be 1, 2 or 3");
  LaurentField out(f.dim(), f.band() + 1);
  if (a == 3) return out;
  if (f.grid().margin(x) < 2) throw Error(ErrorCode::margin, "frame_apply needs a 2-point interior margin");
  detail::frame_kernel(f, patch, f.grid().flatten(x), a, Stencil::central, out);
  return out;
}

/// V_a f on the whole grid; the two outer layers use one-sided 4th-order stencils.
inline PatchField frame_apply(PatchId patch, int a, const PatchField& f, const Exec& exec = {}) {
  if (a < 1 || a > 3) throw Error(ErrorCode::out_of_range, "frame index must be 1, 2 or 3");
  PatchField out(f.grid(), patch, f.dim(), f.band() + 1);
  if (a == 3) return out;
  parallel_for(f.points(), exec, [&](std::size_t p) {
    LaurentField v(f.dim(), f.band() + 1);
    detail::frame_kernel(f, patch, p, a, Stencil::closure, v);
    out.set(p, v);
  });
  return out;
}

/// Re-expresses a Laurent series in lambda as one in zeta (or back): degree d becomes -d.
inline LaurentField patch_transition(const LaurentField& f, PatchId from) {
  LaurentField out(f.dim(), f.band(), holomorphy_of(other(from)));
  for (int d = -f.band(); d <= f.band(); ++d) out.coeff(-d) = f.coeff(d);
  if (f.holomorphy() == Holomorphy::none) out.set_holomorphy(Holomorphy::none);
  return out;
}

/// Largest coefficient on the wrong side of the field's own patch: the d/d lambda-bar defect.
inline double antiholomorphic_defect(const PatchField& f) {
  double best = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) best = std::max(best, holomorphy_defect(f.at(p), holomorphy_of(f.patch())));
  return best;
}

/// Values of f at the circle points, stored as `circle.size()` blocks of n x n per grid point.
inline GridField sample_on_circle(const PatchField& f, const Circle& circle, const Exec& exec = {}) {
  const int n = f.dim();
  GridField out(f.grid(), circle.size() * n * n);
  parallel_for(f.points(), exec, [&](std::size_t p) {
    const CircleSamples s = sample(f.at(p), circle);
    std::copy(s.raw().begin(), s.raw().end(), out.at(p).begin());
  });
  return out;
}

/// Inverse of sample_on_circle: projects every point onto degrees [-band, band] and records the
/// largest coefficient between band and the circle's resolution limit as the truncation tail.
inline PatchField patch_from_samples(const GridField& samples, int n, const Circle& circle, PatchId patch, int band,
                                     const Exec& exec = {}) {
  if (band > circle.max_band())
    throw Error(ErrorCode::insufficient_sampling,
                std::to_string(circle.size()) + " samples cannot resolve band " + std::to_string(band));
  PatchField out(samples.grid(), patch, n, band);
  std::vector<double> tails(samples.points(), 0.0);
  parallel_for(samples.points(), exec, [&](std::size_t p) {
    CircleSamples s(n, circle.size());
    std::copy(samples.at(p).begin(), samples.at(p).end(), s.raw().begin());
    tails[p] = out.set(p, laurent_from_samples(s, circle.max_band()));
  });
  out.truncation_tail = *std::max_element(tails.begin(), tails.end());
  return out;
}

/// Matrix samples on the grid together with their principal logarithms. Derivatives of a
/// group-valued field are taken through the logarithm, where the field is usually a low
/// degree polynomial in x, so the finite-difference error is far smaller. Blocks whose
/// logarithm jumps branch anywhere on the grid fall back to differentiating the values.
struct LogChart {
  const GridField* values = nullptr;
  int n = 0;
  int blocks = 0;
  GridField logs;
  std::vector<char> direct;  // per block
};

inline LogChart log_chart(const GridField& values, int n, const Exec& exec = {}) {
  LogChart c;
  c.values = &values;
  c.n = n;
  c.blocks = values.components() / (n * n);
  c.logs = GridField(values.grid(), values.components());
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<char> failed(values.points() * c.blocks, 0);
  parallel_for(values.points(), exec, [&](std::size_t p) {
    for (int j = 0; j < c.blocks; ++j) {
      Eigen::Map<const CMatrix> v(values.at(p).data() + j * nn, n, n);
      Eigen::Map<CMatrix> l(c.logs.at(p).data() + j * nn, n, n);
      try {
        l = mat_log(v);
      } catch (const Error&) {
        l.setZero();
        failed[p * c.blocks + j] = 1;
      }
    }
  });
  c.direct.assign(c.blocks, 0);
  for (std::size_t p = 0; p < values.points(); ++p)
    for (int j = 0; j < c.blocks; ++j)
      if (failed[p * c.blocks + j]) c.direct[j] = 1;

  // A branch jump shows up as an O(1) second difference along some axis.
  const SpacetimeGrid& g = values.grid();
  for (std::size_t p = 0; p < values.points(); ++p) {
    const Index4 i = g.unflatten(p);
    for (int mu = 0; mu < 4; ++mu) {
      if (i[mu] < 1 || i[mu] > g.extents[mu] - 2) continue;
      const std::size_t s = g.stride(mu);
      const cd* lo = c.logs.at(p - s).data();
      const cd* mid = c.logs.at(p).data();
      const cd* hi = c.logs.at(p + s).data();
      for (int j = 0; j < c.blocks; ++j) {
        if (c.direct[j]) continue;
        for (std::size_t k = j * nn; k < (j + 1) * nn; ++k)
          if (std::abs(lo[k] - 2.0 * mid[k] + hi[k]) > 1.0) {
            c.direct[j] = 1;
            break;
          }
      }
    }
  }
  return c;
}

enum class Side { left, right };

/// For each direction k < dirs and block j, writes D psi psi^-1 (right) or psi^-1 D psi (left)
/// at point p, where D = sum_mu weights(k, j)[mu] d_mu. Output layout: [k][j][n x n].
template <class WeightsFn>
void maurer_cartan_at(const LogChart& c, std::size_t p, int dirs, WeightsFn&& weights, Side side, Stencil mode,
                      std::span<cd> out) {
  const int n = c.n;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  CMatrix w(n, n), inv(n, n);
  for (int j = 0; j < c.blocks; ++j) {
    Eigen::Map<const CMatrix> value(c.values->at(p).data() + j * nn, n, n);
    Eigen::Map<const CMatrix> log(c.logs.at(p).data() + j * nn, n, n);
    const bool direct = c.direct[j] != 0;
    inv = direct ? mat_inv(value) : mat_exp(-log);
    for (int k = 0; k < dirs; ++k) {
      w.setZero();
      std::span<cd> ws(w.data(), nn);
      accumulate_directional(direct ? *c.values : c.logs, p, weights(k, j), 1.0, ws, mode, j * nn);
      const CMatrix dv = direct ? w : exp_derivative(log, w);
      Eigen::Map<CMatrix> dst(out.data() + (static_cast<std::size_t>(k) * c.blocks + j) * nn, n, n);
      if (side == Side::right)
        dst.noalias() = dv * inv;
      else
        dst.noalias() = inv * dv;
    }
  }
}

}  // namespace twistor
