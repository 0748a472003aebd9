#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "twistor/matrix.hpp"
#include "twistor/parallel.hpp"

namespace twistor {

using Index4 = std::array<int, 4>;

/// Uniform grid on a box in R^4, stored lexicographically in (x1, x2, x3, x4) with x4 fastest.
struct SpacetimeGrid {
  std::array<int, 4> extents{5, 5, 5, 5};
  std::array<double, 4> spacing{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> origin{0.0, 0.0, 0.0, 0.0};

  /// extent^4 points with spacing h, centred on the origin of R^4.
  static SpacetimeGrid centered(int extent, double h) {
    SpacetimeGrid g;
    g.extents.fill(extent);
    g.spacing.fill(h);
    g.origin.fill(-0.5 * (extent - 1) * h);
    g.validate();
    return g;
  }

  void validate() const {
    for (int mu = 0; mu < 4; ++mu) {
      if (extents[mu] < 5)
        throw Error(ErrorCode::invalid_grid, "axis " + std::to_string(mu + 1) + " has fewer than 5 points");
      if (!(spacing[mu] > 0.0))
        throw Error(ErrorCode::invalid_grid, "axis " + std::to_string(mu + 1) + " has non-positive spacing");
    }
  }

  std::size_t size() const {
    return static_cast<std::size_t>(extents[0]) * extents[1] * extents[2] * extents[3];
  }

  bool contains(const Index4& i) const {
    for (int mu = 0; mu < 4; ++mu)
      if (i[mu] < 0 || i[mu] >= extents[mu]) return false;
    return true;
  }

  std::size_t flatten(const Index4& i) const {
    return ((static_cast<std::size_t>(i[0]) * extents[1] + i[1]) * extents[2] + i[2]) * extents[3] + i[3];
  }

  Index4 unflatten(std::size_t p) const {
    Index4 i{};
    for (int mu = 3; mu >= 0; --mu) {
      i[mu] = static_cast<int>(p % extents[mu]);
      p /= extents[mu];
    }
    return i;
  }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int mu = 3; mu > axis; --mu) s *= extents[mu];
    return s;
  }

  std::array<double, 4> position(const Index4& i) const {
    return {origin[0] + i[0] * spacing[0], origin[1] + i[1] * spacing[1], origin[2] + i[2] * spacing[2],
            origin[3] + i[3] * spacing[3]};
  }

  /// Distance (in points) to the nearest face.
  int margin(const Index4& i) const {
    int m = extents[0];
    for (int mu = 0; mu < 4; ++mu) m = std::min({m, i[mu], extents[mu] - 1 - i[mu]});
    return m;
  }

  double min_spacing() const { return std::min({spacing[0], spacing[1], spacing[2], spacing[3]}); }
  double max_spacing() const { return std::max({spacing[0], spacing[1], spacing[2], spacing[3]}); }

  friend bool operator==(const SpacetimeGrid&, const SpacetimeGrid&) = default;
};

/// y = x1 + i x2, z = x3 - i x4 and their conjugates.
struct ComplexCoords {
  cd y, z, ybar, zbar;
};

inline ComplexCoords complex_coords(const std::array<double, 4>& x) {
  const cd y{x[0], x[1]}, z{x[2], -x[3]};
  return {y, z, std::conj(y), std::conj(z)};
}

inline ComplexCoords complex_coords(const SpacetimeGrid& grid, const Index4& i) {
  if (!grid.contains(i)) throw Error(ErrorCode::out_of_range, "grid index outside the extents");
  return complex_coords(grid.position(i));
}

/// A fixed number of complex components at every grid point.
class GridField {
 public:
  GridField() = default;
  GridField(const SpacetimeGrid& grid, int components)
      : grid_(grid), ncomp_(components), data_(grid.size() * static_cast<std::size_t>(components)) {}

  const SpacetimeGrid& grid() const noexcept { return grid_; }
  int components() const noexcept { return ncomp_; }
  std::size_t points() const noexcept { return grid_.size(); }

  std::span<cd> at(std::size_t p) { return {data_.data() + p * ncomp_, static_cast<std::size_t>(ncomp_)}; }
  std::span<const cd> at(std::size_t p) const {
    return {data_.data() + p * ncomp_, static_cast<std::size_t>(ncomp_)};
  }

  /// View of the point's components as an n x n matrix (components == n * n).
  Eigen::Map<CMatrix> matrix(std::size_t p, int n) { return {data_.data() + p * ncomp_, n, n}; }
  Eigen::Map<const CMatrix> matrix(std::size_t p, int n) const { return {data_.data() + p * ncomp_, n, n}; }

  std::span<cd> raw() noexcept { return data_; }
  std::span<const cd> raw() const noexcept { return data_; }

 private:
  SpacetimeGrid grid_;
  int ncomp_ = 0;
  std::vector<cd> data_;
};

/// How derivatives are taken near faces.
enum class Stencil {
  central,  // 5-point central only; throws a margin error within 2 points of a face
  closure,  // central in the interior, 4th-order one-sided at the two outer layers
};

namespace detail {

struct StencilWeights {
  std::array<int, 5> offsets;
  std::array<double, 5> weights;  // multiply by 1 / (12 h)
};

inline StencilWeights stencil_for(int i, int extent, Stencil mode) {
  if (i >= 2 && i <= extent - 3) return {{-2, -1, 0, 1, 2}, {1.0, -8.0, 0.0, 8.0, -1.0}};
  if (mode == Stencil::central)
    throw Error(ErrorCode::margin, "index " + std::to_string(i) + " lies inside the 2-point boundary margin");
  if (i == 0) return {{0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}};
  if (i == 1) return {{-1, 0, 1, 2, 3}, {-3.0, -10.0, 18.0, -6.0, 1.0}};
  if (i == extent - 1) return {{0, -1, -2, -3, -4}, {25.0, -48.0, 36.0, -16.0, 3.0}};
  return {{1, 0, -1, -2, -3}, {3.0, 10.0, -18.0, 6.0, -1.0}};
}

}  // namespace detail

/// out += scale * d f / d x^{axis+1} at point p (4th order), reading components
/// [first, first + out.size()).
inline void accumulate_partial(const GridField& f, std::size_t p, int axis, cd scale, std::span<cd> out,
                               Stencil mode, std::size_t first = 0) {
  const SpacetimeGrid& g = f.grid();
  const Index4 idx = g.unflatten(p);
  const auto st = detail::stencil_for(idx[axis], g.extents[axis], mode);
  const std::size_t stride = g.stride(axis);
  const cd s = scale / (12.0 * g.spacing[axis]);
  for (int k = 0; k < 5; ++k) {
    if (st.weights[k] == 0.0) continue;
    const auto q = static_cast<long long>(p) + st.offsets[k] * static_cast<long long>(stride);
    const cd* src = f.at(static_cast<std::size_t>(q)).data() + first;
    const cd w = s * st.weights[k];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * src[c];
  }
}

/// Complex derivatives: d_y = (d1 - i d2)/2, d_ybar = (d1 + i d2)/2, d_z = (d3 + i d4)/2,
/// d_zbar = (d3 - i d4)/2.
enum class Wirtinger { y, ybar, z, zbar };

/// Real-axis weights (d1..d4) of a Wirtinger derivative.
inline std::array<cd, 4> wirtinger_weights(Wirtinger w) {
  switch (w) {
    case Wirtinger::y: return {0.5, -0.5 * kI, 0.0, 0.0};
    case Wirtinger::ybar: return {0.5, 0.5 * kI, 0.0, 0.0};
    case Wirtinger::z: return {0.0, 0.0, 0.5, 0.5 * kI};
    case Wirtinger::zbar: return {0.0, 0.0, 0.5, -0.5 * kI};
  }
  return {};
}

/// out += scale * (sum_mu weights[mu] d_mu f) at p.
inline void accumulate_directional(const GridField& f, std::size_t p, const std::array<cd, 4>& weights, cd scale,
                                   std::span<cd> out, Stencil mode, std::size_t first = 0) {
  for (int mu = 0; mu < 4; ++mu)
    if (weights[mu] != cd{}) accumulate_partial(f, p, mu, scale * weights[mu], out, mode, first);
}

inline void wirtinger_at(const GridField& f, std::size_t p, Wirtinger w, std::span<cd> out, Stencil mode) {
  std::fill(out.begin(), out.end(), cd{});
  accumulate_directional(f, p, wirtinger_weights(w), 1.0, out, mode);
}

inline GridField partial(const GridField& f, int axis, const Exec& exec = {}) {
  GridField out(f.grid(), f.components());
  parallel_for(f.points(), exec, [&](std::size_t p) { accumulate_partial(f, p, axis, 1.0, out.at(p), Stencil::closure); });
  return out;
}

inline GridField wirtinger(const GridField& f, Wirtinger w, const Exec& exec = {}) {
  GridField out(f.grid(), f.components());
  parallel_for(f.points(), exec, [&](std::size_t p) { wirtinger_at(f, p, w, out.at(p), Stencil::closure); });
  return out;
}

/// Fills a field of n x n matrices from fn(index, coords).
template <class Fn>
GridField tabulate_matrices(const SpacetimeGrid& grid, int n, Fn&& fn, const Exec& exec = {}) {
  GridField out(grid, n * n);
  parallel_for(grid.size(), exec, [&](std::size_t p) {
    const Index4 i = grid.unflatten(p);
    out.matrix(p, n) = fn(i, complex_coords(grid.position(i)));
  });
  return out;
}

/// Largest spectral norm over points with margin >= min_margin.
inline double max_norm(const GridField& f, int n, int min_margin = 0) {
  double best = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p)
    if (f.grid().margin(f.grid().unflatten(p)) >= min_margin) best = std::max(best, norm(f.matrix(p, n)));
  return best;
}

}  // namespace twistor
