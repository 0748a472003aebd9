#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "twistor/matrix.hpp"

namespace twistor {

/// Which side of the unit circle a Laurent field extends holomorphically to.
/// patch1: no negative degrees (holomorphic in |lambda| < inf).
/// patch2: no positive degrees (holomorphic in zeta = 1/lambda).
enum class Holomorphy { none, patch1, patch2 };

/// Truncated Laurent series sum_{|d| <= band} c_d lambda^d with n x n complex coefficients.
/// Coefficients are stored contiguously, column-major per degree.
class LaurentField {
 public:
  LaurentField() = default;
  LaurentField(int n, int band, Holomorphy tag = Holomorphy::none)
      : n_(n), band_(band), tag_(tag), data_(static_cast<std::size_t>(2 * band + 1) * n * n) {}

  static LaurentField constant(const CMatrix& m, int band = 0) {
    LaurentField f(static_cast<int>(m.rows()), band);
    f.coeff(0) = m;
    return f;
  }

  int dim() const noexcept { return n_; }
  int band() const noexcept { return band_; }
  Holomorphy holomorphy() const noexcept { return tag_; }
  void set_holomorphy(Holomorphy tag) noexcept { tag_ = tag; }

  Eigen::Map<CMatrix> coeff(int d) { return {slot(d), n_, n_}; }
  Eigen::Map<const CMatrix> coeff(int d) const { return {slot(d), n_, n_}; }

  /// Coefficient of degree d, zero outside the band.
  CMatrix at(int d) const {
    if (d < -band_ || d > band_) return CMatrix::Zero(n_, n_);
    return coeff(d);
  }

  std::span<cd> raw() noexcept { return data_; }
  std::span<const cd> raw() const noexcept { return data_; }

  /// Largest coefficient norm over degrees in [lo, hi] (clamped to the band).
  double max_coeff_norm(int lo, int hi) const {
    double best = 0.0;
    for (int d = std::max(lo, -band_); d <= std::min(hi, band_); ++d) best = std::max(best, norm(coeff(d)));
    return best;
  }
  double max_coeff_norm() const { return max_coeff_norm(-band_, band_); }

  /// Copy with a new band; coefficients beyond it are dropped and their largest norm is
  /// written to *tail when given.
  LaurentField with_band(int new_band, double* tail = nullptr) const {
    LaurentField out(n_, new_band, tag_);
    double dropped = 0.0;
    for (int d = -band_; d <= band_; ++d) {
      if (d >= -new_band && d <= new_band)
        out.coeff(d) = coeff(d);
      else
        dropped = std::max(dropped, norm(coeff(d)));
    }
    if (tail) *tail = dropped;
    return out;
  }

  LaurentField& operator+=(const LaurentField& o) { return axpy(cd{1.0}, o); }
  LaurentField& operator-=(const LaurentField& o) { return axpy(cd{-1.0}, o); }
  LaurentField& operator*=(cd s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  /// this += s * o, growing the band when o is wider.
  LaurentField& axpy(cd s, const LaurentField& o) {
    if (o.band_ > band_) *this = with_band(o.band_);
    if (n_ == 0) n_ = o.n_;
    for (int d = -o.band_; d <= o.band_; ++d) coeff(d) += s * o.coeff(d);
    if (tag_ != o.tag_) tag_ = Holomorphy::none;
    return *this;
  }

  friend LaurentField operator+(LaurentField a, const LaurentField& b) { return a += b; }
  friend LaurentField operator-(LaurentField a, const LaurentField& b) { return a -= b; }
  friend LaurentField operator*(cd s, LaurentField a) { return a *= s; }
  friend LaurentField operator-(LaurentField a) { return a *= cd{-1.0}; }

 private:
  cd* slot(int d) { return data_.data() + static_cast<std::size_t>(d + band_) * n_ * n_; }
  const cd* slot(int d) const { return data_.data() + static_cast<std::size_t>(d + band_) * n_ * n_; }

  int n_ = 0;
  int band_ = 0;
  Holomorphy tag_ = Holomorphy::none;
  std::vector<cd> data_;
};

/// sum_d c_d lambda^d.
inline CMatrix eval(const LaurentField& f, cd lambda) {
  CMatrix out = CMatrix::Zero(f.dim(), f.dim());
  if (f.band() == 0) return f.coeff(0);
  // Horner from both ends keeps evaluation stable for |lambda| = 1.
  for (int d = f.band(); d >= 0; --d) out = out * lambda + f.coeff(d);
  if (f.band() > 0) {
    const cd inv = 1.0 / lambda;
    CMatrix neg = CMatrix::Zero(f.dim(), f.dim());
    for (int d = -f.band(); d <= -1; ++d) neg = (neg + f.coeff(d)) * inv;
    out += neg;
  }
  return out;
}

/// Equally spaced points lambda_j = exp(2 pi i j / N) on the unit circle.
class Circle {
 public:
  explicit Circle(int samples) : points_(static_cast<std::size_t>(samples)) {
    if (samples < 1) throw Error(ErrorCode::insufficient_sampling, "circle needs at least one sample");
    for (int j = 0; j < samples; ++j)
      points_[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / samples);
  }

  int size() const noexcept { return static_cast<int>(points_.size()); }
  cd point(int j) const { return points_[static_cast<std::size_t>(j)]; }
  /// lambda_j^k for any integer k.
  cd power(int j, int k) const {
    const long long n = size();
    long long idx = (static_cast<long long>(j) * k) % n;
    if (idx < 0) idx += n;
    return points_[static_cast<std::size_t>(idx)];
  }
  /// Widest symmetric band resolvable without aliasing.
  int max_band() const noexcept { return (size() - 1) / 2; }

 private:
  std::vector<cd> points_;
};

/// Values of an n x n matrix function at the N points of a Circle.
class CircleSamples {
 public:
  CircleSamples() = default;
  CircleSamples(int n, int count) : n_(n), count_(count), data_(static_cast<std::size_t>(count) * n * n) {}

  int dim() const noexcept { return n_; }
  int size() const noexcept { return count_; }
  Eigen::Map<CMatrix> at(int j) { return {data_.data() + static_cast<std::size_t>(j) * n_ * n_, n_, n_}; }
  Eigen::Map<const CMatrix> at(int j) const {
    return {data_.data() + static_cast<std::size_t>(j) * n_ * n_, n_, n_};
  }
  std::span<cd> raw() noexcept { return data_; }
  std::span<const cd> raw() const noexcept { return data_; }

  double max_norm() const {
    double best = 0.0;
    for (int j = 0; j < count_; ++j) best = std::max(best, norm(at(j)));
    return best;
  }

 private:
  int n_ = 0;
  int count_ = 0;
  std::vector<cd> data_;
};

template <class Fn>
CircleSamples tabulate(const Circle& circle, int n, Fn&& fn) {
  CircleSamples out(n, circle.size());
  for (int j = 0; j < circle.size(); ++j) out.at(j) = fn(j, circle.point(j));
  return out;
}

inline CircleSamples sample(const LaurentField& f, const Circle& circle) {
  const int n = f.dim();
  CircleSamples out(n, circle.size());
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  auto dst = out.raw();
  for (int d = -f.band(); d <= f.band(); ++d) {
    const cd* c = f.coeff(d).data();
    for (int j = 0; j < circle.size(); ++j) {
      const cd w = circle.power(j, d);
      cd* o = dst.data() + j * nn;
      for (std::size_t k = 0; k < nn; ++k) o[k] += w * c[k];
    }
  }
  return out;
}

/// Discrete Fourier projection onto degrees [-band, band].
inline LaurentField laurent_from_samples(const CircleSamples& s, int band) {
  const int count = s.size();
  if (count < 2 * band + 1)
    throw Error(ErrorCode::insufficient_sampling,
                std::to_string(count) + " samples cannot resolve band " + std::to_string(band));
  const Circle circle(count);
  const int n = s.dim();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  LaurentField out(n, band);
  const double scale = 1.0 / count;
  for (int d = -band; d <= band; ++d) {
    cd* c = out.coeff(d).data();
    for (int j = 0; j < count; ++j) {
      const cd w = circle.power(j, -d) * scale;
      const cd* v = s.raw().data() + j * nn;
      for (std::size_t k = 0; k < nn; ++k) c[k] += w * v[k];
    }
  }
  return out;
}

/// Same projection from explicit (lambda_j, value) pairs; the points must be the
/// N-th roots of unity in order.
inline LaurentField laurent_from_samples(std::span<const std::pair<cd, CMatrix>> samples, int band) {
  const int count = static_cast<int>(samples.size());
  if (count < 2 * band + 1)
    throw Error(ErrorCode::insufficient_sampling,
                std::to_string(count) + " samples cannot resolve band " + std::to_string(band));
  const Circle circle(count);
  const int n = static_cast<int>(samples.front().second.rows());
  CircleSamples s(n, count);
  for (int j = 0; j < count; ++j) {
    if (std::abs(samples[j].first - circle.point(j)) > 1e-12)
      throw Error(ErrorCode::invalid_grid, "sample " + std::to_string(j) + " is not at exp(2 pi i j / N)");
    s.at(j) = samples[j].second;
  }
  return laurent_from_samples(s, band);
}

/// Applies fn pointwise on the circle and projects back to the given band.
template <class Fn>
LaurentField map_pointwise(const Circle& circle, int band, const LaurentField& f, Fn&& fn) {
  const CircleSamples s = sample(f, circle);
  return laurent_from_samples(tabulate(circle, f.dim(), [&](int j, cd) { return fn(CMatrix(s.at(j))); }), band);
}

/// Zeroes the coefficients that violate the given holomorphy and tags the field.
inline LaurentField project(const LaurentField& f, Holomorphy side) {
  LaurentField out = f;
  if (side == Holomorphy::patch1)
    for (int d = -f.band(); d < 0; ++d) out.coeff(d).setZero();
  if (side == Holomorphy::patch2)
    for (int d = 1; d <= f.band(); ++d) out.coeff(d).setZero();
  out.set_holomorphy(side);
  return out;
}

/// Largest coefficient on the wrong side for the given holomorphy.
inline double holomorphy_defect(const LaurentField& f, Holomorphy side) {
  if (side == Holomorphy::patch1) return f.max_coeff_norm(-f.band(), -1);
  if (side == Holomorphy::patch2) return f.max_coeff_norm(1, f.band());
  return 0.0;
}

struct SplitResult {
  LaurentField plus;   // degrees >= 0, holomorphic on patch 1
  LaurentField minus;  // -(degrees < 0), holomorphic on patch 2
};

/// Additive splitting f = plus - minus. The constant term goes to plus.
inline SplitResult cauchy_split(const LaurentField& f) {
  SplitResult r{LaurentField(f.dim(), f.band(), Holomorphy::patch1),
                LaurentField(f.dim(), f.band(), Holomorphy::patch2)};
  for (int d = 0; d <= f.band(); ++d) r.plus.coeff(d) = f.coeff(d);
  for (int d = -f.band(); d < 0; ++d) r.minus.coeff(d) = -f.coeff(d);
  return r;
}

/// (1 / 2 pi i) \oint dlambda / lambda  lambda^m f(lambda): the degree -m coefficient.
inline CMatrix contour_average(const LaurentField& f, int m) { return f.at(-m); }

/// The same integral by the trapezoid rule on the circle.
inline CMatrix contour_average(const LaurentField& f, int m, const Circle& circle) {
  const CircleSamples s = sample(f, circle);
  CMatrix acc = CMatrix::Zero(f.dim(), f.dim());
  for (int j = 0; j < circle.size(); ++j) acc += circle.power(j, m) * s.at(j);
  return acc / static_cast<double>(circle.size());
}

/// Cauchy product truncated to band_out; the largest dropped coefficient goes to *tail.
inline LaurentField multiply(const LaurentField& a, const LaurentField& b, int band_out, double* tail = nullptr) {
  const int full = a.band() + b.band();
  LaurentField prod(a.dim(), full);
  for (int i = -a.band(); i <= a.band(); ++i)
    for (int k = -b.band(); k <= b.band(); ++k) prod.coeff(i + k).noalias() += a.coeff(i) * b.coeff(k);
  return prod.with_band(band_out, tail);
}

}  // namespace twistor
