#pragma once

// Reference computations that do not go through the library code under test.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline cd root_of_unity(int j, int count) {
  return std::polar(1.0, 2.0 * std::numbers::pi * j / count);
}

/// (1/N) sum_j f(lambda_j) lambda_j^-d, evaluated term by term.
inline Mat dft_coefficient(const std::function<Mat(cd)>& f, int count, int d) {
  Mat acc;
  for (int j = 0; j < count; ++j) {
    const cd l = root_of_unity(j, count);
    const Mat v = f(l) * std::pow(l, -d);
    acc = j == 0 ? v : Mat(acc + v);
  }
  return acc / static_cast<double>(count);
}

/// Trapezoid rule for (1 / 2 pi i) contour integral of dlambda / lambda * lambda^m f(lambda).
inline Mat contour(const std::function<Mat(cd)>& f, int count, int m) { return dft_coefficient(f, count, -m); }

/// Matrix exponential and logarithm from Eigen's MatrixFunctions module.
inline Mat expm(const Mat& x) { return x.exp(); }
inline Mat logm(const Mat& x) { return x.log(); }

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

/// Spectral norm through the singular values.
inline double spectral(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Complex coordinates of a real point, straight from their definition.
struct Coords {
  cd y, z, ybar, zbar;
};
inline Coords coords(double x1, double x2, double x3, double x4) {
  return {cd(x1, x2), cd(x3, -x4), cd(x1, -x2), cd(x3, x4)};
}

}  // namespace oracle
