#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>

#include "twistor/penrose_ward.hpp"
#include "twistor/twistor_cover.hpp"

namespace twistor {

namespace detail {

/// Shortest decimal that round-trips, so identical doubles always print identically.
inline void put_number(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

inline void put_matrix(std::string& out, const Eigen::Ref<const CMatrix>& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      out += ',';
      put_number(out, m(r, c).real());
      out += ',';
      put_number(out, m(r, c).imag());
    }
}

inline void put_matrix_header(std::string& out, const std::string& prefix, int n) {
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const std::string e = prefix + std::to_string(r) + std::to_string(c);
      out += "," + e + "_re," + e + "_im";
    }
}

inline void put_index(std::string& out, const Index4& i) {
  for (int mu = 0; mu < 4; ++mu) {
    if (mu) out += ',';
    out += std::to_string(i[mu]);
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::invalid_scenario, "cannot write " + path.string());
  f << text;
}

}  // namespace detail

/// One row per grid point and lambda degree on the field's holomorphic side:
/// i1,i2,i3,i4,degree, then re/im of each matrix entry in row-major order.
inline std::string patch_field_csv(const PatchField& f) {
  const int n = f.dim();
  std::string out = "i1,i2,i3,i4,degree";
  detail::put_matrix_header(out, "m", n);
  out += '\n';
  const int lo = f.patch() == PatchId::patch1 ? 0 : -f.band();
  const int hi = f.patch() == PatchId::patch1 ? f.band() : 0;
  for (std::size_t p = 0; p < f.points(); ++p) {
    const Index4 i = f.grid().unflatten(p);
    for (int d = lo; d <= hi; ++d) {
      detail::put_index(out, i);
      out += ',' + std::to_string(d);
      detail::put_matrix(out, f.coeff(p, d));
      out += '\n';
    }
  }
  return out;
}

/// One row per grid point: i1..i4, then the y, z, ybar, zbar components (re/im, row-major).
inline std::string potential_csv(const GaugePotential& a) {
  const int n = a.dim();
  std::string out = "i1,i2,i3,i4";
  for (auto c : kComponents) detail::put_matrix_header(out, std::string("A_") + name(c) + "_", n);
  out += '\n';
  for (std::size_t p = 0; p < a.points(); ++p) {
    detail::put_index(out, a.grid().unflatten(p));
    for (auto c : kComponents) detail::put_matrix(out, a.at(c, p));
    out += '\n';
  }
  return out;
}

inline void write_patch_field_csv(const std::filesystem::path& path, const PatchField& f) {
  detail::write_text(path, patch_field_csv(f));
}

inline void write_potential_csv(const std::filesystem::path& path, const GaugePotential& a) {
  detail::write_text(path, potential_csv(a));
}

}  // namespace twistor
