#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twistor/grid.hpp"
#include "twistor/polynomial.hpp"
#include "twistor/symmetry.hpp"

namespace twistor {

inline constexpr const char* kScenarioSchema = "twistor-forge/1";

/// Where the patching matrix F12 comes from.
struct PatchingSpec {
  enum class Kind {
    identity,                   // F12 = 1
    abelian_exponential,        // F12 = exp(eps f), f a diagonal twistor polynomial
    near_identity_exponential,  // F12 = exp(eps X), X a matrix twistor polynomial
    explicit_psi,               // psi_i = g(x) exp(-phi_i) with f = phi1 - phi2 diagonal
    winding,                    // F12 = diag(lambda^k_1, ..., lambda^k_n) exp(eps X)
  };

  Kind kind = Kind::identity;
  TwistorPolynomial exponent;
  double epsilon = 1.0;
  std::array<CMatrix, 5> gauge;  // g = exp(Omega0 + x^mu Omega_mu)
  std::vector<int> winding;

  /// exp(Omega0 + x^mu Omega_mu) at x.
  CMatrix gauge_at(const std::array<double, 4>& x) const {
    CMatrix w = gauge[0];
    for (int mu = 0; mu < 4; ++mu) w += x[mu] * gauge[mu + 1];
    return mat_exp(w);
  }

  /// F12 on the circle at spacetime point x.
  CircleSamples patching(const std::array<double, 4>& pos, const Circle& circle) const {
    const ComplexCoords x = complex_coords(pos);
    const int n = exponent.n;
    return tabulate(circle, n, [&](int j, cd lambda) -> CMatrix {
      switch (kind) {
        case Kind::identity: return identity(n);
        case Kind::winding: {
          CMatrix d = CMatrix::Zero(n, n);
          for (int i = 0; i < n; ++i) d(i, i) = circle.power(j, winding[i]);
          return d * mat_exp(epsilon * exponent(x, lambda));
        }
        default: return mat_exp(epsilon * exponent(x, lambda));
      }
    });
  }
};

inline const char* name(PatchingSpec::Kind k) {
  switch (k) {
    case PatchingSpec::Kind::identity: return "identity";
    case PatchingSpec::Kind::abelian_exponential: return "abelian-exponential";
    case PatchingSpec::Kind::near_identity_exponential: return "near-identity-exponential";
    case PatchingSpec::Kind::explicit_psi: return "explicit-psi";
    case PatchingSpec::Kind::winding: return "winding";
  }
  return "?";
}

struct Tolerances {
  double algebraic = 1e-12;
  double birkhoff = 1e-12;  // stopping size of log(psi1 F psi2^-1)
  int max_iter = 30;
  double residual = 1e-10;  // multiply-back residual of a factorization
  double linearity = 1e-8;  // relative
  double consistency = 1e-10;
  double signature = 1e-8;
  double discretization = -1.0;  // < 0: 100 h^4 times the field scale
  double sd = -1.0;              // < 0: the discretization tolerance
  double ym = -1.0;              // < 0: the discretization tolerance
  double slope_min = 1.8;
  double slope_max = 2.2;
};

/// Overrides the default pass rule of a named check: either |value - target| <= tolerance, or
/// value >= min.
struct Expectation {
  std::optional<double> value;
  double tolerance = 0.0;
  std::optional<double> min;
};

struct Scenario {
  SpacetimeGrid grid;
  int n = 2;
  int band = 8;
  int samples = 64;
  std::string reality = "complex";
  std::uint64_t seed = 1;
  PatchingSpec patching;
  std::optional<PatchingSpec> compare_with;
  std::vector<SymmetryGenerator> generators;
  std::optional<std::array<SpacetimePolynomial, 4>> potential;  // (y, z, ybar, zbar)
  std::vector<double> epsilons{1e-2, 1e-3};
  Tolerances tol;
  std::map<std::string, Expectation> expect;
  std::string output_dir;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void bad(const std::string& what) { throw Error(ErrorCode::invalid_scenario, what); }

inline cd complex_value(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  bad("expected a number or [re, im], got " + j.dump());
}

/// A scalar (times the identity), [re, im] (times the identity) or a row-major array of rows.
inline CMatrix matrix_value(const json& j, int n) {
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number()))
    return complex_value(j) * identity(n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) bad("expected an " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  CMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) bad("matrix row " + std::to_string(r) + " has the wrong length");
    for (int c = 0; c < n; ++c) m(r, c) = complex_value(j[r][c]);
  }
  return m;
}

inline RandomPolynomialSpec random_spec(const json& j) {
  RandomPolynomialSpec s;
  s.terms = j.value("terms", s.terms);
  s.max_w_degree = j.value("max_w_degree", s.max_w_degree);
  s.r_min = j.value("r_min", s.r_min);
  s.r_max = j.value("r_max", s.r_max);
  s.scale = j.value("scale", s.scale);
  if (s.terms < 0 || s.max_w_degree < 0 || s.r_min > s.r_max) bad("invalid random polynomial spec " + j.dump());
  return s;
}

inline TwistorPolynomial twistor_polynomial(const json& j, int n, Rng& rng) {
  if (j.contains("random")) return random_twistor_polynomial(rng, n, random_spec(j["random"]));
  TwistorPolynomial f(n);
  if (!j.contains("terms")) return f;
  for (const auto& t : j["terms"]) {
    const int p = t.value("p", 0), q = t.value("q", 0), r = t.value("r", 0);
    if (p < 0 || q < 0) bad("twistor polynomial exponents p, q must be non-negative");
    f.add(matrix_value(t.at("coeff"), n), p, q, r);
  }
  return f;
}

inline SpacetimePolynomial spacetime_polynomial(const json& j, int n) {
  SpacetimePolynomial f{n, {}};
  if (!j.contains("terms")) return f;
  for (const auto& t : j["terms"])
    f.terms.push_back({matrix_value(t.at("coeff"), n),
                       {t.value("y", 0), t.value("z", 0), t.value("ybar", 0), t.value("zbar", 0)}});
  return f;
}

inline PatchingSpec patching_spec(const json& j, int n, Rng& rng) {
  PatchingSpec s;
  const std::string kind = j.value("kind", "identity");
  s.exponent = TwistorPolynomial(n);
  s.epsilon = j.value("epsilon", 1.0);
  for (auto& m : s.gauge) m = CMatrix::Zero(n, n);
  if (kind == "identity") {
    s.kind = PatchingSpec::Kind::identity;
    return s;
  }
  if (j.contains("exponent")) s.exponent = twistor_polynomial(j["exponent"], n, rng);
  if (kind == "abelian-exponential") {
    s.kind = PatchingSpec::Kind::abelian_exponential;
    if (!s.exponent.is_diagonal()) bad("abelian-exponential needs a diagonal exponent");
  } else if (kind == "near-identity-exponential") {
    s.kind = PatchingSpec::Kind::near_identity_exponential;
  } else if (kind == "explicit-psi") {
    s.kind = PatchingSpec::Kind::explicit_psi;
    if (!s.exponent.is_diagonal()) bad("explicit-psi needs a diagonal exponent");
    if (j.contains("gauge")) {
      const auto& g = j["gauge"];
      if (g.contains("omega")) {
        const auto& om = g["omega"];
        if (!om.is_array() || om.size() != 5) bad("gauge.omega needs five matrices (Omega0 .. Omega4)");
        for (int k = 0; k < 5; ++k) s.gauge[k] = matrix_value(om[k], n);
      } else if (g.contains("random")) {
        const double scale = g["random"].value("scale", 0.1);
        for (auto& m : s.gauge) m = rng.anti_hermitian(n, scale);
      }
    }
  } else if (kind == "winding") {
    s.kind = PatchingSpec::Kind::winding;
    s.winding = j.value("indices", std::vector<int>{});
    if (static_cast<int>(s.winding.size()) != n) bad("winding.indices needs one integer per matrix row");
  } else {
    bad("unknown patching kind '" + kind + "'");
  }
  return s;
}

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

}  // namespace detail

/// Parses a scenario document. `seed_override` (when set) replaces the scenario's seed.
inline Scenario parse_scenario(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {}) {
  using detail::bad;
  if (!j.is_object()) bad("scenario must be a JSON object");
  if (j.value("schema", "") != kScenarioSchema)
    bad(std::string("schema must be \"") + kScenarioSchema + "\", got \"" + j.value("schema", "") + "\"");
  Scenario s;
  try {
    s.n = j.value("n", 2);
    s.band = j.value("band", 8);
    s.samples = j.value("samples", 64);
    s.reality = j.value("reality", "complex");
    s.seed = seed_override ? *seed_override : j.value("seed", std::uint64_t{1});
    if (s.n < 1) bad("n must be positive");
    if (s.band < 0) bad("band must be non-negative");
    if (s.samples < 2 * s.band + 1)
      throw Error(ErrorCode::insufficient_sampling, std::to_string(s.samples) + " samples cannot resolve band " +
                                                        std::to_string(s.band));
    if (s.reality != "complex" && s.reality != "unitary") bad("reality must be \"complex\" or \"unitary\"");

    const auto& g = j.at("grid");
    if (g.contains("extent")) {
      s.grid = SpacetimeGrid::centered(g["extent"].get<int>(), g.value("spacing", 0.1));
    } else {
      s.grid.extents = g.at("extents").get<std::array<int, 4>>();
      if (g.at("spacing").is_number())
        s.grid.spacing.fill(g["spacing"].get<double>());
      else
        s.grid.spacing = g["spacing"].get<std::array<double, 4>>();
      if (g.value("centered", false)) {
        for (int mu = 0; mu < 4; ++mu) s.grid.origin[mu] = -0.5 * (s.grid.extents[mu] - 1) * s.grid.spacing[mu];
      } else if (g.contains("origin")) {
        s.grid.origin = g["origin"].get<std::array<double, 4>>();
      }
      s.grid.validate();
    }

    Rng rng(s.seed);
    s.patching = detail::patching_spec(j.value("patching", nlohmann::json::object()), s.n, rng);
    if (j.contains("compare_with")) s.compare_with = detail::patching_spec(j["compare_with"], s.n, rng);

    if (j.contains("generators")) {
      for (const auto& gj : j["generators"]) {
        if (gj.contains("random")) {
          const auto& r = gj["random"];
          const int count = r.value("count", 1);
          const auto spec = detail::random_spec(r);
          const std::string prefix = gj.value("name", "random");
          for (int k = 0; k < count; ++k) {
            SymmetryGenerator gen{prefix + std::to_string(k), random_twistor_polynomial(rng, s.n, spec),
                                  random_twistor_polynomial(rng, s.n, spec)};
            s.generators.push_back(std::move(gen));
          }
        } else {
          SymmetryGenerator gen;
          gen.name = gj.value("name", "g" + std::to_string(s.generators.size()));
          gen.theta12 = detail::twistor_polynomial(gj.value("theta12", nlohmann::json::object()), s.n, rng);
          gen.theta21 = detail::twistor_polynomial(gj.value("theta21", nlohmann::json::object()), s.n, rng);
          s.generators.push_back(std::move(gen));
        }
      }
    }
    for (const auto& gen : s.generators) {
      if (gen.name.empty() || gen.name.find_first_of("/\\ ") != std::string::npos)
        bad("generator name '" + gen.name + "' is not usable in a file name");
      if (std::count_if(s.generators.begin(), s.generators.end(), [&](const auto& o) { return o.name == gen.name; }) > 1)
        bad("duplicate generator name '" + gen.name + "'");
    }

    if (j.contains("potential")) {
      const auto& pj = j["potential"];
      std::array<SpacetimePolynomial, 4> pot;
      const char* keys[4] = {"y", "z", "ybar", "zbar"};
      for (int k = 0; k < 4; ++k)
        pot[k] = detail::spacetime_polynomial(pj.value(keys[k], nlohmann::json::object()), s.n);
      s.potential = pot;
    }

    if (j.contains("epsilons")) s.epsilons = j["epsilons"].get<std::vector<double>>();
    if (s.epsilons.size() != 2 || !(s.epsilons[0] > s.epsilons[1]) || !(s.epsilons[1] > 0.0))
      bad("epsilons must be two decreasing positive numbers");

    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      Tolerances& o = s.tol;
      o.algebraic = detail::number_or(t, "algebraic", o.algebraic);
      o.birkhoff = detail::number_or(t, "birkhoff", o.birkhoff);
      o.max_iter = t.value("max_iter", o.max_iter);
      o.residual = detail::number_or(t, "residual", o.residual);
      o.linearity = detail::number_or(t, "linearity", o.linearity);
      o.consistency = detail::number_or(t, "consistency", o.consistency);
      o.signature = detail::number_or(t, "signature", o.signature);
      o.discretization = detail::number_or(t, "discretization", o.discretization);
      o.sd = detail::number_or(t, "sd", o.sd);
      o.ym = detail::number_or(t, "ym", o.ym);
      o.slope_min = detail::number_or(t, "slope_min", o.slope_min);
      o.slope_max = detail::number_or(t, "slope_max", o.slope_max);
    }

    if (j.contains("expect")) {
      for (const auto& [key, e] : j["expect"].items()) {
        Expectation x;
        if (e.contains("value")) x.value = e["value"].get<double>();
        x.tolerance = e.value("tolerance", 0.0);
        if (e.contains("min")) x.min = e["min"].get<double>();
        if (!x.value && !x.min) bad("expectation '" + key + "' needs 'value' or 'min'");
        s.expect[key] = x;
      }
    }
    if (j.contains("output")) s.output_dir = j["output"].value("dir", "");
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_scenario, "cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_scenario, path + ": " + e.what());
  }
  return parse_scenario(j, seed_override);
}

}  // namespace twistor
