#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twistor/io.hpp"
#include "twistor/penrose_ward.hpp"
#include "twistor/riemann_hilbert.hpp"
#include "twistor/scenario.hpp"
#include "twistor/sdym_field.hpp"
#include "twistor/symmetry.hpp"

namespace twistor {

/// Named checks with their tolerances, in insertion order. A scenario expectation replaces the
/// default "value <= tolerance" rule for its check.
class CheckList {
 public:
  explicit CheckList(const std::map<std::string, Expectation>& expect) : expect_(&expect) {}

  bool add(const std::string& name, double value, double tolerance) {
    nlohmann::json e;
    e["value"] = value;
    bool ok;
    if (auto it = expect_->find(name); it != expect_->end()) {
      const Expectation& x = it->second;
      ok = std::isfinite(value);
      if (x.value) {
        ok = ok && std::abs(value - *x.value) <= x.tolerance;
        e["expected"] = *x.value;
        e["tolerance"] = x.tolerance;
      }
      if (x.min) {
        ok = ok && value >= *x.min;
        e["min"] = *x.min;
      }
    } else {
      ok = std::isfinite(value) && value <= tolerance;
      e["tolerance"] = tolerance;
    }
    e["pass"] = ok;
    checks_[name] = e;
    pass_ = pass_ && ok;
    return ok;
  }

  bool range(const std::string& name, double value, double lo, double hi) {
    const bool ok = value >= lo && value <= hi;
    checks_[name] = {{"value", value}, {"min", lo}, {"max", hi}, {"pass", ok}};
    pass_ = pass_ && ok;
    return ok;
  }

  /// A check that is either met or not, with no measured value.
  bool flag(const std::string& name, bool ok, const std::string& note) {
    checks_[name] = {{"pass", ok}, {"note", note}};
    pass_ = pass_ && ok;
    return ok;
  }

  bool pass() const { return pass_; }
  const nlohmann::json& json() const { return checks_; }

 private:
  const std::map<std::string, Expectation>* expect_;
  nlohmann::json checks_ = nlohmann::json::object();
  bool pass_ = true;
};

struct RunResult {
  nlohmann::json report;
  bool pass = false;
};

/// psi1, psi2 on the grid together with the per-point factorization summary.
struct GridFactorization {
  PatchField psi1;
  PatchField psi2;
  double max_residual = 0.0;
  int max_iterations = 0;
  std::vector<Index4> failures;
  std::vector<std::string> messages;  // one per failure
};

/// Factorizes the scenario's patching data at every grid point. Failures (jumping lines,
/// ill-conditioned F) are collected, not thrown.
inline GridFactorization factorize_grid(const Scenario& sc, const PatchingSpec& spec, const Circle& circle,
                                        const Exec& exec) {
  const SpacetimeGrid& g = sc.grid;
  const int n = sc.n, band = circle.max_band();
  GridFactorization out{PatchField(g, PatchId::patch1, n, band), PatchField(g, PatchId::patch2, n, band)};
  std::vector<double> residual(g.size(), 0.0);
  std::vector<int> iterations(g.size(), 0);
  std::vector<std::string> error(g.size());
  BirkhoffOptions opt;
  opt.tol = sc.tol.birkhoff;
  opt.max_iter = sc.tol.max_iter;

  parallel_for(g.size(), exec, [&](std::size_t p) {
    const auto pos = g.position(g.unflatten(p));
    try {
      FactorizationResult r;
      const bool abelian = (spec.kind == PatchingSpec::Kind::abelian_exponential ||
                            spec.kind == PatchingSpec::Kind::explicit_psi);
      if (abelian) {
        LaurentField e = spec.exponent.to_laurent(complex_coords(pos), spec.exponent.band());
        e *= spec.epsilon;
        r = abelian_factorize(e, circle, band);
        if (spec.kind == PatchingSpec::Kind::explicit_psi) {
          const CMatrix gx = spec.gauge_at(pos);
          for (auto* f : {&r.psi.psi1, &r.psi.psi2})
            for (int d = -f->band(); d <= f->band(); ++d) f->coeff(d) = gx * f->coeff(d);
          r.residual = detail::multiply_back_residual(spec.patching(pos, circle), sample(r.psi.psi1, circle),
                                                      sample(r.psi.psi2, circle));
        }
      } else {
        r = birkhoff_factorize(spec.patching(pos, circle), opt);
      }
      residual[p] = r.residual;
      iterations[p] = r.iterations;
      out.psi1.set(p, r.psi.psi1);
      out.psi2.set(p, r.psi.psi2);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::jumping_line && e.code() != ErrorCode::ill_conditioned) throw;
      error[p] = e.what();
    }
  });
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!error[p].empty()) {
      out.failures.push_back(g.unflatten(p));
      out.messages.push_back(error[p]);
      continue;
    }
    out.max_residual = std::max(out.max_residual, residual[p]);
    out.max_iterations = std::max(out.max_iterations, iterations[p]);
  }
  return out;
}

/// Everything downstream of a successful factorization.
struct Background {
  GridFactorization fact;
  Connection01 b;
  ConnectionReport connection;
  double linearity = 0.0;
  GaugePotential a;
  double scale = 1.0;  // max || A || over the grid, at least 1
};

inline double potential_scale(const GaugePotential& a) {
  double s = 1.0;
  for (auto c : kComponents) s = std::max(s, max_norm(a[c], a.dim()));
  return s;
}

/// Factorization, connection and potential. Throws jumping_line listing the failing points.
inline Background build_background(const Scenario& sc, const PatchingSpec& spec, const Circle& circle,
                                   const Exec& exec) {
  Background bg{factorize_grid(sc, spec, circle, exec)};
  if (!bg.fact.failures.empty()) {
    std::string where;
    for (std::size_t k = 0; k < bg.fact.failures.size() && k < 8; ++k) {
      const Index4& i = bg.fact.failures[k];
      where += " (" + std::to_string(i[0]) + "," + std::to_string(i[1]) + "," + std::to_string(i[2]) + "," +
               std::to_string(i[3]) + ")";
    }
    throw Error(ErrorCode::jumping_line, "factorization failed at " + std::to_string(bg.fact.failures.size()) +
                                             " grid points:" + where + (bg.fact.failures.size() > 8 ? " ..." : ""));
  }
  const double inf = std::numeric_limits<double>::infinity();
  bg.b = connection_from_cochain(bg.fact.psi1, bg.fact.psi2, circle, sc.band, inf, exec, &bg.connection);
  bg.a = extract_potential(bg.b, inf, &bg.linearity);
  bg.scale = potential_scale(bg.a);
  return bg;
}

namespace detail {

inline nlohmann::json index_json(const Index4& i) { return {i[0], i[1], i[2], i[3]}; }

inline nlohmann::json scenario_info(const Scenario& sc, const std::string& command) {
  return {{"command", command},
          {"schema", kScenarioSchema},
          {"extents", sc.grid.extents},
          {"spacing", sc.grid.spacing},
          {"origin", sc.grid.origin},
          {"n", sc.n},
          {"band", sc.band},
          {"samples", sc.samples},
          {"reality", sc.reality},
          {"seed", sc.seed},
          {"patching", name(sc.patching.kind)}};
}

inline RunResult finish(const Scenario& sc, const std::string& command, const CheckList& checks,
                        nlohmann::json info) {
  RunResult r;
  r.report["scenario"] = scenario_info(sc, command);
  r.report["checks"] = checks.json();
  r.report["info"] = std::move(info);
  r.pass = checks.pass();
  r.report["pass"] = r.pass;
  return r;
}

inline double tol_or(double v, double fallback) { return v < 0.0 ? fallback : v; }

/// Residual checks of a potential: self-duality in both forms and the Yang-Mills equation.
inline void field_checks(CheckList& checks, nlohmann::json& info, const GaugePotential& a, const Tolerances& t,
                         double scale, const Exec& exec) {
  const double disc = tol_or(t.discretization, discretization_tolerance(a.grid(), scale));
  const double sd_tol = tol_or(t.sd, disc);
  const FieldStrength f = field_strength(a, exec);
  const double sc = sdym_residual_complex(f);
  const double sh = sdym_residual_hodge(f, orientation_sign());
  checks.add("sd_complex", sc, sd_tol);
  checks.add("sd_hodge", sh, sd_tol);
  checks.add("sd_forms_agree", std::max(sh - 4.0 * sc, sc - 4.0 * sh), sd_tol);
  checks.add("ym", ym_residual(a, f, exec), tol_or(t.ym, disc));
  info["orientation_sign"] = orientation_sign();
  info["discretization_tolerance"] = disc;
}

inline void transform_checks(CheckList& checks, nlohmann::json& info, const Scenario& sc, const Background& bg,
                             const Circle& circle, const Exec& exec) {
  const double disc = tol_or(sc.tol.discretization, discretization_tolerance(sc.grid, bg.scale));
  checks.add("factorization_residual", bg.fact.max_residual, sc.tol.residual);
  checks.add("patch_mismatch", bg.connection.patch_mismatch, disc);
  checks.add("flatness", flatness_residual(bg.b, circle, exec), disc);
  checks.add("linearity", bg.linearity, sc.tol.linearity * bg.scale);
  field_checks(checks, info, bg.a, sc.tol, bg.scale, exec);
  if (sc.reality == "unitary") checks.add("anti_hermiticity", anti_hermiticity_defect(bg.a), disc);
  info["field_scale"] = bg.scale;
  info["max_iterations"] = bg.fact.max_iterations;
  info["psi_holomorphy_defect"] = bg.connection.psi_holomorphy_defect;
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::invalid_scenario, "cannot create output directory " + dir + ": " + ec.message());
  return p;
}

inline GaugePotential combine(const GaugePotential& a, const GaugePotential& b, cd s) {
  GaugePotential out = a;
  for (auto c : kComponents)
    for (std::size_t p = 0; p < a.points(); ++p) out.at(c, p) += s * b.at(c, p);
  return out;
}

}  // namespace detail

/// Factorization summary; psi1.csv and psi2.csv are written when `out_dir` is non-empty.
inline RunResult run_split(const Scenario& sc, const Exec& exec, const std::string& out_dir = "") {
  const Circle circle(sc.samples);
  const GridFactorization fact = factorize_grid(sc, sc.patching, circle, exec);
  CheckList checks(sc.expect);
  nlohmann::json info;
  const double total = static_cast<double>(sc.grid.size());
  checks.add("factorization_residual", fact.max_residual, sc.tol.residual);
  checks.add("failed_points", static_cast<double>(fact.failures.size()), 0.0);
  info["max_iterations"] = fact.max_iterations;
  info["failed_fraction"] = static_cast<double>(fact.failures.size()) / total;
  nlohmann::json fails = nlohmann::json::array();
  for (std::size_t k = 0; k < fact.failures.size(); ++k)
    fails.push_back({{"index", detail::index_json(fact.failures[k])}, {"error", fact.messages[k]}});
  info["failures"] = fails;
  RunResult r = detail::finish(sc, "split", checks, info);
  // Any failing twistor line fails the run, whatever the scenario expects.
  if (!fact.failures.empty()) r.report["pass"] = r.pass = false;
  if (!out_dir.empty() && fact.failures.empty()) {
    const auto dir = detail::prepare_dir(out_dir);
    write_patch_field_csv(dir / "psi1.csv", fact.psi1);
    write_patch_field_csv(dir / "psi2.csv", fact.psi2);
  }
  return r;
}

inline RunResult run_transform(const Scenario& sc, const Exec& exec, const std::string& out_dir = "") {
  const Circle circle(sc.samples);
  const Background bg = build_background(sc, sc.patching, circle, exec);
  CheckList checks(sc.expect);
  nlohmann::json info;
  detail::transform_checks(checks, info, sc, bg, circle, exec);
  if (!out_dir.empty()) {
    const auto dir = detail::prepare_dir(out_dir);
    write_patch_field_csv(dir / "psi1.csv", bg.fact.psi1);
    write_patch_field_csv(dir / "psi2.csv", bg.fact.psi2);
    write_potential_csv(dir / "A.csv", bg.a);
  }
  return detail::finish(sc, "transform", checks, info);
}

/// Residual checks on the scenario's explicit potential, or on the transformed one.
inline RunResult run_check(const Scenario& sc, const Exec& exec, const std::string& out_dir = "") {
  CheckList checks(sc.expect);
  nlohmann::json info;
  GaugePotential a;
  if (sc.potential) {
    const auto& pot = *sc.potential;
    a = tabulate_potential(sc.grid, sc.n,
                           [&](Component c, const ComplexCoords& x) { return pot[static_cast<int>(c)](x); }, exec);
    const double scale = potential_scale(a);
    detail::field_checks(checks, info, a, sc.tol, scale, exec);
    if (sc.reality == "unitary")
      checks.add("anti_hermiticity", anti_hermiticity_defect(a),
                 detail::tol_or(sc.tol.discretization, discretization_tolerance(sc.grid, scale)));
    info["field_scale"] = scale;
    info["source"] = "potential";
  } else {
    const Circle circle(sc.samples);
    const Background bg = build_background(sc, sc.patching, circle, exec);
    detail::transform_checks(checks, info, sc, bg, circle, exec);
    a = bg.a;
    info["source"] = "patching";
  }
  if (!out_dir.empty()) write_potential_csv(detail::prepare_dir(out_dir) / "A.csv", a);
  return detail::finish(sc, "check", checks, info);
}

inline RunResult run_symmetry(const Scenario& sc, const Exec& exec, const std::string& out_dir = "") {
  const Circle circle(sc.samples);
  const Background bg = build_background(sc, sc.patching, circle, exec);
  CheckList checks(sc.expect);
  nlohmann::json info;
  const double disc = detail::tol_or(sc.tol.discretization, discretization_tolerance(sc.grid, bg.scale));
  const auto patching = [&](std::size_t p) { return sc.patching.patching(sc.grid.position(sc.grid.unflatten(p)), circle); };
  const double sd0 = sdym_residual_complex(field_strength(bg.a, exec));
  const double e1 = sc.epsilons[0], e2 = sc.epsilons[1];
  info["background_sd_complex"] = sd0;
  if (sc.generators.empty()) checks.flag("generators", false, "scenario lists no generators");

  std::filesystem::path dir;
  if (!out_dir.empty()) dir = detail::prepare_dir(out_dir);

  const auto delta_a = [&](const SymmetryGenerator& gen, SymmetryDiagnostics* diag, Connection01* db,
                           SplitField* split) {
    SplitField s = split_on_grid(gen, bg.fact.psi1, bg.fact.psi2, patching, circle, sc.band, sc.tol.residual, exec, diag);
    Connection01 d = act_on_connection(bg.b, s, exec);
    GaugePotential da = act_on_potential(d);
    if (db) *db = std::move(d);
    if (split) *split = std::move(s);
    return da;
  };

  std::vector<GaugePotential> deltas;
  for (const auto& gen : sc.generators) {
    SymmetryDiagnostics diag;
    Connection01 db;
    SplitField split;
    const GaugePotential da = delta_a(gen, &diag, &db, &split);
    const std::string k = gen.name + ".";
    checks.add(k + "antisymmetry", diag.antisymmetry, sc.tol.algebraic * bg.scale);
    checks.add(k + "form_agreement", diag.form_agreement, sc.tol.consistency * bg.scale);
    checks.add(k + "reassembly", diag.reassembly, sc.tol.algebraic);
    checks.add(k + "psi_consistency", diag.psi_consistency, sc.tol.consistency * bg.scale);
    checks.add(k + "patch_consistency", patch_mismatch(db), disc);
    const double r1 = sdym_residual_complex(field_strength(detail::combine(bg.a, da, e1), exec));
    const double r2 = sdym_residual_complex(field_strength(detail::combine(bg.a, da, e2), exec));
    nlohmann::json gi = {{"residual_eps1", r1}, {"residual_eps2", r2}, {"truncation_tail", diag.truncation_tail},
                         {"delta_scale", potential_scale(da)}};
    // Below the noise floor the perturbation is tangent to second order as well and no slope exists.
    const double floor = std::max(100.0 * sd0, 1e-11);
    if (r2 <= floor) {
      checks.flag(k + "tangency_slope", true, "residual below noise floor; no measurable slope");
    } else {
      const double slope = std::log(r1 / r2) / std::log(e1 / e2);
      checks.range(k + "tangency_slope", slope, sc.tol.slope_min, sc.tol.slope_max);
      gi["tangency_slope"] = slope;
    }
    info["generators"][gen.name] = gi;
    if (!dir.empty()) write_potential_csv(dir / ("deltaA_" + gen.name + ".csv"), da);
    deltas.push_back(da);
  }

  if (sc.generators.size() >= 2) {
    // theta -> delta A is linear: the sum of the first two generators acts as the sum.
    const auto& g0 = sc.generators[0];
    const auto& g1 = sc.generators[1];
    SymmetryGenerator sum{"sum", g0.theta12, g0.theta21};
    for (const auto& t : g1.theta12.terms) sum.theta12.terms.push_back(t);
    for (const auto& t : g1.theta21.terms) sum.theta21.terms.push_back(t);
    const GaugePotential ds = delta_a(sum, nullptr, nullptr, nullptr);
    const double scale = std::max(potential_scale(deltas[0]), potential_scale(deltas[1]));
    checks.add("superposition", ds.distance(detail::combine(deltas[0], deltas[1], 1.0)),
               sc.tol.consistency * scale * bg.scale);
  }
  return detail::finish(sc, "symmetry", checks, info);
}

inline RunResult run_roundtrip(const Scenario& sc, const Exec& exec, const std::string& out_dir = "") {
  const Circle circle(sc.samples);
  const Background bg = build_background(sc, sc.patching, circle, exec);
  CheckList checks(sc.expect);
  nlohmann::json info;
  const SpacetimeGrid& g = sc.grid;

  // A -> B -> A is exact.
  checks.add("reconstruct_extract", extract_potential(reconstruct_connection(bg.a), sc.tol.linearity).distance(bg.a),
             sc.tol.algebraic * bg.scale);

  // F12 = psi1^-1 psi2, factorized afresh.
  const int band = circle.max_band();
  GridFactorization ff{PatchField(g, PatchId::patch1, sc.n, band), PatchField(g, PatchId::patch2, sc.n, band)};
  std::vector<double> residual(g.size(), 0.0);
  std::vector<int> iterations(g.size(), 0);
  BirkhoffOptions opt;
  opt.tol = sc.tol.birkhoff;
  opt.max_iter = sc.tol.max_iter;
  parallel_for(g.size(), exec, [&](std::size_t p) {
    const CircleSamples s1 = sample(bg.fact.psi1.at(p), circle), s2 = sample(bg.fact.psi2.at(p), circle);
    const CircleSamples f = pointwise(s1, [&](int j) { return CMatrix(mat_inv(s1.at(j)) * s2.at(j)); });
    const FactorizationResult r = birkhoff_factorize(f, opt);
    residual[p] = r.residual;
    iterations[p] = r.iterations;
    ff.psi1.set(p, r.psi.psi1);
    ff.psi2.set(p, r.psi.psi2);
  });
  for (std::size_t p = 0; p < g.size(); ++p) {
    ff.max_residual = std::max(ff.max_residual, residual[p]);
    ff.max_iterations = std::max(ff.max_iterations, iterations[p]);
  }
  const double inf = std::numeric_limits<double>::infinity();
  const Connection01 b2 = connection_from_cochain(ff.psi1, ff.psi2, circle, sc.band, inf, exec);
  const GaugePotential a2 = extract_potential(b2, inf);
  const GaugeSignature s1 = gauge_invariant_signature(field_strength(bg.a, exec), exec);
  checks.add("refactorization_residual", ff.max_residual, sc.tol.residual);
  checks.add("signature_discrepancy",
             signature_discrepancy(s1, gauge_invariant_signature(field_strength(a2, exec), exec), g),
             sc.tol.signature);
  info["refactorization_iterations"] = ff.max_iterations;

  if (sc.compare_with) {
    const Background other = build_background(sc, *sc.compare_with, circle, exec);
    checks.add("cross_signature_discrepancy",
               signature_discrepancy(s1, gauge_invariant_signature(field_strength(other.a, exec), exec), g),
               sc.tol.signature);
    info["compare_with"] = name(sc.compare_with->kind);
  }
  if (!out_dir.empty()) write_potential_csv(detail::prepare_dir(out_dir) / "A.csv", a2);
  return detail::finish(sc, "roundtrip", checks, info);
}

}  // namespace twistor
