#include <catch_amalgamated.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twistor/twistor.hpp"

using namespace twistor;
using nlohmann::json;

namespace {

json base(const std::string& patching = R"({"kind": "identity"})") {
  json j = json::parse(R"({"schema": "twistor-forge/1", "n": 2, "grid": {"extent": 5, "spacing": 0.1},
                           "band": 4, "samples": 32})");
  j["patching"] = json::parse(patching);
  return j;
}

ErrorCode parse_error(const json& j) {
  try {
    parse_scenario(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("scenario was accepted");
  return ErrorCode::invalid_scenario;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

double number(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(r.ec == std::errc());
  return v;
}

const std::string kShift = R"({"name": "t", "theta12": {"terms": [{"coeff": [[0, 1], [0, 0]], "p": 1, "r": -1}]}})";

}  // namespace

TEST_CASE("scenario defaults and grid forms", "[scenario]") {
  const Scenario s = parse_scenario(base());
  CHECK(s.n == 2);
  CHECK(s.grid == SpacetimeGrid::centered(5, 0.1));
  CHECK(s.patching.kind == PatchingSpec::Kind::identity);
  CHECK(s.epsilons == std::vector<double>{1e-2, 1e-3});
  CHECK(s.tol.algebraic == 1e-12);
  CHECK(s.tol.slope_min == 1.8);
  CHECK(s.tol.slope_max == 2.2);

  json j = base();
  j["grid"] = json::parse(R"({"extents": [5, 6, 7, 8], "spacing": [0.1, 0.2, 0.1, 0.3], "origin": [1, 2, 3, 4]})");
  const Scenario t = parse_scenario(j);
  CHECK(t.grid.extents == std::array<int, 4>{5, 6, 7, 8});
  CHECK(t.grid.spacing[3] == 0.3);
  CHECK(t.grid.origin[2] == 3.0);
}

TEST_CASE("matrices, complex numbers and polynomials", "[scenario]") {
  json j = base(R"({"kind": "near-identity-exponential", "epsilon": 0.5, "exponent": {"terms": [
      {"coeff": [[1, [0, 2]], [[3, -1], 0]], "p": 1, "q": 0, "r": -1},
      {"coeff": [0.5, 0.25], "q": 2}]}})");
  const Scenario s = parse_scenario(j);
  REQUIRE(s.patching.exponent.terms.size() == 2);
  const CMatrix& m = s.patching.exponent.terms[0].coeff;
  CHECK(m(0, 0) == cd(1, 0));
  CHECK(m(0, 1) == cd(0, 2));
  CHECK(m(1, 0) == cd(3, -1));
  CHECK(m(1, 1) == cd(0, 0));
  CHECK(s.patching.exponent.terms[1].coeff == CMatrix(cd(0.5, 0.25) * identity(2)));
  CHECK(s.patching.exponent.terms[1].q == 2);
  CHECK(s.patching.epsilon == 0.5);
}

TEST_CASE("invalid scenarios", "[scenario][errors]") {
  json j = base();
  j["schema"] = "twistor-forge/0";
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);
  CHECK(parse_error(json::array()) == ErrorCode::invalid_scenario);

  j = base();
  j["samples"] = 8;
  CHECK(parse_error(j) == ErrorCode::insufficient_sampling);

  j = base();
  j["grid"]["extent"] = 4;
  CHECK(parse_error(j) == ErrorCode::invalid_grid);

  CHECK(parse_error(base(R"({"kind": "spiral"})")) == ErrorCode::invalid_scenario);
  CHECK(parse_error(base(R"({"kind": "abelian-exponential", "exponent": {"terms": [{"coeff": [[0, 1], [0, 0]]}]}})")) ==
        ErrorCode::invalid_scenario);
  CHECK(parse_error(base(R"({"kind": "winding", "indices": [1]})")) == ErrorCode::invalid_scenario);
  CHECK(parse_error(base(R"({"kind": "near-identity-exponential", "exponent": {"terms": [{"coeff": [[1, 2, 3]]}]}})")) ==
        ErrorCode::invalid_scenario);
  CHECK(parse_error(base(R"({"kind": "near-identity-exponential", "exponent": {"terms": [{"coeff": 1, "p": -1}]}})")) ==
        ErrorCode::invalid_scenario);

  j = base();
  j["generators"] = json::array({json::parse(kShift), json::parse(kShift)});
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);
  j["generators"] = json::array({json::parse(R"({"name": "a/b"})")});
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);

  j = base();
  j["epsilons"] = {1e-3, 1e-2};
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);
  j = base();
  j["expect"] = json::parse(R"({"sd_complex": {"tolerance": 1}})");
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);
  j = base();
  j["reality"] = "real";
  CHECK(parse_error(j) == ErrorCode::invalid_scenario);

  try {
    load_scenario("/nonexistent/scenario.json");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_scenario);
  }
}

TEST_CASE("random content follows the seed", "[scenario]") {
  json j = base(R"({"kind": "near-identity-exponential", "exponent": {"random": {"terms": 3}}})");
  j["generators"] = json::parse(R"([{"name": "r", "random": {"count": 3, "terms": 2}}])");
  j["seed"] = 42;
  const Scenario a = parse_scenario(j), b = parse_scenario(j);
  const Scenario c = parse_scenario(j, 43);
  REQUIRE(a.generators.size() == 3);
  CHECK(a.generators[0].name == "r0");
  CHECK(a.generators[2].name == "r2");
  CHECK(c.seed == 43);
  const auto same = [](const TwistorPolynomial& x, const TwistorPolynomial& y) {
    if (x.terms.size() != y.terms.size()) return false;
    for (std::size_t k = 0; k < x.terms.size(); ++k)
      if (x.terms[k].coeff != y.terms[k].coeff || x.terms[k].p != y.terms[k].p || x.terms[k].q != y.terms[k].q ||
          x.terms[k].r != y.terms[k].r)
        return false;
    return true;
  };
  CHECK(same(a.patching.exponent, b.patching.exponent));
  CHECK(same(a.generators[1].theta21, b.generators[1].theta21));
  CHECK_FALSE(same(a.patching.exponent, c.patching.exponent));
}

TEST_CASE("CSV layout", "[io]") {
  const SpacetimeGrid g = SpacetimeGrid::centered(5, 0.1);
  PatchField psi1(g, PatchId::patch1, 2, 2), psi2(g, PatchId::patch2, 2, 2);
  psi1.coeff(7, 1)(0, 1) = cd(0.1, -3e-17);
  psi2.coeff(7, -2)(1, 0) = cd(-2.5, 1.0 / 3.0);
  const auto rows1 = read_csv(patch_field_csv(psi1));
  REQUIRE(rows1.size() == 1 + g.size() * 3);
  CHECK(rows1[0].size() == 5 + 8);
  CHECK(rows1[0][4] == "degree");
  CHECK(rows1[0][5] == "m00_re");
  CHECK(rows1[0][12] == "m11_im");
  const auto& r1 = rows1[1 + 7 * 3 + 1];
  const Index4 i = g.unflatten(7);
  CHECK(number(r1[3]) == i[3]);
  CHECK(r1[4] == "1");
  CHECK(number(r1[7]) == 0.1);
  CHECK(number(r1[8]) == -3e-17);

  const auto rows2 = read_csv(patch_field_csv(psi2));
  const auto& r2 = rows2[1 + 7 * 3];
  CHECK(r2[4] == "-2");
  CHECK(number(r2[9]) == -2.5);
  CHECK(number(r2[10]) == 1.0 / 3.0);

  GaugePotential a(g, 2);
  a.at(Component::zbar, 3)(1, 1) = cd(0.0, 7.0);
  const auto rows = read_csv(potential_csv(a));
  REQUIRE(rows.size() == 1 + g.size());
  CHECK(rows[0].size() == 4 + 4 * 8);
  CHECK(rows[0][4] == "A_y_00_re");
  CHECK(rows[0].back() == "A_zbar_11_im");
  CHECK(number(rows[4].back()) == 7.0);
}

TEST_CASE("pipeline on the trivial background", "[pipeline]") {
  json j = base();
  j["generators"] = json::array({json::parse(R"({"name": "zero"})"), json::parse(kShift)});
  const Scenario s = parse_scenario(j);
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "twistor_scenario_test";
  std::filesystem::remove_all(dir);

  const RunResult split = run_split(s, {}, dir.string());
  CHECK(split.pass);
  CHECK(split.report["checks"]["factorization_residual"]["value"] == 0.0);
  CHECK(std::filesystem::exists(dir / "psi1.csv"));

  const RunResult t = run_transform(s, {}, dir.string());
  CHECK(t.pass);
  for (const char* k : {"flatness", "sd_complex", "sd_hodge", "ym", "linearity", "patch_mismatch"})
    CHECK(t.report["checks"][k]["value"] == 0.0);

  const RunResult sym = run_symmetry(s, {}, dir.string());
  CHECK(sym.pass);
  const auto zero = read_csv([&] {
    std::ifstream in(dir / "deltaA_zero.csv");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }());
  for (std::size_t r = 1; r < zero.size(); ++r)
    for (std::size_t c = 4; c < zero[r].size(); ++c) CHECK(number(zero[r][c]) == 0.0);

  // delta A_ybar = T = [[0, 1], [0, 0]]; the other components vanish.
  const auto shift = read_csv([&] {
    std::ifstream in(dir / "deltaA_t.csv");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }());
  const SpacetimeGrid& g = s.grid;
  double worst = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.margin(g.unflatten(p)) < 2) continue;
    const auto& row = shift[1 + p];
    for (std::size_t c = 4; c < row.size(); ++c) {
      const bool entry01_re = (c == 4 + 2 * 8 + 2);  // A_ybar_01_re
      worst = std::max(worst, std::abs(number(row[c]) - (entry01_re ? 1.0 : 0.0)));
    }
  }
  CHECK(worst < 1e-11);
  std::filesystem::remove_all(dir);
}

TEST_CASE("expectations replace the default pass rule", "[pipeline]") {
  std::map<std::string, Expectation> expect;
  expect["a"] = {2.0, 1e-3, std::nullopt};
  expect["b"] = {std::nullopt, 0.0, 0.5};
  CheckList list(expect);
  CHECK(list.add("a", 2.0005, 1e-12));
  CHECK(list.add("b", 0.7, 0.0));
  CHECK(list.pass());
  CHECK_FALSE(list.add("c", 1e-6, 1e-8));
  CHECK_FALSE(list.pass());
  CHECK(list.json()["c"]["tolerance"] == 1e-8);
  CHECK_FALSE(CheckList(expect).add("a", std::nan(""), 1.0));
  CHECK_FALSE(CheckList(expect).range("s", 2.5, 1.8, 2.2));
}

TEST_CASE("reports do not depend on the thread count", "[pipeline]") {
  json j = base(R"({"kind": "near-identity-exponential", "epsilon": 0.1,
                    "exponent": {"random": {"terms": 3, "max_w_degree": 1, "r_min": -1, "r_max": -1}}})");
  j["seed"] = 3;
  j["generators"] = json::parse(R"([{"name": "r", "random": {"count": 2, "terms": 2}}])");
  const Scenario s = parse_scenario(j);
  const std::string one = run_symmetry(s, Exec{1}).report.dump();
  const std::string three = run_symmetry(s, Exec{3}).report.dump();
  CHECK(one == three);
  CHECK(run_symmetry(s, Exec{1}).report.dump() == one);
}

TEST_CASE("winding patching fails at every point", "[pipeline]") {
  const Scenario s = parse_scenario(base(R"({"kind": "winding", "indices": [1, -1], "epsilon": 0.0})"));
  const RunResult r = run_split(s, {});
  CHECK_FALSE(r.pass);
  CHECK(r.report["info"]["failed_fraction"] == 1.0);
  CHECK(r.report["info"]["failures"][0]["error"].get<std::string>().find("jumping") != std::string::npos);
  try {
    run_transform(s, {});
    FAIL("transform ran on a jumping line");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::jumping_line);
  }
}
