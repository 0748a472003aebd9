#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "twistor/twistor.hpp"

namespace {

// 0: every check passed, 1: a check failed, 2: bad invocation or scenario, 3: the pipeline stopped.
constexpr int kFailedChecks = 1;
constexpr int kBadInput = 2;
constexpr int kPipelineError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twistor construction of self-dual Yang-Mills fields on a lattice"};
  std::string command, scenario_path, out;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("command", command, "split | transform | check | symmetry | roundtrip")
      ->required()
      ->check(CLI::IsMember({"split", "transform", "check", "symmetry", "roundtrip"}));
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
  app.add_option("--out", out, "output directory (overrides the scenario's output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the scenario's seed)");
  app.add_option("--threads", threads, "worker threads (overrides TWISTOR_FORGE_THREADS)")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadInput;
  }

  using namespace twistor;
  Scenario sc;
  try {
    sc = load_scenario(scenario_path, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt);
  } catch (const Error& e) {
    std::cerr << "twistor-forge: " << e.what() << "\n";
    return kBadInput;
  }
  const std::string dir = out.empty() ? sc.output_dir : out;
  const Exec exec{resolve_threads(threads)};

  RunResult r;
  try {
    if (command == "split") r = run_split(sc, exec, dir);
    else if (command == "transform") r = run_transform(sc, exec, dir);
    else if (command == "check") r = run_check(sc, exec, dir);
    else if (command == "symmetry") r = run_symmetry(sc, exec, dir);
    else r = run_roundtrip(sc, exec, dir);
  } catch (const Error& e) {
    r.report["scenario"] = detail::scenario_info(sc, command);
    r.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    r.report["pass"] = false;
    std::cerr << "twistor-forge: " << e.what() << "\n";
    if (!dir.empty()) {
      std::filesystem::create_directories(dir);
      std::ofstream(std::filesystem::path(dir) / "report.json") << r.report.dump(2) << "\n";
    }
    std::cout << r.report.dump(2) << "\n";
    return kPipelineError;
  }

  const std::string text = r.report.dump(2);
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / "report.json") << text << "\n";
  }
  std::cout << text << "\n";
  return r.pass ? 0 : kFailedChecks;
}
