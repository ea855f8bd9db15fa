// circuitlab: run scenario configs and verification suites.
//
//   circuitlab run <config> [--seed N] [--paths N] [--out DIR] [--svg] [--workers N] [--dry-run]
//   circuitlab verify <suite> | --list
//
// Exit codes: 0 success, 1 verification failure, 2 schema or usage error,
// 3 runtime model error, 4 output error.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "circuitlab/io/run_output.hpp"
#include "circuitlab/io/scenario.hpp"
#include "circuitlab/verify.hpp"

namespace {

using circuitlab::io::Json;

int report(const char* kind, const std::string& message, int code) {
  const Json j{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

template <class F>
int guarded(F&& body) {
  using namespace circuitlab;
  try {
    return body();
  } catch (const io::SchemaError& e) {
    return report("schema", e.what(), 2);
  } catch (const ParameterError& e) {
    return report("parameter", e.what(), 2);
  } catch (const DomainError& e) {
    return report("domain", e.what(), 3);
  } catch (const ConvergenceError& e) {
    return report("convergence", e.what(), 3);
  } catch (const InfeasibleError& e) {
    return report("infeasible", e.what(), 3);
  } catch (const io::OutputError& e) {
    return report("output", e.what(), 4);
  } catch (const std::exception& e) {
    return report("runtime", e.what(), 3);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace circuitlab;
  CLI::App app{"circuitlab: monetary-circuit, banking-network and bank balance-sheet models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, suite;
  std::uint64_t seed = 0, paths = 0;
  std::size_t workers = 0;
  bool svg = false, dry_run = false, list = false;

  auto* run = app.add_subcommand("run", "Run a scenario config");
  run->add_option("config", config_path, "Scenario JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override run.seed");
  auto* paths_opt = run->add_option("--paths", paths, "Override run.paths");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides run.output)");
  run->add_flag("--svg", svg, "Also write SVG plots");
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads, 0 = hardware concurrency");
  run->add_flag("--dry-run", dry_run, "Validate and print the effective config without running");

  auto* verify = app.add_subcommand("verify", "Run a verification suite and print its report");
  verify->add_option("suite", suite, "Suite name, or 'all'");
  verify->add_flag("--list", list, "List suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    return guarded([&] {
      io::Overrides o;
      if (*seed_opt) o.seed = seed;
      if (*paths_opt) o.paths = paths;
      if (*out_opt) o.out = out_dir;
      if (*workers_opt) o.workers = workers;
      o.svg = svg;
      const auto plan = io::plan_scenario(io::load_json_file(config_path), o);
      for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
      if (dry_run) {
        std::cout << plan.effective.dump(2) << "\n";
        return 0;
      }
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = io::execute(plan);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (std::size_t k = plan.warnings.size(); k < result.warnings.size(); ++k)
        std::cerr << "warning: " << result.warnings[k] << "\n";
      const auto m = io::write_run(plan.output, result, wall);
      std::cout << result.model << ": wrote " << m["outputs"].size() + 1 << " files to " << plan.output << " in "
                << format_number(std::round(wall * 1000) / 1000) << " s\n";
      return 0;
    });
  }

  if (list || suite.empty()) {
    for (const auto& s : verify::suites())
      std::cout << s.name << "  (criterion " << s.criterion << ": " << s.title << ")\n";
    std::cout << "all\n";
    return suite.empty() && !list ? 2 : 0;
  }
  return guarded([&] {
    const auto rows = verify::run(suite);
    std::cout << verify::table(rows);
    const bool ok = verify::all_pass(rows);
    std::cout << (ok ? "PASS" : "FAIL") << " " << suite << "\n";
    return ok ? 0 : 1;
  });
}
