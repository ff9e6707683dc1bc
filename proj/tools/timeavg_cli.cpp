// timeavg command-line front end.
//
//   timeavg run <config.json> --out <dir>
//   timeavg compare <a.csv> <b.csv> --cutoff <rad/time> [--column re_rho_1_2]
//   timeavg derive --order K <config.json>
//   timeavg validate <config.json>
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include "timeavg/timeavg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

template <class Fn>
int guarded(Fn &&fn) {
  try {
    fn();
    return kOk;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Time-averaged density matrix dynamics for harmonic Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto *run = app.add_subcommand("run", "Propagate exact and effective dynamics and write CSV plus a report");
  run->add_option("config", config_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  std::string csv_a, csv_b, column = "re_rho_1_2";
  double cutoff = 0.0;
  auto *compare = app.add_subcommand("compare", "Compare two trajectory CSV files after low-pass filtering");
  compare->add_option("a", csv_a, "reference trajectory")->required();
  compare->add_option("b", csv_b, "trajectory to compare")->required();
  compare->add_option("--cutoff", cutoff, "low-pass cutoff (rad per unit time)")->required();
  compare->add_option("--column", column, "column to compare");

  int order = 2;
  auto *derive = app.add_subcommand("derive", "Print generators L_k and effective Hamiltonians as JSON");
  derive->add_option("--order", order, "expansion order (0..3)")->required();
  derive->add_option("config", config_path, "scenario JSON")->required();

  auto *validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("config", config_path, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  using namespace timeavg;

  if (*run) {
    return guarded([&] {
      const ScenarioConfig cfg = load_scenario(config_path);
      std::filesystem::create_directories(out_dir);
      const ScenarioReport report = run_scenario_to(cfg, out_dir);
      if (!report.validity_condition_met)
        std::cerr << "warning: validity ratio " << report.validity_ratio << " >= 1\n";
      std::cout << to_json(report).dump(2) << '\n';
    });
  }
  if (*compare) {
    return guarded([&] {
      if (!(cutoff > 0.0))
        throw ValidationError("--cutoff must be positive");
      const auto metrics = compare_trajectories(read_csv(csv_a), read_csv(csv_b), cutoff, column);
      std::cout << to_json(metrics).dump(2) << '\n';
    });
  }
  if (*derive) {
    return guarded([&] {
      const ScenarioConfig cfg = load_scenario(config_path);
      std::cout << derive_report(cfg, order).dump(2) << '\n';
    });
  }
  if (*validate) {
    return guarded([&] {
      const ScenarioConfig cfg = load_scenario(config_path);
      const double ratio = validity_ratio(cfg.hamiltonian());
      std::cout << "ok: " << to_string(cfg.kind) << ", " << cfg.grid().points() << " grid points, validity ratio "
                << ratio << (ratio < 1.0 ? "" : " (sufficiency condition unmet)") << '\n';
    });
  }
  return kOk;
}
