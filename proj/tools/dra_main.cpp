#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dra/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"simulator and gain designer for distributed resource allocation"};
  app.require_subcommand(1);

  std::string scenario, out_dir = ".", param;
  std::vector<double> values;
  int workers = 1;

  auto* design = app.add_subcommand("design", "evaluate gain bounds and margins");
  design->add_option("scenario", scenario, "scenario file")->required();

  auto* runc = app.add_subcommand("run", "simulate and write CSV outputs");
  runc->add_option("scenario", scenario, "scenario file")->required();
  runc->add_option("--out", out_dir, "output directory (default .)");

  auto* verify = app.add_subcommand("verify", "check invariants on a run");
  verify->add_option("scenario", scenario, "scenario file")->required();

  auto* sweep = app.add_subcommand("sweep", "repeat a scenario over one parameter");
  sweep->add_option("scenario", scenario, "scenario file")->required();
  sweep->add_option("--param", param, "parameter to vary: beta | ts | c")->required();
  sweep->add_option("--values", values, "comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--workers", workers, "concurrent runs (default 1)");
  std::string sweep_out;
  sweep->add_option("--out", sweep_out, "directory for sweep.csv");

  CLI11_PARSE(app, argc, argv);

  if (design->parsed()) return dra::cmd_design(scenario, std::cout, std::cerr);
  if (runc->parsed()) return dra::cmd_run(scenario, out_dir, std::cout, std::cerr);
  if (verify->parsed()) return dra::cmd_verify(scenario, std::cout, std::cerr);
  return dra::cmd_sweep(scenario, param, values, workers, sweep_out, std::cout,
                        std::cerr);
}
