#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "datos/experiment.hpp"
#include "datos/validate.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized adaptive three-operator splitting experiments"};
  app.require_subcommand(1);
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides seed)");

  std::string run_cfg, cmp_cfg;
  auto* run = app.add_subcommand("run", "run one algorithm from a config file");
  run->add_option("config", run_cfg, "config file")->required()->check(CLI::ExistingFile);
  auto* compare = app.add_subcommand("compare", "run every algorithm in solver.algorithms and merge the traces");
  compare->add_option("config", cmp_cfg, "config file")->required()->check(CLI::ExistingFile);
  auto* validate = app.add_subcommand("validate", "run the fast invariant suite");
  for (auto* sub : {run, compare, validate}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  datos::CommandOverrides ov;
  if (*out_opt) ov.out_dir = out_dir;
  if (*seed_opt) ov.seed = seed;
  if (*run) return datos::cmd_run(run_cfg, ov, std::cout, std::cerr);
  if (*compare) return datos::cmd_compare(cmp_cfg, ov, std::cout, std::cerr);
  if (*validate) return datos::cmd_validate(std::cout);
  return 1;
}
