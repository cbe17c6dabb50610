// Command-line front end: one subcommand per experiment.

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "dprime/config.hpp"
#include "dprime/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Strong-coupling spectral toolkit for surface delta-prime interactions"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_dir, surface;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--jobs", jobs, "worker threads (overrides jobs)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized trial functions (overrides seed)");
  app.add_option("--surface", surface, "surface name (overrides surface.name, keeps default parameters)");

  std::optional<int> mesh, count;
  std::optional<double> d;
  std::string sign;
  for (const auto& name : dprime::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    if (name == "effective") {
      sub->add_option("--mesh", mesh, "mesh size n (n x n grid)");
      sub->add_option("--count", count, "number of eigenvalues");
      sub->add_option("--d", d, "layer half-width of U_d");
      sub->add_option("--sign", sign, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dprime::kExitConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    dprime::RunConfig cfg = config_path.empty() ? dprime::parse_config_text("{}") : dprime::load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != experiment)
      throw dprime::ConfigError("config experiment '" + cfg.experiment + "' conflicts with subcommand '" +
                                experiment + "'");
    cfg.experiment = experiment;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;
    if (!surface.empty()) cfg.surface = dprime::resolve({surface, {}});
    if (mesh) cfg.mesh_sizes = {*mesh};
    if (count) cfg.count = *count;
    if (d) cfg.d = *d;
    if (!sign.empty()) cfg.sign = sign == "plus" ? dprime::Variant::plus : dprime::Variant::minus;
    const dprime::RunOutcome outcome = dprime::run(cfg);
    std::cout << "exit " << outcome.exit_code << "\n";
    return outcome.exit_code;
  } catch (const dprime::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dprime::kExitConfig;
  } catch (const dprime::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return dprime::kExitNonConvergence;
  } catch (const dprime::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dprime::kExitConfig;
  }
}
