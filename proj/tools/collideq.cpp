// collideq <command> [options]: runs one experiment and writes its CSV.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collideq/errors.hpp"
#include "collideq/experiments.hpp"

namespace ex = collideq::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Collision-model thermalization experiments"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string command;
  std::string commands;
  for (const auto& n : ex::command_names()) commands += (commands.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + commands)->required();

  // Every option is captured as text; parsing happens after layering with
  // presets and config files so all sources share one grammar.
  ex::ParamMap flags;
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> table{
      {"--setting", "setting", "I, II or I,II"},
      {"--beta", "beta", "inverse temperature(s); inf for zero temperature"},
      {"--omega", "omega", "qubit frequency"},
      {"--gamma", "gamma", "coupling rate"},
      {"--dt", "dt", "collision time(s)"},
      {"--dt-grid", "dt", "collision times a:b:n"},
      {"--delta", "delta", "intra-bath strength(s)"},
      {"--delta-grid", "delta", "intra-bath strengths a:b:n"},
      {"--delta-units", "delta_units", "rad or half-pi"},
      {"--steps", "steps", "number of collisions"},
      {"--t-final", "t_final", "evolution time when --steps is absent"},
      {"--stride", "stride", "write every k-th step"},
      {"--traj", "traj", "trajectory count(s)"},
      {"--seed", "seed", "master seed"},
      {"--rho0", "rho0", "initial system state: excited, ground, mixed, gibbs"},
      {"--r", "r", "limit-scan ratios dt/(1-delta)"},
      {"--dt0", "dt0", "limit-scan starting dt"},
      {"--halvings", "halvings", "limit-scan dt count"},
      {"--n-theta", "n_theta", "BLP polar grid size"},
      {"--n-phi", "n_phi", "BLP azimuthal grid size"},
      {"--preset", "preset", "fig2, fig3, fig4, fig5 or limit"},
      {"--config", "config", "key = value parameter file"},
      {"--out", "out", "output CSV path (default stdout)"},
  };
  std::vector<std::string> values(table.size());
  std::vector<CLI::Option*> opts(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    opts[i] = app.add_option(table[i].name, values[i], table[i].help);
  }
  opts[4]->excludes(opts[5]);
  opts[6]->excludes(opts[7]);

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < table.size(); ++i) {
    if (opts[i]->count() > 0) flags[table[i].key] = values[i];
  }

  try {
    const ex::ExperimentSpec spec = ex::resolve_spec(ex::parse_command(command), flags);
    const ex::RunResult result = ex::run_experiment(spec);
    if (spec.output_path.empty()) {
      std::cout << result.csv;
    } else {
      std::ofstream out(spec.output_path, std::ios::binary);
      if (!out) throw collideq::Error("cannot open '" + spec.output_path + "' for writing");
      out << result.csv;
      if (!out) throw collideq::Error("write to '" + spec.output_path + "' failed");
    }
    if (result.flagged > 0) {
      std::cerr << "collideq: " << result.flagged << " of " << result.rows << " rows flagged\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "collideq: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
