#pragma once

// Experiment drivers behind the `collideq` command line.
//
// Parameters arrive as text and are layered: command defaults, then a named
// preset, then a `key = value` config file, then command-line flags. The
// fully resolved map is echoed as `# key=value` lines at the top of each CSV.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "collideq/collision.hpp"

namespace collideq::experiments {

enum class Command { steady_state, dynamics, heat, blp, negativity, trajectories, sweep, limit_scan };
enum class DeltaUnits { rad, half_pi };

using ParamMap = std::map<std::string, std::string>;

Command parse_command(std::string_view name);
std::string to_string(Command c);
const std::vector<std::string>& command_names();

// Scalar "x", list "x,y,z" or inclusive linear grid "a:b:n".
std::vector<double> parse_values(std::string_view text);
std::vector<Setting> parse_settings(std::string_view text);

// Fixed-precision, locale-free rendering used for every number in a CSV.
std::string format_double(double x);

// Keys a preset pins for `cmd`. Throws InvalidParameter for unknown names.
ParamMap preset_params(std::string_view name, Command cmd);
const std::vector<std::string>& preset_names();
// `key = value` lines; `#` starts a comment. Throws Error on I/O failure.
ParamMap read_config_file(const std::string& path);

struct ExperimentSpec {
  Command command = Command::steady_state;
  std::vector<Setting> settings;
  double omega = 1.0;
  double gamma = 1.0;
  std::vector<double> betas;
  std::vector<double> dts;
  std::vector<double> deltas;  // in delta_units
  DeltaUnits delta_units = DeltaUnits::rad;
  std::optional<std::size_t> steps;
  double t_final = 10.0;
  std::size_t stride = 1;
  std::vector<std::size_t> trajectories;
  std::uint64_t master_seed = 1;
  std::string rho0;
  std::vector<double> ratios;  // limit-scan r values
  double dt0 = 0.01;
  std::size_t halvings = 4;
  std::size_t n_theta = 32;
  std::size_t n_phi = 16;
  std::string output_path;  // empty = stdout
  ParamMap resolved;        // echoed into the CSV header

  double delta_radians(double delta) const;
};

// `flags` holds command-line values keyed like config entries (underscores).
ExperimentSpec resolve_spec(Command cmd, const ParamMap& flags);

struct RunResult {
  std::string csv;
  std::size_t rows = 0;
  std::size_t flagged = 0;  // rows whose status is not "ok"
};

RunResult run_experiment(const ExperimentSpec& spec);

}  // namespace collideq::experiments
