#ifndef SPECMATCH_CONFIG_HPP
#define SPECMATCH_CONFIG_HPP

#include <string>

#include "simulation.hpp"
#include "utf.hpp"

namespace specmatch {

/// Everything a CLI run needs, mirroring the [market], [topology], [solver]
/// and [experiment] sections of the config file. Fields keep their defaults
/// when a section or key is absent; unknown sections and keys are rejected.
struct CliConfig {
  int pus = 2;
  int sus = 2;
  TopologyConfig topology;
  SolverConfig solver;
  ExperimentConfig experiment;
};

/// Parses the TOML-style subset used by the config file: `[section]`
/// headers, `key = value` lines, `#` comments, numeric/string scalars and
/// flat arrays. Throws ParseError on anything unknown or malformed.
CliConfig parse_cli_config(const std::string& text);
CliConfig load_cli_config(const std::string& path);

/// The built-in defaults rendered as a config file (used by `--help` docs
/// and as a starting point for users).
std::string default_config_text();

}  // namespace specmatch

#endif
