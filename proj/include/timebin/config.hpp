#pragma once

#include <stdexcept>
#include <string>

#include "timebin/montecarlo.hpp"

namespace timebin {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Angles used by the chsh subcommand; defaults are the settings that maximise
// S for a correlation of the form E = -V cos(alpha + beta - phi) at phi = 0.
struct RunSettings {
  int scan_points = 24;
  double chsh_alpha_rad = 0.0;
  double chsh_alpha_prime_rad = 1.5707963267948966;
  double chsh_beta_rad = -0.7853981633974483;
  double chsh_beta_prime_rad = 0.7853981633974483;
};

struct FullConfig {
  ExperimentConfig exp;
  RunSettings run;
};

// Parses the sectioned key = value format. All eight sections must be
// present; keys within a section fall back to documented defaults. Unknown
// sections or keys, duplicate keys, malformed values and out-of-range values
// are all reported as ConfigError with the offending section.key path.
FullConfig parse_config(const std::string& text);
FullConfig load_config(const std::string& path);

// Canonical text form; parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const FullConfig& cfg);

}  // namespace timebin
