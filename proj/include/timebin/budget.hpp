#pragma once

#include "timebin/montecarlo.hpp"

namespace timebin {

// First-order coincidence accounting for one apparatus configuration.
// Every probability below is per pump pulse; rates multiply by the
// repetition rate. The model tracks four coincidence classes per basis:
// genuine pairs, photon-dark accidentals on either side, dark-dark
// accidentals, and uncorrelated two-pair coincidences.
struct BudgetReport {
  double p_click_a = 0.0;  // photon click probability at Alice, all ports
  double p_click_b = 0.0;

  // Bell configuration (central window only)
  double true_fraction = 0.0;
  double accidental_fraction = 0.0;
  double multipair_fraction = 0.0;
  double visibility = 0.0;
  double s_value = 0.0;
  double coincidence_rate_hz = 0.0;           // all four port pairs
  double coincidence_rate_per_pair_hz = 0.0;  // one port pair

  // Key configuration (all three windows gated)
  double qber_z = 0.0;
  double qber_x = 0.0;
  double z_rate_hz = 0.0;
  double x_rate_hz = 0.0;

  double drift_visibility_factor = 1.0;
  double alice_trigger_rate_hz = 0.0;
};

BudgetReport predict(const ExperimentConfig& cfg);

}  // namespace timebin
