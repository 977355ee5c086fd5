#pragma once

#include "timebin/rng.hpp"

namespace timebin {

// Interferometer phase error between active stabilizations: a Wiener process
// restarted from the lock residual at the top of every measurement window.
struct DriftModel {
  double diffusion_rad2_per_s = 0.0;
  double lock_residual_sigma_rad = 0.0;

  void validate() const;
};

struct Schedule {
  double measure_s = 100.0;
  double lock_s = 5.0;

  void validate() const;
  double cycle_s() const { return measure_s + lock_s; }
  // Time since the start of the current measurement window; clamped to the
  // window length while the lock is running.
  double window_time(double t_s) const;
};

// Phase error at absolute time t, drawn from the marginal law of the walk:
// Gaussian with variance lock_residual^2 + diffusion * window_time(t).
double evolve_phase(const DriftModel& m, const Schedule& sch, double t_s, Rng& rng);

// Time average over one measurement window of E[cos(phase error)], i.e. the
// fringe-visibility factor the drift costs. Closed form:
//   exp(-sigma0^2/2) * (2 / (D T)) * (1 - exp(-D T / 2)).
double residual_visibility_factor(const DriftModel& m, const Schedule& sch);

// Monte-Carlo counterpart of residual_visibility_factor: simulate one
// window as an actual walk with step dt and average cos(error) over it.
double window_average_cos(const DriftModel& m, const Schedule& sch, double dt_s, Rng& rng);

}  // namespace timebin
