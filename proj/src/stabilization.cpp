#include "timebin/stabilization.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

void DriftModel::validate() const {
  if (diffusion_rad2_per_s < 0.0) throw std::domain_error("drift diffusion must be >= 0");
  if (lock_residual_sigma_rad < 0.0)
    throw std::domain_error("drift lock residual sigma must be >= 0");
}

void Schedule::validate() const {
  if (measure_s <= 0.0 || lock_s <= 0.0)
    throw std::domain_error("schedule periods must be > 0");
}

double Schedule::window_time(double t_s) const {
  if (t_s < 0.0) throw std::domain_error("schedule time must be >= 0");
  const double tau = std::fmod(t_s, cycle_s());
  return std::min(tau, measure_s);
}

double evolve_phase(const DriftModel& m, const Schedule& sch, double t_s, Rng& rng) {
  m.validate();
  sch.validate();
  const double tau = sch.window_time(t_s);
  const double variance = m.lock_residual_sigma_rad * m.lock_residual_sigma_rad +
                          m.diffusion_rad2_per_s * tau;
  return rng.gaussian(std::sqrt(variance));
}

double residual_visibility_factor(const DriftModel& m, const Schedule& sch) {
  m.validate();
  sch.validate();
  const double lock_factor =
      std::exp(-0.5 * m.lock_residual_sigma_rad * m.lock_residual_sigma_rad);
  const double dt = m.diffusion_rad2_per_s * sch.measure_s;
  if (dt == 0.0) return lock_factor;
  // Average of exp(-D tau / 2) over tau in [0, T].
  return lock_factor * (2.0 / dt) * (1.0 - std::exp(-dt / 2.0));
}

double window_average_cos(const DriftModel& m, const Schedule& sch, double dt_s, Rng& rng) {
  m.validate();
  sch.validate();
  if (dt_s <= 0.0 || dt_s > sch.measure_s)
    throw std::domain_error("window_average_cos: bad step size");
  const double step_sigma = std::sqrt(m.diffusion_rad2_per_s * dt_s);
  double phase = rng.gaussian(m.lock_residual_sigma_rad);
  double acc = 0.0;
  std::uint64_t steps = 0;
  for (double t = 0.0; t < sch.measure_s; t += dt_s) {
    acc += std::cos(phase);
    ++steps;
    phase += rng.gaussian(step_sigma);
  }
  return acc / static_cast<double>(steps);
}

}  // namespace timebin
