#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "timebin/montecarlo.hpp"

namespace timebin {

struct CorrelationEstimate {
  double e = 0.0;
  double sigma = 0.0;
  std::uint64_t n = 0;
};

// E = (n++ + n-- - n+- - n-+) / N with the binomial error
// sigma_E = 2 sqrt(p (1-p) / N), p the same-port fraction.
// Throws std::invalid_argument on an empty tally.
CorrelationEstimate estimate_E(const TallyMatrix& tally);

struct ScanPoint {
  double beta_rad;
  CorrelationEstimate corr;
};

struct VisibilityFit {
  double v = 0.0;
  double v_sigma = 0.0;
  double phase_offset_rad = 0.0;  // delta in E(beta) = v cos(beta + delta)
  double chi2 = 0.0;
  int iterations = 0;
  bool clamped = false;  // v hit the [0, 1] boundary
};

// Weighted least squares of E(beta) = v cos(beta + delta), seeded by the
// first discrete Fourier component and polished by Gauss-Newton. Requires
// at least four distinct beta values spanning half a period; throws
// std::invalid_argument otherwise, std::runtime_error if the iteration
// fails to settle.
VisibilityFit fit_visibility(std::span<const ScanPoint> points);

struct ChshResult {
  double s = 0.0;
  double s_sigma = 0.0;
  double n_sigma_violation = 0.0;  // (S - 2) / sigma_S
  std::array<CorrelationEstimate, 4> terms{};
};

// S = |E1 + E2 + E3 - E4| with the sigmas combined in quadrature. Order of
// the estimates: (alpha,beta), (alpha,beta'), (alpha',beta), (alpha',beta').
ChshResult chsh_s(const std::array<CorrelationEstimate, 4>& estimates);

// S = 2 sqrt(2) v for the fringe-maximizing settings.
double s_from_visibility(double v);
// Same, propagating sigma_S = 2 sqrt(2) sigma_v.
std::pair<double, double> s_from_visibility(double v, double v_sigma);

// 1 - (multipair + accidental + misalignment): the additive first-order
// budget for the raw fringe visibility.
double visibility_budget(double multipair, double accidental, double misalignment);

// Scan CSV: beta_rad,n_pp,n_pm,n_mp,n_mm,e_value,e_sigma; 9 significant
// digits, '.' radix, one header row.
void write_scan_csv(std::ostream& os, std::span<const TallyMatrix> tallies);

// Shared numeric formatting for every CSV/report writer (printf %.9g).
std::string format_g9(double x);

}  // namespace timebin
