#include "timebin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

namespace timebin {

std::string format_g9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

CorrelationEstimate estimate_E(const TallyMatrix& tally) {
  const double npp = static_cast<double>(tally.at(+1, +1));
  const double npm = static_cast<double>(tally.at(+1, -1));
  const double nmp = static_cast<double>(tally.at(-1, +1));
  const double nmm = static_cast<double>(tally.at(-1, -1));
  const double n = npp + npm + nmp + nmm;
  if (n == 0.0) throw std::invalid_argument("estimate_E: empty tally");

  CorrelationEstimate out;
  out.n = tally.total();
  const double p_same = (npp + nmm) / n;
  out.e = 2.0 * p_same - 1.0;
  out.sigma = 2.0 * std::sqrt(p_same * (1.0 - p_same) / n);
  return out;
}

namespace {

struct FitDesign {
  std::vector<double> beta;
  std::vector<double> e;
  std::vector<double> w;     // 1/sigma^2, or 1 when any sigma is zero
  bool weighted = false;
};

FitDesign build_design(std::span<const ScanPoint> points) {
  FitDesign d;
  d.weighted = true;
  for (const auto& p : points) {
    d.beta.push_back(p.beta_rad);
    d.e.push_back(p.corr.e);
    if (p.corr.sigma <= 0.0) d.weighted = false;
  }
  for (const auto& p : points)
    d.w.push_back(d.weighted ? 1.0 / (p.corr.sigma * p.corr.sigma) : 1.0);
  return d;
}

}  // namespace

VisibilityFit fit_visibility(std::span<const ScanPoint> points) {
  std::set<double> distinct;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    distinct.insert(p.beta_rad);
    lo = std::min(lo, p.beta_rad);
    hi = std::max(hi, p.beta_rad);
  }
  if (distinct.size() < 4 || hi - lo < std::numbers::pi)
    throw std::invalid_argument(
        "fit_visibility: need >= 4 distinct beta values spanning at least half a period");

  const FitDesign d = build_design(points);
  const std::size_t n = d.beta.size();

  // First Fourier component as the starting point. On a uniform grid this
  // is already the least-squares answer; off-grid it is close enough for
  // Gauss-Newton to finish the job.
  double c = 0.0, s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    c += d.e[k] * std::cos(d.beta[k]);
    s += d.e[k] * std::sin(d.beta[k]);
  }
  c *= 2.0 / static_cast<double>(n);
  s *= 2.0 / static_cast<double>(n);
  double v = std::hypot(c, s);
  double delta = std::atan2(-s, c);

  // Gauss-Newton on (v, delta), weighted by the per-point variances.
  constexpr int kMaxIter = 60;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    double h00 = 0.0, h01 = 0.0, h11 = 0.0, g0 = 0.0, g1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = d.beta[k] + delta;
      const double model = v * std::cos(arg);
      const double r = d.e[k] - model;
      const double j0 = std::cos(arg);        // d model / d v
      const double j1 = -v * std::sin(arg);   // d model / d delta
      h00 += d.w[k] * j0 * j0;
      h01 += d.w[k] * j0 * j1;
      h11 += d.w[k] * j1 * j1;
      g0 += d.w[k] * j0 * r;
      g1 += d.w[k] * j1 * r;
    }
    const double det = h00 * h11 - h01 * h01;
    double dv, dd;
    if (std::abs(det) < 1e-30) {
      // Amplitude near zero makes delta unidentifiable; freeze it.
      if (h00 < 1e-30) throw std::runtime_error("fit_visibility: singular normal equations");
      dv = g0 / h00;
      dd = 0.0;
    } else {
      dv = (g0 * h11 - g1 * h01) / det;
      dd = (g1 * h00 - g0 * h01) / det;
    }
    v += dv;
    delta += dd;
    if (std::abs(dv) < 1e-14 && std::abs(dd) < 1e-14) break;
  }
  if (iter == kMaxIter) throw std::runtime_error("fit_visibility: did not converge");

  if (v < 0.0) {  // fold a negative amplitude into the phase
    v = -v;
    delta += std::numbers::pi;
  }
  delta = std::remainder(delta, 2.0 * std::numbers::pi);

  VisibilityFit fit;
  fit.iterations = iter + 1;
  fit.clamped = v > 1.0;
  fit.v = std::clamp(v, 0.0, 1.0);
  fit.phase_offset_rad = delta;

  double h00 = 0.0, h01 = 0.0, h11 = 0.0, chi2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double arg = d.beta[k] + delta;
    const double r = d.e[k] - v * std::cos(arg);
    const double j0 = std::cos(arg);
    const double j1 = -v * std::sin(arg);
    h00 += d.w[k] * j0 * j0;
    h01 += d.w[k] * j0 * j1;
    h11 += d.w[k] * j1 * j1;
    chi2 += d.w[k] * r * r;
  }
  fit.chi2 = chi2;
  const double det = h00 * h11 - h01 * h01;
  double var = det > 0.0 ? h11 / det : 0.0;
  // Without per-point sigmas the normal equations only fix relative errors;
  // scale by the reduced chi-square to get an absolute one.
  if (!d.weighted && n > 2) var *= chi2 / static_cast<double>(n - 2);
  fit.v_sigma = std::sqrt(var);
  return fit;
}

ChshResult chsh_s(const std::array<CorrelationEstimate, 4>& estimates) {
  ChshResult out;
  out.terms = estimates;
  const double combo = estimates[0].e + estimates[1].e + estimates[2].e - estimates[3].e;
  out.s = std::abs(combo);
  double var = 0.0;
  for (const auto& est : estimates) var += est.sigma * est.sigma;
  out.s_sigma = std::sqrt(var);
  out.n_sigma_violation = out.s_sigma > 0.0
                              ? (out.s - 2.0) / out.s_sigma
                              : std::numeric_limits<double>::infinity();
  return out;
}

double s_from_visibility(double v) {
  if (v < 0.0 || v > 1.0) throw std::domain_error("s_from_visibility: v outside [0, 1]");
  return 2.0 * std::numbers::sqrt2 * v;
}

std::pair<double, double> s_from_visibility(double v, double v_sigma) {
  return {s_from_visibility(v), 2.0 * std::numbers::sqrt2 * v_sigma};
}

double visibility_budget(double multipair, double accidental, double misalignment) {
  for (double f : {multipair, accidental, misalignment})
    if (f < 0.0 || f > 1.0) throw std::domain_error("visibility_budget: fraction outside [0, 1]");
  return 1.0 - (multipair + accidental + misalignment);
}

void write_scan_csv(std::ostream& os, std::span<const TallyMatrix> tallies) {
  os << "beta_rad,n_pp,n_pm,n_mp,n_mm,e_value,e_sigma\n";
  for (const auto& t : tallies) {
    const CorrelationEstimate est = estimate_E(t);
    os << format_g9(t.beta_rad) << ',' << t.at(+1, +1) << ',' << t.at(+1, -1) << ','
       << t.at(-1, +1) << ',' << t.at(-1, -1) << ',' << format_g9(est.e) << ','
       << format_g9(est.sigma) << '\n';
  }
}

}  // namespace timebin
