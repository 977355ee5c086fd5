#include "timebin/selfcheck.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "timebin/analysis.hpp"
#include "timebin/quantum.hpp"
#include "timebin/rng.hpp"

namespace timebin {

namespace {

using cplx = std::complex<double>;

// Outcome probabilities enumerated straight from the geometry: the pair is
// born in bin t on both sides, each photon takes the short or the long arm,
// the long arm delays one slot and adds the analyzer phase and the port
// sign. Partial path distinguishability enters as an interpolation between
// coherent and incoherent path sums.
std::array<double, 36> enumerate_outcomes(double phi, double we, double wl, double alpha,
                                          double beta, double v) {
  std::array<std::vector<cplx>, 36> paths;
  const cplx coeff[2] = {cplx(we, 0.0), -wl * std::exp(cplx(0.0, phi))};
  for (int t = 0; t < 2; ++t) {
    for (int arm_a = 0; arm_a < 2; ++arm_a) {
      for (int arm_b = 0; arm_b < 2; ++arm_b) {
        const int slot_a = t + arm_a;
        const int slot_b = t + arm_b;
        for (int ia = 0; ia < 2; ++ia) {
          for (int ib = 0; ib < 2; ++ib) {
            const double sign_a = ia == 0 ? 1.0 : -1.0;
            const double sign_b = ib == 0 ? 1.0 : -1.0;
            cplx amp = coeff[t] * 0.25;
            if (arm_a == 1) amp *= sign_a * std::exp(cplx(0.0, alpha));
            if (arm_b == 1) amp *= sign_b * std::exp(cplx(0.0, beta));
            paths[((slot_a * 2 + ia) * 3 + slot_b) * 2 + ib].push_back(amp);
          }
        }
      }
    }
  }
  std::array<double, 36> p{};
  for (int k = 0; k < 36; ++k) {
    double incoherent = 0.0;
    cplx total = 0.0;
    for (const cplx& z : paths[k]) {
      incoherent += std::norm(z);
      total += z;
    }
    p[k] = incoherent + v * (std::norm(total) - incoherent);
  }
  return p;
}

double table_cell(const OutcomeTable& t, int k) {
  const int ib = k % 2;
  const int slot_b = (k / 2) % 3;
  const int ia = (k / 6) % 2;
  const int slot_a = k / 12;
  return t.at(slot_a, kPortValues[ia], slot_b, kPortValues[ib]);
}

std::string format_worst(double worst) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "max deviation %.3g", worst);
  return buf;
}

CheckResult check_oracle_equivalence() {
  CheckResult r{"oracle_equivalence", true, 0.0, ""};
  const double pi = 3.14159265358979323846;
  for (int ip = 0; ip < 8; ++ip) {
    for (int ia = 0; ia < 8; ++ia) {
      for (int ib = 0; ib < 8; ++ib) {
        for (double v : {0.0, 0.5, 1.0}) {
          const double phi = ip * pi / 4.0;
          const double alpha = ia * pi / 4.0;
          const double beta = ib * pi / 4.0;
          const double va = std::sqrt(v);
          const PairState state(phi, std::sqrt(0.5), std::sqrt(0.5));
          const OutcomeTable table = joint_outcome_table(state, AnalyzerSetting(alpha, va, 0.0),
                                                         AnalyzerSetting(beta, va, 0.0));
          const auto ref =
              enumerate_outcomes(phi, std::sqrt(0.5), std::sqrt(0.5), alpha, beta, v);
          for (int k = 0; k < 36; ++k)
            r.worst = std::max(r.worst, std::abs(table_cell(table, k) - ref[k]));
        }
      }
    }
  }
  r.passed = r.worst < 1e-12;
  r.detail = format_worst(r.worst);
  return r;
}

CheckResult check_normalization() {
  CheckResult r{"normalization", true, 0.0, ""};
  Rng rng(20250814);
  for (int trial = 0; trial < 500; ++trial) {
    const double we = std::sqrt(rng.uniform());
    const double wl = std::sqrt(1.0 - we * we);
    const PairState state(rng.uniform() * 6.283, we, wl);
    const AnalyzerSetting a(rng.uniform() * 6.283, rng.uniform(), rng.uniform() * 6.0);
    const AnalyzerSetting b(rng.uniform() * 6.283, rng.uniform(), rng.uniform() * 6.0);
    const OutcomeTable table = joint_outcome_table(state, a, b);
    r.worst = std::max(r.worst, std::abs(table.sum() + table.loss_mass() - 1.0));
    const OutcomeTable cut = table.thinned(rng.uniform(), rng.uniform());
    r.worst = std::max(r.worst, std::abs(cut.sum() + cut.loss_mass() - 1.0));
  }
  r.passed = r.worst < 1e-12;
  r.detail = format_worst(r.worst);
  return r;
}

CheckResult check_forbidden_cells() {
  CheckResult r{"forbidden_cells", true, 0.0, ""};
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const PairState state(rng.uniform() * 6.283, std::sqrt(0.5), std::sqrt(0.5));
    const AnalyzerSetting a(rng.uniform() * 6.283, rng.uniform(), 0.0);
    const AnalyzerSetting b(rng.uniform() * 6.283, rng.uniform(), 0.0);
    const OutcomeTable table = joint_outcome_table(state, a, b);
    for (int pa : kPortValues)
      for (int pb : kPortValues) {
        r.worst = std::max(r.worst, table.at(0, pa, 2, pb));
        r.worst = std::max(r.worst, table.at(2, pa, 0, pb));
      }
  }
  r.passed = r.worst < 1e-15;
  r.detail = format_worst(r.worst);
  return r;
}

CheckResult check_marginals() {
  CheckResult r{"central_marginals", true, 0.0, ""};
  for (int ia = 0; ia < 8; ++ia) {
    for (int ib = 0; ib < 8; ++ib) {
      const double alpha = ia * 0.785398163397448;
      const double beta = ib * 0.785398163397448;
      const OutcomeTable table = joint_outcome_table(
          PairState(), AnalyzerSetting(alpha, 1.0, 0.0), AnalyzerSetting(beta, 1.0, 0.0));
      for (int port : kPortValues) {
        r.worst = std::max(r.worst, std::abs(table.marginal_a(1, port) - 0.25));
        r.worst = std::max(r.worst, std::abs(table.marginal_b(1, port) - 0.25));
      }
    }
  }
  r.passed = r.worst < 1e-12;
  r.detail = format_worst(r.worst);
  return r;
}

CheckResult check_closed_form() {
  CheckResult r{"closed_form_central", true, 0.0, ""};
  Rng rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const double phi = rng.uniform() * 6.283;
    const double alpha = rng.uniform() * 6.283;
    const double beta = rng.uniform() * 6.283;
    const double va = rng.uniform();
    const double vb = rng.uniform();
    const OutcomeTable table = joint_outcome_table(
        PairState(phi, std::sqrt(0.5), std::sqrt(0.5)), AnalyzerSetting(alpha, va, 0.0),
        AnalyzerSetting(beta, vb, 0.0));
    for (int pa : kPortValues)
      for (int pb : kPortValues) {
        const double want =
            central_coincidence_prob(pa, pb, alpha, beta, effective_pump_phase(phi), va * vb);
        r.worst = std::max(r.worst, std::abs(table.conditional_central(pa, pb) - want));
      }
  }
  r.passed = r.worst < 1e-12;
  r.detail = format_worst(r.worst);
  return r;
}

CheckResult check_chsh_identity() {
  CheckResult r{"chsh_identity", true, 0.0, ""};
  const double pi = 3.14159265358979323846;
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double a = 0.0, ap = pi / 2.0, b = -pi / 4.0, bp = pi / 4.0;
    std::array<CorrelationEstimate, 4> est{};
    est[0] = {expected_E(a, b, v), 0.0, 1};
    est[1] = {expected_E(a, bp, v), 0.0, 1};
    est[2] = {expected_E(ap, b, v), 0.0, 1};
    est[3] = {expected_E(ap, bp, v), 0.0, 1};
    const ChshResult got = chsh_s(est);
    r.worst = std::max(r.worst, std::abs(got.s - 2.0 * std::sqrt(2.0) * v));
  }
  r.passed = r.worst < 1e-12;
  r.detail = format_worst(r.worst);
  return r;
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  return {check_oracle_equivalence(), check_normalization(), check_forbidden_cells(),
          check_marginals(),          check_closed_form(),   check_chsh_identity()};
}

}  // namespace timebin
