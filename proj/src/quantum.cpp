#include "timebin/quantum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace timebin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

int port_index(int port) {
  if (port == +1) return 0;
  if (port == -1) return 1;
  throw std::invalid_argument("port must be +1 or -1");
}

double wrap_phase(double rad) {
  double w = std::fmod(rad, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

PairState::PairState() : PairState(0.0, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0) {}

PairState::PairState(double phi_rad, double weight_early, double weight_late)
    : phi_(wrap_phase(phi_rad)), weight_early_(weight_early), weight_late_(weight_late) {
  if (weight_early < 0.0 || weight_late < 0.0)
    throw std::domain_error("PairState: negative bin weight");
  const double norm = weight_early * weight_early + weight_late * weight_late;
  if (std::abs(norm - 1.0) > 1e-12)
    throw std::domain_error("PairState: bin weights must satisfy w0^2 + w1^2 = 1");
}

std::complex<double> PairState::amplitude_early() const { return {weight_early_, 0.0}; }

std::complex<double> PairState::amplitude_late() const {
  return -weight_late_ * std::complex<double>(std::cos(phi_), std::sin(phi_));
}

AnalyzerSetting::AnalyzerSetting(double phase, double alignment, double loss_db)
    : phase_rad(wrap_phase(phase)), alignment_visibility(alignment), insertion_loss_db(loss_db) {
  if (alignment < 0.0 || alignment > 1.0)
    throw std::domain_error("AnalyzerSetting: alignment_visibility outside [0, 1]");
  if (loss_db < 0.0) throw std::domain_error("AnalyzerSetting: negative insertion loss");
}

double AnalyzerSetting::transmittance() const {
  return std::pow(10.0, -insertion_loss_db / 10.0);
}

ArmAmplitudes analyzer_transfer(int input_bin, const AnalyzerSetting& s, int port) {
  if (input_bin != 0 && input_bin != 1)
    throw std::invalid_argument("analyzer_transfer: input bin must be 0 or 1");
  const double sign = static_cast<double>(port_index(port) == 0 ? +1 : -1);
  ArmAmplitudes out;
  out.slot_short = input_bin;
  out.slot_long = input_bin + 1;
  out.short_arm = {0.5, 0.0};
  out.long_arm = 0.5 * sign *
                 std::complex<double>(std::cos(s.phase_rad), std::sin(s.phase_rad));
  return out;
}

double OutcomeTable::at(int slot_a, int port_a, int slot_b, int port_b) const {
  return p_[((slot_a * kPorts + port_index(port_a)) * kSlots + slot_b) * kPorts +
            port_index(port_b)];
}

double& OutcomeTable::at(int slot_a, int port_a, int slot_b, int port_b) {
  return p_[((slot_a * kPorts + port_index(port_a)) * kSlots + slot_b) * kPorts +
            port_index(port_b)];
}

double OutcomeTable::sum() const {
  double s = 0.0;
  for (double v : p_) s += v;
  return s;
}

OutcomeTable OutcomeTable::thinned(double keep_a, double keep_b) const {
  if (keep_a < 0.0 || keep_a > 1.0 || keep_b < 0.0 || keep_b > 1.0)
    throw std::domain_error("OutcomeTable::thinned: keep probability outside [0, 1]");
  OutcomeTable out = *this;
  const double keep = keep_a * keep_b;
  for (double& v : out.p_) v *= keep;
  out.loss_mass_ = loss_mass_ + (1.0 - loss_mass_) * (1.0 - keep);
  return out;
}

double OutcomeTable::marginal_a(int slot, int port) const {
  double s = 0.0;
  for (int sb = 0; sb < kSlots; ++sb)
    for (int pb : kPortValues) s += at(slot, port, sb, pb);
  return s;
}

double OutcomeTable::marginal_b(int slot, int port) const {
  double s = 0.0;
  for (int sa = 0; sa < kSlots; ++sa)
    for (int pa : kPortValues) s += at(sa, pa, slot, port);
  return s;
}

double OutcomeTable::central_mass() const {
  double s = 0.0;
  for (int pa : kPortValues)
    for (int pb : kPortValues) s += at(1, pa, 1, pb);
  return s;
}

double OutcomeTable::conditional_central(int port_a, int port_b) const {
  const double mass = central_mass();
  if (mass <= 0.0) throw std::domain_error("conditional_central: no central mass");
  return at(1, port_a, 1, port_b) / mass;
}

OutcomeTable joint_outcome_table(const PairState& state, const AnalyzerSetting& a,
                                 const AnalyzerSetting& b) {
  const std::complex<double> coeff[2] = {state.amplitude_early(), state.amplitude_late()};
  const double cross_damping = a.alignment_visibility * b.alignment_visibility;

  OutcomeTable table;
  for (int sa = 0; sa < kSlots; ++sa) {
    for (int pa : kPortValues) {
      for (int sb = 0; sb < kSlots; ++sb) {
        for (int pb : kPortValues) {
          // Path amplitude per emission bin; at most two bins contribute.
          std::complex<double> z[2] = {};
          for (int bin = 0; bin < 2; ++bin) {
            const ArmAmplitudes ta = analyzer_transfer(bin, a, pa);
            const ArmAmplitudes tb = analyzer_transfer(bin, b, pb);
            std::complex<double> fa = 0.0;
            if (ta.slot_short == sa) fa = ta.short_arm;
            if (ta.slot_long == sa) fa = ta.long_arm;
            std::complex<double> fb = 0.0;
            if (tb.slot_short == sb) fb = tb.short_arm;
            if (tb.slot_long == sb) fb = tb.long_arm;
            z[bin] = coeff[bin] * fa * fb;
          }
          const double direct = std::norm(z[0]) + std::norm(z[1]);
          const double cross = 2.0 * (z[0] * std::conj(z[1])).real();
          table.at(sa, pa, sb, pb) = direct + cross_damping * cross;
        }
      }
    }
  }
  return table;
}

double central_coincidence_prob(int i, int j, double alpha_rad, double beta_rad,
                                double phi_rad, double v) {
  if (v < 0.0 || v > 1.0) throw std::domain_error("central_coincidence_prob: v outside [0, 1]");
  const double si = (port_index(i) == 0) ? 1.0 : -1.0;
  const double sj = (port_index(j) == 0) ? 1.0 : -1.0;
  return (1.0 + si * sj * v * std::cos(alpha_rad + beta_rad - phi_rad)) / 4.0;
}

double expected_E(double alpha_rad, double beta_rad, double v) {
  if (v < 0.0 || v > 1.0) throw std::domain_error("expected_E: v outside [0, 1]");
  return v * std::cos(alpha_rad + beta_rad);
}

double effective_pump_phase(double phi_rad) { return wrap_phase(phi_rad + std::numbers::pi); }

}  // namespace timebin
