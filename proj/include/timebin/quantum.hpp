#pragma once

#include <array>
#include <complex>

namespace timebin {

inline constexpr int kSlots = 3;   // arrival slots: 0 early, 1 central, 2 late
inline constexpr int kPorts = 2;   // analyzer output ports, labelled +1 / -1

// Port label (+1 or -1) to array index. Throws std::invalid_argument on
// anything else.
int port_index(int port);
inline constexpr std::array<int, kPorts> kPortValues = {+1, -1};

// Two-photon time-bin state (w_e' |0>_A|0>_B - w_l' e^{i phi} |1>_A|1>_B),
// default maximally entangled with w_e = w_l = 1/sqrt(2).
class PairState {
 public:
  PairState();
  PairState(double phi_rad, double weight_early, double weight_late);

  double phi() const { return phi_; }
  double weight_early() const { return weight_early_; }
  double weight_late() const { return weight_late_; }

  std::complex<double> amplitude_early() const;  // coefficient of |0>|0>
  std::complex<double> amplitude_late() const;   // coefficient of |1>|1>

  // Fringe visibility the state alone supports: 2 w_e w_l.
  double intrinsic_visibility() const { return 2.0 * weight_early_ * weight_late_; }

 private:
  double phi_;
  double weight_early_;
  double weight_late_;
};

// One unbalanced interferometer. The phase is wrapped to [0, 2pi);
// alignment_visibility in [0, 1] damps interference contrast without
// removing photons; insertion loss is a plain transmittance applied by the
// caller, never inside the transfer amplitudes.
struct AnalyzerSetting {
  double phase_rad = 0.0;
  double alignment_visibility = 1.0;
  double insertion_loss_db = 0.0;

  AnalyzerSetting() = default;
  AnalyzerSetting(double phase, double alignment, double loss_db);

  double transmittance() const;  // linear, from insertion_loss_db
};

// Lossless transfer of a photon entering in `input_bin` (0 or 1) to output
// `port`: the short arm keeps the bin, the long arm delays it one slot and
// carries the analyzer phase together with the port sign.
struct ArmAmplitudes {
  int slot_short;
  int slot_long;
  std::complex<double> short_arm;
  std::complex<double> long_arm;
};
ArmAmplitudes analyzer_transfer(int input_bin, const AnalyzerSetting& s, int port);

// Joint probability over (slot_a, port_a, slot_b, port_b) plus the mass
// removed by thinning. A freshly computed table is lossless (loss_mass 0)
// and sums to one.
class OutcomeTable {
 public:
  double at(int slot_a, int port_a, int slot_b, int port_b) const;
  double& at(int slot_a, int port_a, int slot_b, int port_b);

  double sum() const;
  double loss_mass() const { return loss_mass_; }

  // Keeps each side's photon with the given probability and books the rest
  // into loss_mass.
  OutcomeTable thinned(double keep_a, double keep_b) const;

  double marginal_a(int slot, int port) const;
  double marginal_b(int slot, int port) const;
  double central_mass() const;  // both photons in slot 1
  // Port-pair distribution conditioned on both photons central.
  double conditional_central(int port_a, int port_b) const;

  const std::array<double, 36>& flat() const { return p_; }

 private:
  friend OutcomeTable joint_outcome_table(const PairState&, const AnalyzerSetting&,
                                          const AnalyzerSetting&);
  std::array<double, 36> p_{};
  double loss_mass_ = 0.0;
};

// Squared modulus of the path-amplitude sum per outcome, with the
// interference cross term of coherent path pairs damped by the product of
// the two alignment visibilities. Insertion losses are not applied here.
OutcomeTable joint_outcome_table(const PairState& state, const AnalyzerSetting& a,
                                 const AnalyzerSetting& b);

// (1 + i j v cos(alpha + beta - phi)) / 4 for ports i, j in {+1,-1}.
double central_coincidence_prob(int i, int j, double alpha_rad, double beta_rad,
                                double phi_rad, double v);

// E(alpha, beta) = v cos(alpha + beta).
double expected_E(double alpha_rad, double beta_rad, double v);

// The amplitude model above realizes (1 - i j V cos(alpha + beta - phi))/4
// in the central cell; the plus-sign convention of central_coincidence_prob
// therefore holds at the shifted phase returned here (phi + pi, fixed once
// for the whole library).
double effective_pump_phase(double phi_rad);

double wrap_phase(double rad);  // into [0, 2pi)

}  // namespace timebin
