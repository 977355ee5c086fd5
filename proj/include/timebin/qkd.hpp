#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "timebin/montecarlo.hpp"

namespace timebin {

// Z: bit encoded in the satellite arrival slot. X: bit encoded in the
// analyzer output port of a central-slot detection.
enum class Basis { z, x };

struct SiftedBit {
  std::uint64_t pulse_index;
  Basis basis;
  int alice_bit;
  int bob_bit;
};

struct SiftResult {
  std::vector<SiftedBit> bits;
  std::uint64_t basis_mismatch = 0;  // one side central, the other satellite
  std::uint64_t rejected = 0;        // malformed slot/port combinations
};

// Z-basis bit kept when both slots are satellites (0 -> bit 0, 2 -> bit 1);
// X-basis bit kept when both slots are central (port +1 -> 0, -1 -> 1, with
// the analyzers aligned for +1/+1 correlation). Mixed records carry no key
// bit and are counted out.
std::optional<SiftedBit> classify(const CoincidenceRecord& rec);
SiftResult classify_and_sift(std::span<const CoincidenceRecord> records);

struct BasisStats {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double qber = 0.0;
  double qber_sigma = 0.0;  // binomial
  double rate_hz = 0.0;
};

struct QkdResult {
  std::optional<BasisStats> z_basis;
  std::optional<BasisStats> x_basis;
  std::uint64_t basis_mismatch = 0;
  std::uint64_t rejected = 0;
};

// Per-basis error fractions; a basis with no sifted bits stays absent
// rather than reading as QBER 0. Rates follow from the live pulse count and
// repetition rate.
QkdResult qber(const SiftResult& sift, std::uint64_t live_pulses, double rep_rate_hz);

// First-order QBER decompositions: the Z budget is accidental + multipair,
// the X budget adds the misalignment term that only the interfering slot
// sees.
double qber_budget(double accidental, double multipair);
double qber_budget(double accidental, double multipair, double misalignment);

struct SecurityAssessment {
  bool secure = false;
  double threshold = 0.15;
  std::optional<double> z_margin;  // threshold - QBER, per populated basis
  std::optional<double> x_margin;
};

// Secure iff every populated basis sits strictly below the threshold.
SecurityAssessment security_check(const QkdResult& result, double threshold = 0.15);

// Sifted-key CSV: pulse_index,basis,alice_bit,bob_bit with basis spelled
// "Z" / "X"; one header row.
void write_sifted_csv(std::ostream& os, std::span<const SiftedBit> bits);

std::string basis_label(Basis b);

}  // namespace timebin
