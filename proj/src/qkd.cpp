#include "timebin/qkd.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace timebin {

std::string basis_label(Basis b) { return b == Basis::z ? "Z" : "X"; }

namespace {

bool valid_port(int p) { return p == +1 || p == -1; }
bool valid_slot(int s) { return s >= 0 && s <= 2; }

int slot_bit(int slot) { return slot == 0 ? 0 : 1; }
int port_bit(int port) { return port == +1 ? 0 : 1; }

}  // namespace

std::optional<SiftedBit> classify(const CoincidenceRecord& rec) {
  if (!valid_slot(rec.slot_a) || !valid_slot(rec.slot_b) || !valid_port(rec.port_a) ||
      !valid_port(rec.port_b))
    throw std::invalid_argument("classify: malformed coincidence record");

  const bool a_central = rec.slot_a == 1;
  const bool b_central = rec.slot_b == 1;
  if (a_central && b_central)
    return SiftedBit{rec.pulse_index, Basis::x, port_bit(rec.port_a), port_bit(rec.port_b)};
  if (!a_central && !b_central)
    return SiftedBit{rec.pulse_index, Basis::z, slot_bit(rec.slot_a), slot_bit(rec.slot_b)};
  return std::nullopt;
}

SiftResult classify_and_sift(std::span<const CoincidenceRecord> records) {
  SiftResult out;
  for (const auto& rec : records) {
    if (!valid_slot(rec.slot_a) || !valid_slot(rec.slot_b) || !valid_port(rec.port_a) ||
        !valid_port(rec.port_b)) {
      ++out.rejected;
      continue;
    }
    if (auto bit = classify(rec))
      out.bits.push_back(*bit);
    else
      ++out.basis_mismatch;
  }
  return out;
}

QkdResult qber(const SiftResult& sift, std::uint64_t live_pulses, double rep_rate_hz) {
  if (live_pulses == 0) throw std::invalid_argument("qber: zero live pulses");
  if (rep_rate_hz <= 0.0) throw std::invalid_argument("qber: rep rate must be > 0");
  const double live_s = static_cast<double>(live_pulses) / rep_rate_hz;

  QkdResult out;
  out.basis_mismatch = sift.basis_mismatch;
  out.rejected = sift.rejected;

  for (Basis basis : {Basis::z, Basis::x}) {
    std::uint64_t bits = 0, errors = 0;
    for (const auto& b : sift.bits) {
      if (b.basis != basis) continue;
      ++bits;
      if (b.alice_bit != b.bob_bit) ++errors;
    }
    if (bits == 0) continue;
    BasisStats st;
    st.bits = bits;
    st.errors = errors;
    st.qber = static_cast<double>(errors) / static_cast<double>(bits);
    st.qber_sigma = std::sqrt(st.qber * (1.0 - st.qber) / static_cast<double>(bits));
    st.rate_hz = static_cast<double>(bits) / live_s;
    (basis == Basis::z ? out.z_basis : out.x_basis) = st;
  }
  return out;
}

namespace {
void check_fraction(double f, const char* what) {
  if (f < 0.0 || f > 1.0) throw std::domain_error(std::string("qber_budget: ") + what);
}
}  // namespace

double qber_budget(double accidental, double multipair) {
  check_fraction(accidental, "accidental fraction outside [0, 1]");
  check_fraction(multipair, "multipair fraction outside [0, 1]");
  return accidental + multipair;
}

double qber_budget(double accidental, double multipair, double misalignment) {
  check_fraction(misalignment, "misalignment fraction outside [0, 1]");
  return qber_budget(accidental, multipair) + misalignment;
}

SecurityAssessment security_check(const QkdResult& result, double threshold) {
  if (threshold <= 0.0 || threshold >= 0.5)
    throw std::domain_error("security_check: threshold outside (0, 0.5)");
  SecurityAssessment out;
  out.threshold = threshold;
  bool secure = true;
  bool any = false;
  if (result.z_basis) {
    any = true;
    out.z_margin = threshold - result.z_basis->qber;
    secure = secure && result.z_basis->qber < threshold;
  }
  if (result.x_basis) {
    any = true;
    out.x_margin = threshold - result.x_basis->qber;
    secure = secure && result.x_basis->qber < threshold;
  }
  out.secure = any && secure;
  return out;
}

void write_sifted_csv(std::ostream& os, std::span<const SiftedBit> bits) {
  os << "pulse_index,basis,alice_bit,bob_bit\n";
  for (const auto& b : bits)
    os << b.pulse_index << ',' << basis_label(b.basis) << ',' << b.alice_bit << ','
       << b.bob_bit << '\n';
}

}  // namespace timebin
