#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "timebin/qkd.hpp"

using namespace timebin;

namespace {

CoincidenceRecord rec(int slot_a, int port_a, int slot_b, int port_b,
                      std::uint64_t pulse = 0) {
  return CoincidenceRecord{pulse, slot_a, port_a, slot_b, port_b};
}

SiftResult sift_with(std::uint64_t z_bits, std::uint64_t z_errors, std::uint64_t x_bits,
                     std::uint64_t x_errors) {
  SiftResult out;
  for (std::uint64_t i = 0; i < z_bits; ++i)
    out.bits.push_back(SiftedBit{i, Basis::z, 0, i < z_errors ? 1 : 0});
  for (std::uint64_t i = 0; i < x_bits; ++i)
    out.bits.push_back(SiftedBit{i, Basis::x, 1, i < x_errors ? 0 : 1});
  return out;
}

}  // namespace

TEST_CASE("classification by slot pattern") {
  const auto early = classify(rec(0, +1, 0, -1, 42));
  REQUIRE(early.has_value());
  CHECK(early->basis == Basis::z);
  CHECK(early->alice_bit == 0);
  CHECK(early->bob_bit == 0);
  CHECK(early->pulse_index == 42);

  const auto late = classify(rec(2, -1, 2, +1));
  REQUIRE(late.has_value());
  CHECK(late->basis == Basis::z);
  CHECK(late->alice_bit == 1);
  CHECK(late->bob_bit == 1);

  // A dark-induced opposite-satellite coincidence is a Z error, not a
  // mismatch.
  const auto err = classify(rec(0, +1, 2, +1));
  REQUIRE(err.has_value());
  CHECK(err->basis == Basis::z);
  CHECK(err->alice_bit == 0);
  CHECK(err->bob_bit == 1);

  const auto x_same = classify(rec(1, +1, 1, +1));
  REQUIRE(x_same.has_value());
  CHECK(x_same->basis == Basis::x);
  CHECK(x_same->alice_bit == 0);
  CHECK(x_same->bob_bit == 0);

  const auto x_err = classify(rec(1, -1, 1, +1));
  REQUIRE(x_err.has_value());
  CHECK(x_err->alice_bit == 1);
  CHECK(x_err->bob_bit == 0);

  CHECK_FALSE(classify(rec(1, +1, 0, +1)).has_value());
  CHECK_FALSE(classify(rec(2, -1, 1, -1)).has_value());

  CHECK_THROWS_AS(classify(rec(3, +1, 1, +1)), std::invalid_argument);
  CHECK_THROWS_AS(classify(rec(1, 0, 1, +1)), std::invalid_argument);
}

TEST_CASE("sifting splits matches, mismatches and malformed records") {
  std::vector<CoincidenceRecord> records = {
      rec(0, +1, 0, +1, 1), rec(1, +1, 1, -1, 2), rec(1, -1, 0, +1, 3),
      rec(2, +1, 2, -1, 4), rec(0, -1, 1, +1, 5), rec(9, +1, 1, +1, 6),
  };
  const SiftResult sift = classify_and_sift(records);
  CHECK(sift.bits.size() == 3);
  CHECK(sift.basis_mismatch == 2);
  CHECK(sift.rejected == 1);
  CHECK(sift.bits[0].basis == Basis::z);
  CHECK(sift.bits[1].basis == Basis::x);
  CHECK(sift.bits[2].basis == Basis::z);
}

TEST_CASE("per-basis error rates and rates per second") {
  const SiftResult sift = sift_with(1000, 128, 500, 52);
  const QkdResult res = qber(sift, 75000000, 75.0e6);  // exactly one second

  REQUIRE(res.z_basis.has_value());
  CHECK(res.z_basis->bits == 1000);
  CHECK(res.z_basis->errors == 128);
  CHECK(res.z_basis->qber == doctest::Approx(0.128).epsilon(1e-15));
  CHECK(res.z_basis->qber_sigma ==
        doctest::Approx(std::sqrt(0.128 * 0.872 / 1000.0)).epsilon(1e-12));
  CHECK(res.z_basis->rate_hz == doctest::Approx(1000.0).epsilon(1e-12));

  REQUIRE(res.x_basis.has_value());
  CHECK(res.x_basis->qber == doctest::Approx(0.104).epsilon(1e-15));
  CHECK(res.x_basis->rate_hz == doctest::Approx(500.0).epsilon(1e-12));

  const QkdResult z_only = qber(sift_with(10, 1, 0, 0), 1000, 1000.0);
  CHECK(z_only.z_basis.has_value());
  CHECK_FALSE(z_only.x_basis.has_value());

  CHECK_THROWS_AS(qber(sift, 0, 75.0e6), std::invalid_argument);
  CHECK_THROWS_AS(qber(sift, 1000, 0.0), std::invalid_argument);
}

TEST_CASE("first-order error budgets") {
  CHECK(qber_budget(0.08, 0.045) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(qber_budget(0.04, 0.045, 0.02) == doctest::Approx(0.105).epsilon(1e-15));
  CHECK(qber_budget(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(qber_budget(-0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(qber_budget(0.0, 0.0, 1.5), std::domain_error);
}

TEST_CASE("security verdict against the threshold") {
  const QkdResult good = qber(sift_with(1000, 128, 1000, 105), 1000000, 1e6);
  const SecurityAssessment ok = security_check(good);
  CHECK(ok.secure);
  CHECK(ok.threshold == 0.15);
  REQUIRE(ok.z_margin.has_value());
  CHECK(*ok.z_margin == doctest::Approx(0.15 - 0.128).epsilon(1e-12));
  REQUIRE(ok.x_margin.has_value());
  CHECK(*ok.x_margin == doctest::Approx(0.15 - 0.105).epsilon(1e-12));

  const QkdResult bad = qber(sift_with(1000, 160, 1000, 105), 1000000, 1e6);
  CHECK_FALSE(security_check(bad).secure);

  // Exactly at threshold is not secure: the bound is strict.
  const QkdResult edge = qber(sift_with(1000, 150, 0, 0), 1000000, 1e6);
  CHECK_FALSE(security_check(edge).secure);

  const QkdResult one_basis = qber(sift_with(1000, 100, 0, 0), 1000000, 1e6);
  const SecurityAssessment partial = security_check(one_basis);
  CHECK(partial.secure);
  CHECK(partial.z_margin.has_value());
  CHECK_FALSE(partial.x_margin.has_value());

  // No sifted bits at all: nothing to certify.
  CHECK_FALSE(security_check(QkdResult{}).secure);

  CHECK_THROWS_AS(security_check(good, 0.0), std::domain_error);
  CHECK_THROWS_AS(security_check(good, 0.5), std::domain_error);

  const SecurityAssessment strict = security_check(bad, 0.2);
  CHECK(strict.secure);
  CHECK(*strict.z_margin == doctest::Approx(0.2 - 0.16).epsilon(1e-12));
}

TEST_CASE("sifted csv format") {
  std::vector<SiftedBit> bits = {
      {7, Basis::z, 0, 0},
      {9, Basis::x, 1, 0},
  };
  std::ostringstream os;
  write_sifted_csv(os, bits);
  CHECK(os.str() ==
        "pulse_index,basis,alice_bit,bob_bit\n"
        "7,Z,0,0\n"
        "9,X,1,0\n");
  CHECK(basis_label(Basis::z) == "Z");
  CHECK(basis_label(Basis::x) == "X");
}

TEST_CASE("noiseless apparatus distributes error-free key") {
  ExperimentConfig cfg;
  cfg.source.mean_pairs_per_pulse = 0.01;
  cfg.channel_a = ChannelParams{0.0, 0.0, 0.0};
  cfg.channel_b = ChannelParams{0.0, 0.0, 0.0};
  cfg.analyzer_a = AnalyzerSetting(std::numbers::pi / 2.0, 1.0, 0.0);
  cfg.analyzer_b = AnalyzerSetting(std::numbers::pi / 2.0, 1.0, 0.0);
  for (DetectorParams* det : {&cfg.det_a_plus, &cfg.det_a_minus}) {
    det->efficiency = 1.0;
    det->dark_prob_per_gate = 0.0;
  }
  for (DetectorParams* det : {&cfg.det_b_plus, &cfg.det_b_minus}) {
    det->efficiency = 1.0;
    det->dark_prob_per_gate = 0.0;
    det->gated = true;
  }
  cfg.mode = RunMode::qkd;
  cfg.trigger_window = TriggerWindow::cycle_all_three;

  SimOptions opt;
  opt.capture_coincidences = true;
  const SimulationResult sim = simulate(cfg, 500000, 17, opt);
  const SiftResult sift = classify_and_sift(sim.coincidences);
  const QkdResult res = qber(sift, sim.counters.pulses, cfg.source.rep_rate_hz);

  REQUIRE(res.z_basis.has_value());
  REQUIRE(res.x_basis.has_value());
  CHECK(res.z_basis->bits > 100);
  CHECK(res.x_basis->bits > 100);
  CHECK(res.z_basis->errors == 0);
  CHECK(res.x_basis->errors == 0);
  CHECK(security_check(res).secure);
  CHECK(res.rejected == 0);

  // The state puts half its weight on mixed central/satellite outcomes.
  const double total = static_cast<double>(sift.bits.size() + res.basis_mismatch);
  CHECK(std::abs(res.basis_mismatch / total - 0.5) < 0.03);
}
