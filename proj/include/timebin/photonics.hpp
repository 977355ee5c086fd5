#pragma once

#include "timebin/rng.hpp"

namespace timebin {

// Pulsed down-conversion source. Pair count per pulse is Poissonian with
// mean mean_pairs_per_pulse; pairs from the same pulse are mutually
// incoherent, so the engine samples each one independently and cross-pair
// coincidences show up as accidentals.
struct SourceParams {
  double mean_pairs_per_pulse = 0.08;
  double rep_rate_hz = 75.0e6;

  void validate() const;
};

struct ChannelParams {
  double length_km = 25.3;
  double attenuation_db_per_km = 0.35;
  double extra_loss_db = 0.0;

  void validate() const;
};

// 10^(-(length*attenuation + extra)/10).
double channel_transmittance(const ChannelParams& ch);

struct DetectorParams {
  double efficiency = 0.1;
  double dark_prob_per_gate = 0.0;  // per detection slot (free-running) or per gate
  bool gated = false;
  double gate_width_ns = 1.2;

  void validate() const;
};

struct DetectionOutcome {
  bool clicked = false;
  bool from_photon = false;  // photon wins the tag when both fire
};

int sample_pair_count(const SourceParams& src, Rng& rng);

// One detector queried over one slot. An incident photon fires with
// probability `efficiency`; a dark count fires independently with
// dark_prob_per_gate.
DetectionOutcome detect(const DetectorParams& det, bool photon_incident, Rng& rng);

}  // namespace timebin
