#include "timebin/photonics.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

void SourceParams::validate() const {
  if (mean_pairs_per_pulse < 0.0)
    throw std::domain_error("source.mean_pairs_per_pulse must be >= 0");
  if (rep_rate_hz <= 0.0) throw std::domain_error("source.rep_rate_hz must be > 0");
}

void ChannelParams::validate() const {
  if (length_km < 0.0) throw std::domain_error("channel length_km must be >= 0");
  if (attenuation_db_per_km < 0.0)
    throw std::domain_error("channel attenuation_db_per_km must be >= 0");
  if (extra_loss_db < 0.0) throw std::domain_error("channel extra_loss_db must be >= 0");
}

double channel_transmittance(const ChannelParams& ch) {
  ch.validate();
  const double total_db = ch.length_km * ch.attenuation_db_per_km + ch.extra_loss_db;
  return std::pow(10.0, -total_db / 10.0);
}

void DetectorParams::validate() const {
  if (efficiency < 0.0 || efficiency > 1.0)
    throw std::domain_error("detector efficiency outside [0, 1]");
  if (dark_prob_per_gate < 0.0 || dark_prob_per_gate > 1.0)
    throw std::domain_error("detector dark_prob_per_gate outside [0, 1]");
  if (gate_width_ns <= 0.0) throw std::domain_error("detector gate_width_ns must be > 0");
}

int sample_pair_count(const SourceParams& src, Rng& rng) {
  return sample_poisson(src.mean_pairs_per_pulse, rng);
}

DetectionOutcome detect(const DetectorParams& det, bool photon_incident, Rng& rng) {
  DetectionOutcome out;
  const bool photon_fired = photon_incident && rng.bernoulli(det.efficiency);
  const bool dark_fired = rng.bernoulli(det.dark_prob_per_gate);
  out.clicked = photon_fired || dark_fired;
  out.from_photon = photon_fired;
  return out;
}

}  // namespace timebin
