#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "timebin/photonics.hpp"
#include "timebin/quantum.hpp"
#include "timebin/stabilization.hpp"

namespace timebin {

enum class Side { a, b };
enum class Origin { photon, dark };

struct DetectionEvent {
  std::uint64_t pulse_index;
  Side side;
  int port;  // +1 / -1
  int slot;  // 0..2
  Origin origin;
};

struct CoincidenceRecord {
  std::uint64_t pulse_index;
  int slot_a;
  int port_a;
  int slot_b;
  int port_b;
};

// Central-slot coincidence counts by port pair, with the analyzer settings
// they were taken at.
struct TallyMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  double alpha_rad = 0.0;
  double beta_rad = 0.0;
  std::uint64_t live_pulses = 0;

  std::uint64_t& at(int port_a, int port_b);
  std::uint64_t at(int port_a, int port_b) const;
  std::uint64_t total() const;
  void merge(const TallyMatrix& other);
};

enum class RunMode { bell_scan, bell_chsh, qkd };

// Which Alice slots are allowed to raise the trigger that gates Bob. The
// Bell runs condition on the central (interfering) slot only; the key runs
// accept all three and let sifting sort the bases out.
enum class TriggerWindow { central_only, cycle_all_three };

struct ExperimentConfig {
  SourceParams source;
  double pump_phase_rad = 0.0;
  ChannelParams channel_a;
  ChannelParams channel_b;
  AnalyzerSetting analyzer_a;
  AnalyzerSetting analyzer_b;
  DetectorParams det_a_plus;
  DetectorParams det_a_minus;
  DetectorParams det_b_plus;
  DetectorParams det_b_minus;
  Schedule schedule;
  DriftModel drift;
  bool apply_drift_factor = false;
  RunMode mode = RunMode::bell_scan;
  TriggerWindow trigger_window = TriggerWindow::central_only;

  void validate() const;

  // Alignment visibility actually used for a run: the static factor times
  // the drift-averaged one when apply_drift_factor is set.
  double effective_alignment(const AnalyzerSetting& s) const;
};

struct SimOptions {
  int threads = 1;
  bool capture_events = false;
  bool capture_coincidences = false;
};

struct SimCounters {
  std::uint64_t pulses = 0;
  std::uint64_t triggered_pulses = 0;
  std::uint64_t a_clicks = 0;
  std::uint64_t b_clicks = 0;
  std::uint64_t multi_click_dropped = 0;
  std::uint64_t coincidences = 0;

  void merge(const SimCounters& other);
};

struct SimulationResult {
  TallyMatrix tally;  // central-central coincidences by port pair
  SimCounters counters;
  std::vector<DetectionEvent> events;            // when captured
  std::vector<CoincidenceRecord> coincidences;   // captured, or qkd mode
};

// Per-pulse model: Poisson pair count, per-pair outcome sampled from the
// joint table, channel/analyzer thinning, detection with darks, Alice
// trigger, gated Bob detection, coincidence bookkeeping. Deterministic for a
// given (config, n_pulses, seed) regardless of thread count: pulses are
// partitioned into fixed-size blocks with per-block RNG streams and results
// are merged in block order.
SimulationResult simulate(const ExperimentConfig& cfg, std::uint64_t n_pulses,
                          std::uint64_t seed, const SimOptions& opt = {});

struct CoincideResult {
  std::vector<CoincidenceRecord> records;
  TallyMatrix tally;
  std::uint64_t multi_click_dropped = 0;
};

// Groups a pulse-ordered event log into coincidences: pulses with exactly
// one click per side yield a record, pulses with two or more clicks on
// either side are dropped and counted. With central_only_tally the tally
// takes only slot-1/slot-1 records (every record is still returned).
// Throws std::invalid_argument if the log is not sorted by pulse index.
CoincideResult coincide(std::span<const DetectionEvent> events, bool central_only_tally);

void write_event_csv(std::ostream& os, std::span<const DetectionEvent> events);
std::string side_label(Side s);
std::string origin_label(Origin o);

}  // namespace timebin
