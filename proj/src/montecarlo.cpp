#include "timebin/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace timebin {

std::uint64_t& TallyMatrix::at(int port_a, int port_b) {
  return counts[port_index(port_a)][port_index(port_b)];
}

std::uint64_t TallyMatrix::at(int port_a, int port_b) const {
  return counts[port_index(port_a)][port_index(port_b)];
}

std::uint64_t TallyMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

void TallyMatrix::merge(const TallyMatrix& other) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) counts[i][j] += other.counts[i][j];
  live_pulses += other.live_pulses;
}

void SimCounters::merge(const SimCounters& other) {
  pulses += other.pulses;
  triggered_pulses += other.triggered_pulses;
  a_clicks += other.a_clicks;
  b_clicks += other.b_clicks;
  multi_click_dropped += other.multi_click_dropped;
  coincidences += other.coincidences;
}

void ExperimentConfig::validate() const {
  source.validate();
  channel_a.validate();
  channel_b.validate();
  det_a_plus.validate();
  det_a_minus.validate();
  det_b_plus.validate();
  det_b_minus.validate();
  schedule.validate();
  drift.validate();
  for (const AnalyzerSetting* s : {&analyzer_a, &analyzer_b}) {
    if (s->alignment_visibility < 0.0 || s->alignment_visibility > 1.0)
      throw std::domain_error("analyzer alignment_visibility outside [0, 1]");
    if (s->insertion_loss_db < 0.0)
      throw std::domain_error("analyzer insertion_loss_db must be >= 0");
  }
}

double ExperimentConfig::effective_alignment(const AnalyzerSetting& s) const {
  double v = s.alignment_visibility;
  if (apply_drift_factor) v *= residual_visibility_factor(drift, schedule);
  return v;
}

std::string side_label(Side s) { return s == Side::a ? "A" : "B"; }
std::string origin_label(Origin o) { return o == Origin::photon ? "photon" : "dark"; }

namespace {

constexpr std::uint64_t kBlockLen = 1ull << 20;
constexpr int kMaxPairs = 32;  // P(K > 32) < 1e-40 for any mu within range

struct CellDef {
  int slot_a, port_a, slot_b, port_b;
  int pa_idx, pb_idx;
};

struct Compiled {
  double mu = 0.0;
  double p_pair = 0.0;      // P(K >= 1)
  double p_any_a_dark = 0.0;
  double p_event = 0.0;     // pulse can produce any click at Alice
  std::array<double, 36> cdf{};
  std::array<CellDef, 36> cells{};
  double click_a[2] = {0, 0};  // survive * efficiency, by port index
  double click_b[2] = {0, 0};
  double dark_a[2] = {0, 0};   // per detector per slot
  double dark_b[2] = {0, 0};   // per detector per gated window
  std::array<double, 6> a_dark_first_cdf{};  // first dark cell, given >= 1
  bool trigger_all = false;
  bool gate_all = false;
  bool qkd = false;
};

int a_dark_cell_det(int cell) { return cell / 3; }

Compiled compile(const ExperimentConfig& cfg) {
  cfg.validate();
  Compiled c;
  c.mu = cfg.source.mean_pairs_per_pulse;
  c.p_pair = -std::expm1(-c.mu);
  c.trigger_all = cfg.trigger_window == TriggerWindow::cycle_all_three;
  // Bob's gate follows the trigger policy: a central-only trigger opens the
  // central window, the cycling trigger opens all three.
  c.gate_all = c.trigger_all;
  c.qkd = cfg.mode == RunMode::qkd;

  AnalyzerSetting a = cfg.analyzer_a;
  a.alignment_visibility = cfg.effective_alignment(cfg.analyzer_a);
  AnalyzerSetting b = cfg.analyzer_b;
  b.alignment_visibility = cfg.effective_alignment(cfg.analyzer_b);
  const OutcomeTable table = joint_outcome_table(PairState(cfg.pump_phase_rad,
                                                           std::sqrt(0.5), std::sqrt(0.5)),
                                                 a, b);
  double acc = 0.0;
  int idx = 0;
  for (int sa = 0; sa < kSlots; ++sa)
    for (int pa : kPortValues)
      for (int sb = 0; sb < kSlots; ++sb)
        for (int pb : kPortValues) {
          acc += table.at(sa, pa, sb, pb);
          c.cdf[idx] = acc;
          c.cells[idx] = {sa, pa, sb, pb, port_index(pa), port_index(pb)};
          ++idx;
        }
  c.cdf[35] = 1.0;  // guard against rounding in the running sum

  const double survive_a = channel_transmittance(cfg.channel_a) * cfg.analyzer_a.transmittance();
  const double survive_b = channel_transmittance(cfg.channel_b) * cfg.analyzer_b.transmittance();
  c.click_a[0] = survive_a * cfg.det_a_plus.efficiency;
  c.click_a[1] = survive_a * cfg.det_a_minus.efficiency;
  c.click_b[0] = survive_b * cfg.det_b_plus.efficiency;
  c.click_b[1] = survive_b * cfg.det_b_minus.efficiency;
  c.dark_a[0] = cfg.det_a_plus.dark_prob_per_gate;
  c.dark_a[1] = cfg.det_a_minus.dark_prob_per_gate;
  c.dark_b[0] = cfg.det_b_plus.dark_prob_per_gate;
  c.dark_b[1] = cfg.det_b_minus.dark_prob_per_gate;

  double p_none = 1.0;
  for (int cell = 0; cell < 6; ++cell) p_none *= 1.0 - c.dark_a[a_dark_cell_det(cell)];
  c.p_any_a_dark = 1.0 - p_none;
  if (c.p_any_a_dark > 0.0) {
    double none_so_far = 1.0;
    double cum = 0.0;
    for (int cell = 0; cell < 6; ++cell) {
      const double d = c.dark_a[a_dark_cell_det(cell)];
      cum += none_so_far * d;
      none_so_far *= 1.0 - d;
      c.a_dark_first_cdf[cell] = cum / c.p_any_a_dark;
    }
    c.a_dark_first_cdf[5] = 1.0;
  }

  c.p_event = c.p_pair + (1.0 - c.p_pair) * c.p_any_a_dark;
  return c;
}

struct BlockAcc {
  TallyMatrix tally;
  SimCounters counters;
  std::vector<DetectionEvent> events;
  std::vector<CoincidenceRecord> records;
};

// Alice dark pattern conditioned on at least one dark: pick the first firing
// cell from its exact conditional law, then the remaining cells are plain
// Bernoullis.
void expand_a_darks(const Compiled& c, Rng& rng, bool dark[2][3]) {
  const double u = rng.uniform();
  int first = 0;
  while (first < 5 && u > c.a_dark_first_cdf[first]) ++first;
  dark[a_dark_cell_det(first)][first % 3] = true;
  for (int cell = first + 1; cell < 6; ++cell)
    if (rng.bernoulli(c.dark_a[a_dark_cell_det(cell)])) dark[a_dark_cell_det(cell)][cell % 3] = true;
}

const CellDef& sample_cell(const Compiled& c, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(c.cdf.begin(), c.cdf.end(), u);
  const auto idx = std::min<std::size_t>(it - c.cdf.begin(), 35);
  return c.cells[idx];
}

void process_pulse(std::uint64_t pulse, const Compiled& c, Rng& rng, BlockAcc& acc,
                   bool capture_events, bool capture_records) {
  bool a_photon[2][3] = {};
  bool a_dark[2][3] = {};
  CellDef pairs[kMaxPairs];
  int n_pairs = 0;

  // Composition of an eventful pulse: either pairs are present (darks then
  // unconditioned) or there are no pairs and at least one Alice dark.
  const double u = rng.uniform() * c.p_event;
  if (u < c.p_pair) {
    n_pairs = std::min(sample_poisson_ge1(c.mu, rng), kMaxPairs);
    if (c.p_any_a_dark > 0.0 && rng.bernoulli(c.p_any_a_dark)) expand_a_darks(c, rng, a_dark);
  } else {
    expand_a_darks(c, rng, a_dark);
  }

  for (int k = 0; k < n_pairs; ++k) {
    pairs[k] = sample_cell(c, rng);
    if (rng.bernoulli(c.click_a[pairs[k].pa_idx])) a_photon[pairs[k].pa_idx][pairs[k].slot_a] = true;
  }

  int a_clicks = 0;
  int a_det = -1, a_slot = -1;
  bool trigger = false;
  for (int slot = 0; slot < 3; ++slot) {
    for (int det = 0; det < 2; ++det) {
      const bool clicked = a_photon[det][slot] || a_dark[det][slot];
      if (!clicked) continue;
      ++a_clicks;
      a_det = det;
      a_slot = slot;
      if (c.trigger_all || slot == 1) trigger = true;
      if (capture_events)
        acc.events.push_back({pulse, Side::a, kPortValues[det], slot,
                              a_photon[det][slot] ? Origin::photon : Origin::dark});
    }
  }
  acc.counters.a_clicks += a_clicks;

  if (!trigger) {
    if (a_clicks >= 2) ++acc.counters.multi_click_dropped;
    return;
  }
  ++acc.counters.triggered_pulses;

  bool b_photon[2][3] = {};
  bool b_dark[2][3] = {};
  for (int k = 0; k < n_pairs; ++k) {
    if (!rng.bernoulli(c.click_b[pairs[k].pb_idx])) continue;
    if (c.gate_all || pairs[k].slot_b == 1) b_photon[pairs[k].pb_idx][pairs[k].slot_b] = true;
  }
  for (int det = 0; det < 2; ++det) {
    if (c.dark_b[det] <= 0.0) continue;
    if (c.gate_all) {
      for (int slot = 0; slot < 3; ++slot)
        if (rng.bernoulli(c.dark_b[det])) b_dark[det][slot] = true;
    } else {
      if (rng.bernoulli(c.dark_b[det])) b_dark[det][1] = true;
    }
  }

  int b_clicks = 0;
  int b_det = -1, b_slot = -1;
  for (int slot = 0; slot < 3; ++slot) {
    for (int det = 0; det < 2; ++det) {
      const bool clicked = b_photon[det][slot] || b_dark[det][slot];
      if (!clicked) continue;
      ++b_clicks;
      b_det = det;
      b_slot = slot;
      if (capture_events)
        acc.events.push_back({pulse, Side::b, kPortValues[det], slot,
                              b_photon[det][slot] ? Origin::photon : Origin::dark});
    }
  }
  acc.counters.b_clicks += b_clicks;

  if (a_clicks >= 2 || b_clicks >= 2) {
    ++acc.counters.multi_click_dropped;
    return;
  }
  if (a_clicks != 1 || b_clicks != 1) return;

  ++acc.counters.coincidences;
  if (a_slot == 1 && b_slot == 1) ++acc.tally.at(kPortValues[a_det], kPortValues[b_det]);
  if (capture_records)
    acc.records.push_back({pulse, a_slot, kPortValues[a_det], b_slot, kPortValues[b_det]});
}

void run_block(std::uint64_t block, const Compiled& c, std::uint64_t seed, std::uint64_t n_pulses,
               BlockAcc& acc, bool capture_events, bool capture_records) {
  const std::uint64_t begin = block * kBlockLen;
  const std::uint64_t end = std::min(n_pulses, begin + kBlockLen);
  if (c.p_event <= 0.0) return;
  Rng rng = Rng::for_block(seed, block);
  if (c.p_event >= 1.0) {
    for (std::uint64_t p = begin; p < end; ++p)
      process_pulse(p, c, rng, acc, capture_events, capture_records);
    return;
  }
  std::uint64_t p = begin;
  while (true) {
    const std::uint64_t skips = sample_geometric_skips(c.p_event, rng);
    if (skips >= end - p) break;
    p += skips;
    process_pulse(p, c, rng, acc, capture_events, capture_records);
    if (++p >= end) break;
  }
}

}  // namespace

SimulationResult simulate(const ExperimentConfig& cfg, std::uint64_t n_pulses,
                          std::uint64_t seed, const SimOptions& opt) {
  const Compiled c = compile(cfg);
  const bool capture_records = opt.capture_coincidences || c.qkd;
  const std::uint64_t n_blocks = n_pulses == 0 ? 0 : (n_pulses - 1) / kBlockLen + 1;

  std::vector<BlockAcc> blocks(n_blocks);
  const int threads = std::clamp(opt.threads, 1, 256);
  if (threads == 1 || n_blocks <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b)
      run_block(b, c, seed, n_pulses, blocks[b], opt.capture_events, capture_records);
  } else {
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      for (std::uint64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
        run_block(b, c, seed, n_pulses, blocks[b], opt.capture_events, capture_records);
    };
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<std::uint64_t>(threads, n_blocks));
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SimulationResult result;
  result.tally.alpha_rad = cfg.analyzer_a.phase_rad;
  result.tally.beta_rad = cfg.analyzer_b.phase_rad;
  for (auto& blk : blocks) {
    result.tally.merge(blk.tally);
    result.counters.merge(blk.counters);
    if (opt.capture_events)
      result.events.insert(result.events.end(), blk.events.begin(), blk.events.end());
    if (capture_records)
      result.coincidences.insert(result.coincidences.end(), blk.records.begin(),
                                 blk.records.end());
  }
  result.tally.live_pulses = n_pulses;
  result.counters.pulses = n_pulses;
  return result;
}

CoincideResult coincide(std::span<const DetectionEvent> events, bool central_only_tally) {
  CoincideResult out;
  std::size_t i = 0;
  std::uint64_t last_pulse = 0;
  bool first_group = true;
  while (i < events.size()) {
    const std::uint64_t pulse = events[i].pulse_index;
    if (!first_group && pulse < last_pulse)
      throw std::invalid_argument("coincide: event log not sorted by pulse index");
    first_group = false;
    last_pulse = pulse;

    int a_clicks = 0, b_clicks = 0;
    const DetectionEvent* a_ev = nullptr;
    const DetectionEvent* b_ev = nullptr;
    for (; i < events.size() && events[i].pulse_index == pulse; ++i) {
      const DetectionEvent& ev = events[i];
      if (ev.side == Side::a) {
        ++a_clicks;
        a_ev = &ev;
      } else {
        ++b_clicks;
        b_ev = &ev;
      }
    }
    if (a_clicks >= 2 || b_clicks >= 2) {
      ++out.multi_click_dropped;
      continue;
    }
    if (a_clicks != 1 || b_clicks != 1) continue;
    out.records.push_back({pulse, a_ev->slot, a_ev->port, b_ev->slot, b_ev->port});
    if (!central_only_tally || (a_ev->slot == 1 && b_ev->slot == 1))
      ++out.tally.at(a_ev->port, b_ev->port);
  }
  return out;
}

void write_event_csv(std::ostream& os, std::span<const DetectionEvent> events) {
  os << "pulse_index,side,port,slot,origin\n";
  for (const auto& ev : events)
    os << ev.pulse_index << ',' << side_label(ev.side) << ',' << ev.port << ',' << ev.slot
       << ',' << origin_label(ev.origin) << '\n';
}

}  // namespace timebin
