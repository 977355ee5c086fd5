#include "timebin/budget.hpp"

#include <cmath>

namespace timebin {

namespace {

// Probability that exactly one of the two detectors fires from darks.
double exactly_one(double d_plus, double d_minus) {
  return d_plus * (1.0 - d_minus) + d_minus * (1.0 - d_plus);
}

struct ClassRates {
  double t = 0.0;          // genuine same-pair coincidences
  double photon_dark = 0.0;  // A photon with B dark, plus A dark with B photon
  double dark_dark = 0.0;
  double cross = 0.0;      // two-pair coincidences

  double total() const { return t + photon_dark + dark_dark + cross; }
};

}  // namespace

// Coincidence accounting with a marked pair drawn from the Poisson pulse.
// With K Poisson and every pair silent independently with probability s, the
// expected number of marked pairs with the rest silent is mu e^{-mu(1-s)}
// (and e^{-mu(1-s)} is also the no-click probability), which keeps every
// class exact in mu. Dark coincidences require exactly one dark in the
// counted window and none elsewhere, so the large desk-scale dark rates do
// not overcount.
BudgetReport predict(const ExperimentConfig& cfg) {
  cfg.validate();
  BudgetReport r;

  const double mu = cfg.source.mean_pairs_per_pulse;
  const double rep = cfg.source.rep_rate_hz;
  const double survive_a = channel_transmittance(cfg.channel_a) * cfg.analyzer_a.transmittance();
  const double survive_b = channel_transmittance(cfg.channel_b) * cfg.analyzer_b.transmittance();
  const double pa = survive_a * 0.5 * (cfg.det_a_plus.efficiency + cfg.det_a_minus.efficiency);
  const double pb = survive_b * 0.5 * (cfg.det_b_plus.efficiency + cfg.det_b_minus.efficiency);
  r.p_click_a = pa;
  r.p_click_b = pb;

  const double dap = cfg.det_a_plus.dark_prob_per_gate;
  const double dam = cfg.det_a_minus.dark_prob_per_gate;
  const double dbp = cfg.det_b_plus.dark_prob_per_gate;
  const double dbm = cfg.det_b_minus.dark_prob_per_gate;

  // Exactly one Alice dark in a given slot and none in the other five cells.
  const double a_none_slot = (1.0 - dap) * (1.0 - dam);
  const double ea_slot = exactly_one(dap, dam) * a_none_slot * a_none_slot;
  const double fa = a_none_slot * a_none_slot * a_none_slot;  // no Alice dark at all

  const double eb_window_alone = exactly_one(dbp, dbm);
  const double b_none_window = (1.0 - dbp) * (1.0 - dbm);

  r.drift_visibility_factor =
      cfg.apply_drift_factor ? residual_visibility_factor(cfg.drift, cfg.schedule) : 1.0;
  const double v_align = cfg.effective_alignment(cfg.analyzer_a) *
                         cfg.effective_alignment(cfg.analyzer_b);

  // One basis cell: the pair mass landing in the counted slot pattern is 1/4
  // for central-central and 1/4 for the two satellite-satellite cells
  // together; single-side click masses are 1/2 central and 1/2 satellite.
  const auto classes = [&](double beta_b, double fb, double eb_counted, double ea_counted,
                           double ea_free) {
    const double silent_pair = (1.0 - pa) * (1.0 - beta_b);
    const double rest = std::exp(-mu * (1.0 - silent_pair));
    ClassRates c;
    c.t = mu * (pa * pb / 4.0) * rest * ea_free * fb;
    const double b_dark = mu * (pa / 2.0) * (1.0 - beta_b) * rest * ea_free * eb_counted;
    const double a_dark = ea_counted * mu * (pb / 2.0) * (1.0 - pa) * rest * fb;
    c.photon_dark = b_dark + a_dark;
    c.dark_dark = ea_counted * eb_counted * rest;
    c.cross = mu * mu * (pa / 2.0) * (pb / 2.0) * silent_pair * rest * ea_free * fb;
    return c;
  };

  // Bell configuration: only the central window is gated.
  {
    const ClassRates c = classes(pb / 2.0, b_none_window, eb_window_alone, ea_slot, fa);
    const double total = c.total();
    if (total > 0.0) {
      r.true_fraction = c.t / total;
      r.accidental_fraction = (c.photon_dark + c.dark_dark) / total;
      r.multipair_fraction = c.cross / total;
    }
    r.visibility = r.true_fraction * v_align;
    r.s_value = 2.0 * std::sqrt(2.0) * r.visibility;
    r.coincidence_rate_hz = total * rep;
    r.coincidence_rate_per_pair_hz = total * rep / 4.0;
  }

  // Key configuration: all three windows gated. The X cell counts the
  // central window, the Z cells the two satellite windows; the dark factors
  // exclude extra darks in every gated window.
  {
    const double fb3 = b_none_window * b_none_window * b_none_window;
    const double eb_central = eb_window_alone * b_none_window * b_none_window;
    const ClassRates x = classes(pb, fb3, eb_central, ea_slot, fa);
    const double x_total = x.total();
    if (x_total > 0.0) {
      const double x_err = (x.photon_dark + x.dark_dark + x.cross) / 2.0 +
                           x.t * (1.0 - v_align) / 2.0;
      r.qber_x = x_err / x_total;
    }
    r.x_rate_hz = x_total * rep;

    const ClassRates z = classes(pb, fb3, 2.0 * eb_central, 2.0 * ea_slot, fa);
    const double z_total = z.total();
    if (z_total > 0.0)
      r.qber_z = (z.photon_dark + z.dark_dark + z.cross) / (2.0 * z_total);
    r.z_rate_hz = z_total * rep;
  }

  r.alice_trigger_rate_hz = (mu * pa + 3.0 * (dap + dam)) * rep;
  return r;
}

}  // namespace timebin
