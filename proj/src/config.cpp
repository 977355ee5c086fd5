#include "timebin/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace timebin {

namespace {

const std::set<std::string> kSections = {"source", "channel_a", "channel_b", "analyzer_a",
                                         "analyzer_b", "detectors", "schedule", "run"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double parse_double(const std::string& path, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
    fail(path, "expected a finite number, got '" + value + "'");
  return v;
}

int parse_int(const std::string& path, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') fail(path, "expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& path, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(path, "expected true or false, got '" + value + "'");
}

double require_range(const std::string& path, double v, double lo, double hi) {
  if (v < lo || v > hi) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "value %g outside [%g, %g]", v, lo, hi);
    fail(path, buf);
  }
  return v;
}

double require_min(const std::string& path, double v, double lo) {
  if (v < lo) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "value %g must be >= %g", v, lo);
    fail(path, buf);
  }
  return v;
}

double require_positive(const std::string& path, double v) {
  if (v <= 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "value %g must be > 0", v);
    fail(path, buf);
  }
  return v;
}

void apply_channel(ChannelParams& ch, const std::string& path, const std::string& key,
                   const std::string& value) {
  if (key == "length_km")
    ch.length_km = require_min(path, parse_double(path, value), 0.0);
  else if (key == "attenuation_db_per_km")
    ch.attenuation_db_per_km = require_min(path, parse_double(path, value), 0.0);
  else if (key == "extra_loss_db")
    ch.extra_loss_db = require_min(path, parse_double(path, value), 0.0);
  else
    fail(path, "unknown key");
}

void apply_analyzer(AnalyzerSetting& an, const std::string& path, const std::string& key,
                    const std::string& value) {
  if (key == "phase_rad")
    an.phase_rad = parse_double(path, value);
  else if (key == "alignment_visibility")
    an.alignment_visibility = require_range(path, parse_double(path, value), 0.0, 1.0);
  else if (key == "insertion_loss_db")
    an.insertion_loss_db = require_min(path, parse_double(path, value), 0.0);
  else
    fail(path, "unknown key");
}

void apply_detector_field(DetectorParams& det, const std::string& path, const std::string& field,
                          const std::string& value) {
  if (field == "efficiency")
    det.efficiency = require_range(path, parse_double(path, value), 0.0, 1.0);
  else if (field == "dark_prob_per_gate")
    det.dark_prob_per_gate = require_range(path, parse_double(path, value), 0.0, 1.0);
  else
    fail(path, "unknown key");
}

void apply_key(FullConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string path = section + "." + key;
  if (section == "source") {
    if (key == "mean_pairs_per_pulse")
      c.exp.source.mean_pairs_per_pulse = require_min(path, parse_double(path, value), 0.0);
    else if (key == "rep_rate_hz")
      c.exp.source.rep_rate_hz = require_positive(path, parse_double(path, value));
    else if (key == "pump_phase_rad")
      c.exp.pump_phase_rad = parse_double(path, value);
    else
      fail(path, "unknown key");
  } else if (section == "channel_a") {
    apply_channel(c.exp.channel_a, path, key, value);
  } else if (section == "channel_b") {
    apply_channel(c.exp.channel_b, path, key, value);
  } else if (section == "analyzer_a") {
    apply_analyzer(c.exp.analyzer_a, path, key, value);
  } else if (section == "analyzer_b") {
    apply_analyzer(c.exp.analyzer_b, path, key, value);
  } else if (section == "detectors") {
    if (key == "gate_width_ns") {
      const double w = require_positive(path, parse_double(path, value));
      for (DetectorParams* d : {&c.exp.det_a_plus, &c.exp.det_a_minus, &c.exp.det_b_plus,
                                &c.exp.det_b_minus})
        d->gate_width_ns = w;
      return;
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos) fail(path, "unknown key");
    const std::string which = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (which == "a_plus")
      apply_detector_field(c.exp.det_a_plus, path, field, value);
    else if (which == "a_minus")
      apply_detector_field(c.exp.det_a_minus, path, field, value);
    else if (which == "b_plus")
      apply_detector_field(c.exp.det_b_plus, path, field, value);
    else if (which == "b_minus")
      apply_detector_field(c.exp.det_b_minus, path, field, value);
    else
      fail(path, "unknown key");
  } else if (section == "schedule") {
    if (key == "measure_s")
      c.exp.schedule.measure_s = require_positive(path, parse_double(path, value));
    else if (key == "lock_s")
      c.exp.schedule.lock_s = require_min(path, parse_double(path, value), 0.0);
    else if (key == "diffusion_rad2_per_s")
      c.exp.drift.diffusion_rad2_per_s = require_min(path, parse_double(path, value), 0.0);
    else if (key == "lock_residual_sigma_rad")
      c.exp.drift.lock_residual_sigma_rad = require_min(path, parse_double(path, value), 0.0);
    else if (key == "apply_drift_factor")
      c.exp.apply_drift_factor = parse_bool(path, value);
    else
      fail(path, "unknown key");
  } else if (section == "run") {
    if (key == "mode") {
      if (value == "bell_scan")
        c.exp.mode = RunMode::bell_scan;
      else if (value == "bell_chsh")
        c.exp.mode = RunMode::bell_chsh;
      else if (value == "qkd")
        c.exp.mode = RunMode::qkd;
      else
        fail(path, "expected bell_scan, bell_chsh or qkd, got '" + value + "'");
    } else if (key == "trigger_window") {
      if (value == "central_only")
        c.exp.trigger_window = TriggerWindow::central_only;
      else if (value == "cycle_all_three")
        c.exp.trigger_window = TriggerWindow::cycle_all_three;
      else
        fail(path, "expected central_only or cycle_all_three, got '" + value + "'");
    } else if (key == "scan_points") {
      c.run.scan_points = parse_int(path, value);
      if (c.run.scan_points < 4) fail(path, "need at least 4 scan points");
    } else if (key == "chsh_alpha_rad") {
      c.run.chsh_alpha_rad = parse_double(path, value);
    } else if (key == "chsh_alpha_prime_rad") {
      c.run.chsh_alpha_prime_rad = parse_double(path, value);
    } else if (key == "chsh_beta_rad") {
      c.run.chsh_beta_rad = parse_double(path, value);
    } else if (key == "chsh_beta_prime_rad") {
      c.run.chsh_beta_prime_rad = parse_double(path, value);
    } else {
      fail(path, "unknown key");
    }
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FullConfig parse_config(const std::string& text) {
  FullConfig cfg;
  cfg.exp.det_b_plus.gated = true;
  cfg.exp.det_b_minus.gated = true;

  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) throw ConfigError("unknown section [" + section + "]");
      seen_sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    const std::string path = section + "." + key;
    if (!seen_keys.insert(path).second) throw ConfigError("duplicate key " + path);
    apply_key(cfg, section, key, value);
  }
  for (const auto& s : kSections)
    if (!seen_sections.count(s)) throw ConfigError("missing section [" + s + "]");
  cfg.exp.validate();
  return cfg;
}

FullConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const FullConfig& cfg) {
  std::ostringstream os;
  os << "[source]\n"
     << "mean_pairs_per_pulse = " << fmt(cfg.exp.source.mean_pairs_per_pulse) << "\n"
     << "rep_rate_hz = " << fmt(cfg.exp.source.rep_rate_hz) << "\n"
     << "pump_phase_rad = " << fmt(cfg.exp.pump_phase_rad) << "\n\n";
  const auto channel = [&](const char* name, const ChannelParams& ch) {
    os << '[' << name << "]\n"
       << "length_km = " << fmt(ch.length_km) << "\n"
       << "attenuation_db_per_km = " << fmt(ch.attenuation_db_per_km) << "\n"
       << "extra_loss_db = " << fmt(ch.extra_loss_db) << "\n\n";
  };
  channel("channel_a", cfg.exp.channel_a);
  channel("channel_b", cfg.exp.channel_b);
  const auto analyzer = [&](const char* name, const AnalyzerSetting& an) {
    os << '[' << name << "]\n"
       << "phase_rad = " << fmt(an.phase_rad) << "\n"
       << "alignment_visibility = " << fmt(an.alignment_visibility) << "\n"
       << "insertion_loss_db = " << fmt(an.insertion_loss_db) << "\n\n";
  };
  analyzer("analyzer_a", cfg.exp.analyzer_a);
  analyzer("analyzer_b", cfg.exp.analyzer_b);
  os << "[detectors]\n"
     << "gate_width_ns = " << fmt(cfg.exp.det_b_plus.gate_width_ns) << "\n";
  const auto det = [&](const char* name, const DetectorParams& d) {
    os << name << ".efficiency = " << fmt(d.efficiency) << "\n"
       << name << ".dark_prob_per_gate = " << fmt(d.dark_prob_per_gate) << "\n";
  };
  det("a_plus", cfg.exp.det_a_plus);
  det("a_minus", cfg.exp.det_a_minus);
  det("b_plus", cfg.exp.det_b_plus);
  det("b_minus", cfg.exp.det_b_minus);
  os << "\n[schedule]\n"
     << "measure_s = " << fmt(cfg.exp.schedule.measure_s) << "\n"
     << "lock_s = " << fmt(cfg.exp.schedule.lock_s) << "\n"
     << "diffusion_rad2_per_s = " << fmt(cfg.exp.drift.diffusion_rad2_per_s) << "\n"
     << "lock_residual_sigma_rad = " << fmt(cfg.exp.drift.lock_residual_sigma_rad) << "\n"
     << "apply_drift_factor = " << (cfg.exp.apply_drift_factor ? "true" : "false") << "\n\n";
  const char* mode = cfg.exp.mode == RunMode::bell_scan
                         ? "bell_scan"
                         : cfg.exp.mode == RunMode::bell_chsh ? "bell_chsh" : "qkd";
  const char* window =
      cfg.exp.trigger_window == TriggerWindow::central_only ? "central_only" : "cycle_all_three";
  os << "[run]\n"
     << "mode = " << mode << "\n"
     << "trigger_window = " << window << "\n"
     << "scan_points = " << cfg.run.scan_points << "\n"
     << "chsh_alpha_rad = " << fmt(cfg.run.chsh_alpha_rad) << "\n"
     << "chsh_alpha_prime_rad = " << fmt(cfg.run.chsh_alpha_prime_rad) << "\n"
     << "chsh_beta_rad = " << fmt(cfg.run.chsh_beta_rad) << "\n"
     << "chsh_beta_prime_rad = " << fmt(cfg.run.chsh_beta_prime_rad) << "\n";
  return os.str();
}

}  // namespace timebin
