#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "timebin/config.hpp"

namespace timebin {

// Ordered key: value lines rendered into the *_report.txt files and exposed
// through the C API.
struct Report {
  std::vector<std::pair<std::string, std::string>> lines;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add_count(const std::string& key, std::uint64_t value);
  const std::string* find(const std::string& key) const;
  std::string text() const;
};

struct RunRequest {
  std::uint64_t seed = 1;
  std::uint64_t pulses = 1000000;  // per scan point, per setting, or total (qkd)
  int threads = 1;
  bool write_events = false;  // qkd only: dump the raw event log
  std::filesystem::path out_dir = ".";
};

struct RunArtifacts {
  Report report;
  std::vector<std::filesystem::path> files;  // everything written, manifest last
};

// Fringe scan: analyzer B stepped over a full turn, per-point simulations at
// seeds derived from (seed, point), scan.csv + fit report + manifest.
RunArtifacts run_scan(const FullConfig& cfg, const RunRequest& req);

// Four-setting CHSH measurement at the configured angles.
RunArtifacts run_chsh(const FullConfig& cfg, const RunRequest& req);

// Key run: sift, per-basis QBER and rates, security verdict, sifted.csv.
RunArtifacts run_qkd(const FullConfig& cfg, const RunRequest& req);

// Nominal contribution fractions for the additive budget report.
struct BudgetInputs {
  double bell_multipair = 0.09;
  double bell_accidental = 0.08;
  double bell_misalignment = 0.05;
  double qkd_accidental_z = 0.08;
  double qkd_accidental_x = 0.04;
  double qkd_multipair = 0.045;
  double qkd_misalignment_x = 0.02;
};

// Additive visibility/QBER budgets from the nominal fractions, plus the
// class-rate model predictions when a config is supplied.
RunArtifacts run_budget(const BudgetInputs& in, const FullConfig* cfg, const RunRequest& req);

// Streams one line per self-check; true when all passed.
bool run_validate(std::ostream& os);

}  // namespace timebin
