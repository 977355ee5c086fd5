#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "timebin/timebin.h"

namespace {

struct ConfigDeleter {
  void operator()(tb_config* c) const { tb_config_free(c); }
};
struct ReportDeleter {
  void operator()(tb_report* r) const { tb_report_free(r); }
};
using ConfigPtr = std::unique_ptr<tb_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<tb_report, ReportDeleter>;

const char* category(tb_status s) {
  switch (s) {
    case TB_ERR_CONFIG:
      return "config";
    case TB_ERR_RUNTIME:
      return "runtime";
    case TB_ERR_VALIDATION:
      return "validation";
    default:
      return "ok";
  }
}

int finish(tb_status status, tb_report* raw, const char* err) {
  ReportPtr report(raw);
  if (status != TB_OK) {
    std::fprintf(stderr, "error: %s: %s\n", category(status), err);
    return status;
  }
  char* text = tb_report_render(report.get());
  if (text) {
    std::fputs(text, stdout);
    tb_string_free(text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo and analytic model of time-bin entanglement distribution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tb_version()));

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::uint64_t pulses = 1000000;
  int threads = 1;
  bool events = false;

  tb_budget_inputs budget;
  tb_budget_inputs_init(&budget);
  std::string budget_config;

  auto add_run_flags = [&](CLI::App* cmd, const char* pulses_help) {
    cmd->add_option("--config", config_path, "experiment configuration file")->required();
    cmd->add_option("--seed", seed, "master RNG seed");
    cmd->add_option("--pulses", pulses, pulses_help);
    cmd->add_option("--threads", threads, "worker threads (results identical for any count)");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* scan = app.add_subcommand("scan", "fringe scan of analyzer B over a full turn");
  add_run_flags(scan, "pump pulses per scan point");
  CLI::App* chsh = app.add_subcommand("chsh", "four-setting CHSH measurement");
  add_run_flags(chsh, "pump pulses per setting");
  CLI::App* qkd = app.add_subcommand("qkd", "key run with sifting, QBER and security verdict");
  add_run_flags(qkd, "total pump pulses");
  qkd->add_flag("--events", events, "also write the raw detection event log");

  CLI::App* bud = app.add_subcommand("budget", "additive visibility and QBER budgets");
  bud->add_option("--config", budget_config, "also evaluate the class-rate model on this config");
  bud->add_option("--out", out_dir, "output directory");
  bud->add_option("--bell-multipair", budget.bell_multipair, "multipair fraction, Bell");
  bud->add_option("--bell-accidental", budget.bell_accidental, "accidental fraction, Bell");
  bud->add_option("--bell-misalignment", budget.bell_misalignment, "misalignment fraction, Bell");
  bud->add_option("--z-accidental", budget.qkd_accidental_z, "accidental fraction, Z basis");
  bud->add_option("--x-accidental", budget.qkd_accidental_x, "accidental fraction, X basis");
  bud->add_option("--qkd-multipair", budget.qkd_multipair, "multipair fraction, key run");
  bud->add_option("--x-misalignment", budget.qkd_misalignment_x, "misalignment fraction, X basis");

  CLI::App* validate = app.add_subcommand("validate", "run the internal model checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : TB_ERR_CONFIG;
  }

  char err[512] = "";
  tb_run_options opt;
  tb_run_options_init(&opt);
  opt.seed = seed;
  opt.pulses = pulses;
  opt.threads = threads;
  opt.write_events = events ? 1 : 0;
  opt.out_dir = out_dir.c_str();

  if (validate->parsed()) {
    tb_report* rep = nullptr;
    const tb_status status = tb_validate(&rep, err, sizeof err);
    ReportPtr report(rep);
    if (report) {
      char* text = tb_report_render(report.get());
      if (text) {
        std::fputs(text, stdout);
        tb_string_free(text);
      }
    }
    if (status != TB_OK) std::fprintf(stderr, "error: %s: %s\n", category(status), err);
    return status;
  }

  if (bud->parsed()) {
    ConfigPtr cfg;
    if (!budget_config.empty()) {
      tb_config* raw = nullptr;
      const tb_status status = tb_config_load(budget_config.c_str(), &raw, err, sizeof err);
      cfg.reset(raw);
      if (status != TB_OK) {
        std::fprintf(stderr, "error: %s: %s\n", category(status), err);
        return status;
      }
    }
    tb_report* rep = nullptr;
    const tb_status status = tb_run_budget(&budget, cfg.get(), &opt, &rep, err, sizeof err);
    return finish(status, rep, err);
  }

  tb_config* raw_cfg = nullptr;
  const tb_status load_status = tb_config_load(config_path.c_str(), &raw_cfg, err, sizeof err);
  ConfigPtr cfg(raw_cfg);
  if (load_status != TB_OK) {
    std::fprintf(stderr, "error: %s: %s\n", category(load_status), err);
    return load_status;
  }

  tb_report* rep = nullptr;
  tb_status status = TB_ERR_RUNTIME;
  if (scan->parsed())
    status = tb_run_scan(cfg.get(), &opt, &rep, err, sizeof err);
  else if (chsh->parsed())
    status = tb_run_chsh(cfg.get(), &opt, &rep, err, sizeof err);
  else if (qkd->parsed())
    status = tb_run_qkd(cfg.get(), &opt, &rep, err, sizeof err);
  return finish(status, rep, err);
}
