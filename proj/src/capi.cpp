#include "timebin/timebin.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "timebin/config.hpp"
#include "timebin/runner.hpp"
#include "timebin/version.hpp"

struct tb_config {
  timebin::FullConfig cfg;
};

struct tb_report {
  timebin::Report rep;
};

namespace {

void set_err(char* err, size_t err_len, const std::string& msg) {
  if (!err || err_len == 0) return;
  std::snprintf(err, err_len, "%s", msg.c_str());
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

timebin::RunRequest to_request(const tb_run_options* opt) {
  timebin::RunRequest req;
  if (!opt) return req;
  req.seed = opt->seed;
  req.pulses = opt->pulses;
  req.threads = opt->threads;
  req.write_events = opt->write_events != 0;
  if (opt->out_dir) req.out_dir = opt->out_dir;
  return req;
}

template <typename Fn>
tb_status guarded(char* err, size_t err_len, Fn&& fn) {
  try {
    return fn();
  } catch (const timebin::ConfigError& e) {
    set_err(err, err_len, e.what());
    return TB_ERR_CONFIG;
  } catch (const std::domain_error& e) {
    set_err(err, err_len, e.what());
    return TB_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_err(err, err_len, e.what());
    return TB_ERR_RUNTIME;
  }
}

using Runner = timebin::RunArtifacts (*)(const timebin::FullConfig&, const timebin::RunRequest&);

tb_status run_with(Runner runner, const tb_config* cfg, const tb_run_options* opt,
                   tb_report** out, char* err, size_t err_len) {
  if (!cfg || !out) {
    set_err(err, err_len, "null argument");
    return TB_ERR_RUNTIME;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    timebin::RunArtifacts art = runner(cfg->cfg, to_request(opt));
    *out = new tb_report{std::move(art.report)};
    return TB_OK;
  });
}

}  // namespace

const char* tb_version(void) { return timebin::kVersion; }

tb_status tb_config_parse(const char* text, tb_config** out, char* err, size_t err_len) {
  if (!text || !out) {
    set_err(err, err_len, "null argument");
    return TB_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    *out = new tb_config{timebin::parse_config(text)};
    return TB_OK;
  });
}

tb_status tb_config_load(const char* path, tb_config** out, char* err, size_t err_len) {
  if (!path || !out) {
    set_err(err, err_len, "null argument");
    return TB_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    *out = new tb_config{timebin::load_config(path)};
    return TB_OK;
  });
}

tb_status tb_config_canonical(const tb_config* cfg, char** out_text) {
  if (!cfg || !out_text) return TB_ERR_CONFIG;
  *out_text = dup_string(timebin::emit_config(cfg->cfg));
  return *out_text ? TB_OK : TB_ERR_RUNTIME;
}

void tb_config_free(tb_config* cfg) { delete cfg; }

void tb_string_free(char* text) { std::free(text); }

void tb_run_options_init(tb_run_options* opt) {
  if (!opt) return;
  opt->seed = 1;
  opt->pulses = 1000000;
  opt->threads = 1;
  opt->write_events = 0;
  opt->out_dir = ".";
}

tb_status tb_run_scan(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                      char* err, size_t err_len) {
  return run_with(timebin::run_scan, cfg, opt, out, err, err_len);
}

tb_status tb_run_chsh(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                      char* err, size_t err_len) {
  return run_with(timebin::run_chsh, cfg, opt, out, err, err_len);
}

tb_status tb_run_qkd(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                     char* err, size_t err_len) {
  return run_with(timebin::run_qkd, cfg, opt, out, err, err_len);
}

void tb_budget_inputs_init(tb_budget_inputs* in) {
  if (!in) return;
  const timebin::BudgetInputs d;
  in->bell_multipair = d.bell_multipair;
  in->bell_accidental = d.bell_accidental;
  in->bell_misalignment = d.bell_misalignment;
  in->qkd_accidental_z = d.qkd_accidental_z;
  in->qkd_accidental_x = d.qkd_accidental_x;
  in->qkd_multipair = d.qkd_multipair;
  in->qkd_misalignment_x = d.qkd_misalignment_x;
}

tb_status tb_run_budget(const tb_budget_inputs* in, const tb_config* cfg,
                        const tb_run_options* opt, tb_report** out, char* err, size_t err_len) {
  if (!out) {
    set_err(err, err_len, "null argument");
    return TB_ERR_RUNTIME;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    timebin::BudgetInputs inputs;
    if (in) {
      inputs.bell_multipair = in->bell_multipair;
      inputs.bell_accidental = in->bell_accidental;
      inputs.bell_misalignment = in->bell_misalignment;
      inputs.qkd_accidental_z = in->qkd_accidental_z;
      inputs.qkd_accidental_x = in->qkd_accidental_x;
      inputs.qkd_multipair = in->qkd_multipair;
      inputs.qkd_misalignment_x = in->qkd_misalignment_x;
    }
    timebin::RunArtifacts art =
        timebin::run_budget(inputs, cfg ? &cfg->cfg : nullptr, to_request(opt));
    *out = new tb_report{std::move(art.report)};
    return TB_OK;
  });
}

tb_status tb_validate(tb_report** out, char* err, size_t err_len) {
  if (!out) {
    set_err(err, err_len, "null argument");
    return TB_ERR_RUNTIME;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    std::ostringstream os;
    const bool ok = timebin::run_validate(os);
    auto* rep = new tb_report;
    std::istringstream lines(os.str());
    std::string line;
    while (std::getline(lines, line)) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      rep->rep.add(line.substr(0, colon), line.substr(colon + 2));
    }
    rep->rep.add("validate", ok ? "pass" : "FAIL");
    *out = rep;
    if (!ok) {
      set_err(err, err_len, "model self-checks failed");
      return TB_ERR_VALIDATION;
    }
    return TB_OK;
  });
}

size_t tb_report_size(const tb_report* rep) { return rep ? rep->rep.lines.size() : 0; }

const char* tb_report_key(const tb_report* rep, size_t index) {
  if (!rep || index >= rep->rep.lines.size()) return nullptr;
  return rep->rep.lines[index].first.c_str();
}

const char* tb_report_value(const tb_report* rep, size_t index) {
  if (!rep || index >= rep->rep.lines.size()) return nullptr;
  return rep->rep.lines[index].second.c_str();
}

int tb_report_number(const tb_report* rep, const char* key, double* out) {
  if (!rep || !key || !out) return -1;
  const std::string* value = rep->rep.find(key);
  if (!value) return -1;
  char* end = nullptr;
  const double v = std::strtod(value->c_str(), &end);
  if (end == value->c_str() || *end != '\0') return -1;
  *out = v;
  return 0;
}

char* tb_report_render(const tb_report* rep) {
  if (!rep) return nullptr;
  return dup_string(rep->rep.text());
}

void tb_report_free(tb_report* rep) { delete rep; }
