#include "isac/isac.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "isac/harness.hpp"

struct isac_config {
  isac::Config cfg;
};

struct isac_trial {
  isac::SchemeRun run;
};

namespace {

thread_local std::string g_last_error;

isac_status to_status(isac::ErrorCode code) {
  switch (code) {
    case isac::ErrorCode::kInvalidInput: return ISAC_E_INVALID_INPUT;
    case isac::ErrorCode::kInfeasibleBracket: return ISAC_E_INFEASIBLE_BRACKET;
    case isac::ErrorCode::kInfeasibleSubproblem: return ISAC_E_INFEASIBLE_SUBPROBLEM;
    case isac::ErrorCode::kDegenerateSensing: return ISAC_E_DEGENERATE_SENSING;
    case isac::ErrorCode::kConfig: return ISAC_E_CONFIG;
    case isac::ErrorCode::kIo: return ISAC_E_IO;
    case isac::ErrorCode::kUnknownScheme: return ISAC_E_UNKNOWN_SCHEME;
  }
  return ISAC_E_INTERNAL;
}

template <class F>
isac_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return ISAC_OK;
  } catch (const isac::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISAC_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return ISAC_E_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void check_keys(const isac::Config& cfg) {
  std::vector<std::string> known = isac::Scenario::config_keys();
  for (const auto& k : isac::OptimizerOptions::config_keys()) known.push_back(k);
  for (const auto& k : isac::SweepSpec::config_keys()) known.push_back(k);
  cfg.check_known(known);
}

void require_ptr(const void* p, const char* what) {
  if (!p) isac::fail(isac::ErrorCode::kInvalidInput, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* isac_status_string(isac_status status) {
  switch (status) {
    case ISAC_OK: return "ok";
    case ISAC_E_INVALID_INPUT: return "invalid input";
    case ISAC_E_INFEASIBLE_BRACKET: return "infeasible bracket";
    case ISAC_E_INFEASIBLE_SUBPROBLEM: return "infeasible subproblem";
    case ISAC_E_DEGENERATE_SENSING: return "degenerate sensing";
    case ISAC_E_CONFIG: return "config error";
    case ISAC_E_IO: return "i/o error";
    case ISAC_E_UNKNOWN_SCHEME: return "unknown scheme";
    case ISAC_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* isac_last_error(void) { return g_last_error.c_str(); }

void isac_string_free(char* s) { std::free(s); }

isac_status isac_config_load(const char* path, isac_config** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    auto cfg = isac::Config::load(path);
    check_keys(cfg);
    *out = new isac_config{std::move(cfg)};
  });
}

isac_status isac_config_parse(const char* text, isac_config** out) {
  return guarded([&] {
    require_ptr(text, "text");
    require_ptr(out, "out");
    auto cfg = isac::Config::parse(text);
    check_keys(cfg);
    *out = new isac_config{std::move(cfg)};
  });
}

isac_status isac_config_set(isac_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require_ptr(cfg, "config");
    require_ptr(key, "key");
    require_ptr(value, "value");
    isac::Config next = cfg->cfg;
    next.set(key, value);
    check_keys(next);
    cfg->cfg = std::move(next);
  });
}

void isac_config_free(isac_config* cfg) { delete cfg; }

isac_status isac_trial_run(const isac_config* cfg, const char* scheme, uint64_t seed, isac_trial** out) {
  return guarded([&] {
    require_ptr(cfg, "config");
    require_ptr(scheme, "scheme");
    require_ptr(out, "out");
    const isac::Scheme s = isac::parse_scheme(scheme);
    const isac::Scenario scenario = isac::Scenario::from_config(cfg->cfg);
    const isac::OptimizerOptions opts = isac::OptimizerOptions::from_config(cfg->cfg);
    const std::uint64_t used = seed != 0 ? seed : scenario.seed;
    *out = new isac_trial{isac::run_scheme_detailed(s, scenario, opts, used)};
  });
}

void isac_trial_free(isac_trial* trial) { delete trial; }

double isac_trial_sum_rate(const isac_trial* trial) { return trial ? trial->run.result.sum_rate : 0.0; }
double isac_trial_secrecy(const isac_trial* trial) { return trial ? trial->run.result.secrecy_lb : 0.0; }
int isac_trial_converged(const isac_trial* trial) { return trial && trial->run.result.converged ? 1 : 0; }
int isac_trial_degraded(const isac_trial* trial) { return trial && trial->run.result.degraded ? 1 : 0; }
int isac_trial_iterations(const isac_trial* trial) { return trial ? trial->run.result.iterations : 0; }

isac_status isac_trial_report(const isac_trial* trial, char** out) {
  return guarded([&] {
    require_ptr(trial, "trial");
    require_ptr(out, "out");
    std::ostringstream os;
    isac::print_report(os, trial->run.result);
    *out = dup(os.str());
  });
}

isac_status isac_trial_trace_csv(const isac_trial* trial, char** out) {
  return guarded([&] {
    require_ptr(trial, "trial");
    require_ptr(out, "out");
    std::ostringstream os;
    isac::write_trace_csv(os, trial->run.state.rows);
    *out = dup(os.str());
  });
}

isac_status isac_sweep_run(const isac_config* cfg, int trials, const char* out_path, int threads, int* converged,
                           int* total) {
  return guarded([&] {
    require_ptr(cfg, "config");
    require_ptr(out_path, "out_path");
    isac::Config c = cfg->cfg;
    if (trials > 0) c.set("sweep.trials", std::to_string(trials));
    const isac::SweepSpec spec = isac::SweepSpec::from_config(c);
    const isac::SweepResult res = isac::run_sweep(spec, threads);
    isac::write_sweep(res, out_path);
    int ok = 0;
    for (const auto& t : res.trials) ok += t.converged ? 1 : 0;
    if (converged) *converged = ok;
    if (total) *total = static_cast<int>(res.trials.size());
  });
}

isac_status isac_self_check(uint64_t seed, int* passed, char** log) {
  return guarded([&] {
    require_ptr(passed, "passed");
    std::ostringstream os;
    *passed = isac::run_self_checks(os, seed) ? 1 : 0;
    if (log) *log = dup(os.str());
  });
}

}  // extern "C"
