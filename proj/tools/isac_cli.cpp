// Command-line front end. Talks to the simulator only through the C interface.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isac/isac.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTrialFailure = 1;
constexpr int kExitUsage = 2;

struct Args {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string scheme = "proposed";
  int trials = 0;
};

int report_error(isac_status st) {
  std::cerr << "error: " << isac_status_string(st) << ": " << isac_last_error() << '\n';
  // configuration and argument problems are usage errors
  return st == ISAC_E_CONFIG || st == ISAC_E_IO || st == ISAC_E_UNKNOWN_SCHEME || st == ISAC_E_INVALID_INPUT
             ? kExitUsage
             : kExitTrialFailure;
}

struct ConfigHandle {
  isac_config* p = nullptr;
  ~ConfigHandle() { isac_config_free(p); }
};

struct TrialHandle {
  isac_trial* p = nullptr;
  ~TrialHandle() { isac_trial_free(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  isac_string_free(s);
  return out;
}

int run_trial(const Args& a, bool trace) {
  ConfigHandle cfg;
  if (isac_status st = isac_config_load(a.config.c_str(), &cfg.p); st != ISAC_OK) return report_error(st);
  TrialHandle trial;
  if (isac_status st = isac_trial_run(cfg.p, a.scheme.c_str(), a.seed, &trial.p); st != ISAC_OK)
    return report_error(st);
  char* text = nullptr;
  if (isac_status st = isac_trial_report(trial.p, &text); st != ISAC_OK) return report_error(st);
  std::cout << take(text);
  if (trace) {
    char* csv = nullptr;
    if (isac_status st = isac_trial_trace_csv(trial.p, &csv); st != ISAC_OK) return report_error(st);
    const std::string body = take(csv);
    if (a.out.empty()) {
      std::cout << body;
    } else {
      std::ofstream f(a.out, std::ios::binary);
      f << body;
      if (!f) {
        std::cerr << "error: cannot write '" << a.out << "'\n";
        return kExitUsage;
      }
      std::cout << "trace written to " << a.out << '\n';
    }
  }
  if (!isac_trial_converged(trial.p)) {
    std::cerr << "trial did not converge to a feasible point (see diagnostic above)\n";
    return kExitTrialFailure;
  }
  return kExitOk;
}

int run_sweep(const Args& a) {
  ConfigHandle cfg;
  if (isac_status st = isac_config_load(a.config.c_str(), &cfg.p); st != ISAC_OK) return report_error(st);
  if (a.seed != 0) {
    if (isac_status st = isac_config_set(cfg.p, "seed", std::to_string(a.seed).c_str()); st != ISAC_OK)
      return report_error(st);
  }
  const std::string out = a.out.empty() ? "sweep.csv" : a.out;
  int converged = 0;
  int total = 0;
  if (isac_status st = isac_sweep_run(cfg.p, a.trials, out.c_str(), 0, &converged, &total); st != ISAC_OK)
    return report_error(st);
  std::cout << "wrote " << out << " (" << total << " trials, " << converged << " converged)\n";
  return kExitOk;
}

int run_validate(const Args& a) {
  int passed = 0;
  char* log = nullptr;
  if (isac_status st = isac_self_check(a.seed != 0 ? a.seed : 1, &passed, &log); st != ISAC_OK)
    return report_error(st);
  std::cout << take(log);
  return passed ? kExitOk : kExitTrialFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure RIS-ISAC beamforming simulator with movable antennas"};
  app.require_subcommand(1);
  Args a;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", a.config, "configuration file (key=value)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", a.seed, "trial seed (default: config seed)");
    sub->add_option("--out", a.out, "output path");
    sub->add_option("--scheme", a.scheme, "proposed, fpa, rpa, separate, comm_only, random_phase");
    sub->add_option("--trials", a.trials, "trials per sweep point")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "run one trial and print its metrics");
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep described by sweep.* config keys");
  auto* trace = app.add_subcommand("trace", "run one trial and emit the iteration trace");
  auto* validate = app.add_subcommand("validate", "quick oracle and invariant checks");
  add_common(run, true);
  add_common(sweep, true);
  add_common(trace, true);
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*run) return run_trial(a, false);
  if (*trace) return run_trial(a, true);
  if (*sweep) return run_sweep(a);
  return run_validate(a);
}
