#include "specmatch.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <string>

#include "config.hpp"
#include "equilibrium.hpp"
#include "errors.hpp"
#include "mechanisms.hpp"
#include "serialization.hpp"
#include "simulation.hpp"
#include "transfer.hpp"
#include "utf.hpp"

using namespace specmatch;

struct sm_instance {
  NetworkInstance inst;
  SolverConfig solver;
};

struct sm_matching {
  Matching matching;
};

namespace {

thread_local std::string g_last_error;

sm_status fail(sm_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

sm_status ok() {
  g_last_error.clear();
  return SM_OK;
}

template <typename Fn>
sm_status guarded(const Fn& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    return fail(SM_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(SM_ERR_IO, e.what());
  } catch (const IterationCapExceeded& e) {
    return fail(SM_ERR_ITERATION_CAP, e.what());
  } catch (const InstanceTooLarge& e) {
    return fail(SM_ERR_INSTANCE_TOO_LARGE, e.what());
  } catch (const AssignmentMismatch& e) {
    return fail(SM_ERR_ASSIGNMENT_MISMATCH, e.what());
  } catch (const EmptyInput& e) {
    return fail(SM_ERR_EMPTY_INPUT, e.what());
  } catch (const ValidationError& e) {
    return fail(SM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SM_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sm_status_name(sm_status status) {
  switch (status) {
    case SM_OK: return "ok";
    case SM_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SM_ERR_IO: return "io-error";
    case SM_ERR_PARSE: return "parse-error";
    case SM_ERR_INFEASIBLE: return "infeasible-reservation";
    case SM_ERR_TARGET_UNREACHABLE: return "target-unreachable";
    case SM_ERR_ITERATION_CAP: return "iteration-cap-exceeded";
    case SM_ERR_INSTANCE_TOO_LARGE: return "instance-too-large";
    case SM_ERR_NO_SOLUTION: return "no-solution";
    case SM_ERR_ASSIGNMENT_MISMATCH: return "assignment-mismatch";
    case SM_ERR_EMPTY_INPUT: return "empty-input";
    case SM_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* sm_last_error(void) { return g_last_error.c_str(); }

const char* sm_version(void) { return "1.0.0"; }

sm_status sm_instance_generate(const char* config_path, int pus, int sus,
                               uint64_t seed, sm_instance** out) {
  if (!out) return fail(SM_ERR_INVALID_ARGUMENT, "out must not be null");
  return guarded([&]() -> sm_status {
    CliConfig cfg =
        config_path ? load_cli_config(config_path) : parse_cli_config(std::string());
    const int m_count = pus >= 0 ? pus : cfg.pus;
    const int n_count = sus >= 0 ? sus : cfg.sus;
    NetworkInstance inst = generate_topology(cfg.topology, m_count, n_count, seed);
    *out = new sm_instance{std::move(inst), cfg.solver};
    return ok();
  });
}

sm_status sm_instance_load(const char* path, sm_instance** out) {
  if (!path || !out) return fail(SM_ERR_INVALID_ARGUMENT, "path/out must not be null");
  return guarded([&]() -> sm_status {
    NetworkInstance inst = load_instance(path);
    *out = new sm_instance{std::move(inst), SolverConfig{}};
    return ok();
  });
}

sm_status sm_instance_save(const sm_instance* inst, const char* path) {
  if (!inst || !path) return fail(SM_ERR_INVALID_ARGUMENT, "inst/path must not be null");
  return guarded([&]() -> sm_status {
    save_instance(inst->inst, path);
    return ok();
  });
}

void sm_instance_free(sm_instance* inst) { delete inst; }

int sm_instance_pu_count(const sm_instance* inst) {
  return inst ? inst->inst.pu_count() : -1;
}

int sm_instance_su_count(const sm_instance* inst) {
  return inst ? inst->inst.su_count() : -1;
}

sm_status sm_solve_utf(const sm_instance* inst, int pu, int su, double su_utility,
                       double* pu_utility, double* relay_power, double* access_time) {
  if (!inst) return fail(SM_ERR_INVALID_ARGUMENT, "inst must not be null");
  if (pu < 0 || pu >= inst->inst.pu_count() || su < 0 || su >= inst->inst.su_count())
    return fail(SM_ERR_INVALID_ARGUMENT, "pair index out of range");
  if (!(su_utility >= 0.0))
    return fail(SM_ERR_INVALID_ARGUMENT, "su_utility must be nonnegative");
  return guarded([&]() -> sm_status {
    const UtfSolution sol = solve_utf(inst->inst, pu, su, su_utility, inst->solver);
    if (!sol.feasible)
      return fail(SM_ERR_INFEASIBLE, "reservation exceeds the pair's range");
    if (pu_utility) *pu_utility = sol.pu_utility;
    if (relay_power) *relay_power = sol.exchange.relay_power;
    if (access_time) *access_time = sol.exchange.access_time;
    return ok();
  });
}

sm_status sm_inverse_utf(const sm_instance* inst, int pu, int su, double pu_utility,
                         double* su_utility) {
  if (!inst) return fail(SM_ERR_INVALID_ARGUMENT, "inst must not be null");
  if (pu < 0 || pu >= inst->inst.pu_count() || su < 0 || su >= inst->inst.su_count())
    return fail(SM_ERR_INVALID_ARGUMENT, "pair index out of range");
  return guarded([&]() -> sm_status {
    const auto delta = inverse_utf(inst->inst, pu, su, pu_utility, inst->solver);
    if (!delta)
      return fail(SM_ERR_TARGET_UNREACHABLE, "target above the pair's maximum");
    if (su_utility) *su_utility = *delta;
    return ok();
  });
}

void sm_matching_free(sm_matching* matching) { delete matching; }

int sm_matching_pair_count(const sm_matching* matching) {
  return matching ? matching->matching.pair_count() : -1;
}

sm_status sm_matching_pair(const sm_matching* matching, int index, int* pu, int* su,
                           double* relay_power, double* access_time,
                           double* su_utility) {
  if (!matching) return fail(SM_ERR_INVALID_ARGUMENT, "matching must not be null");
  const auto pairs = matching->matching.pairs();
  if (index < 0 || index >= static_cast<int>(pairs.size()))
    return fail(SM_ERR_INVALID_ARGUMENT, "pair index out of range");
  const MatchedPair& pair = pairs[static_cast<size_t>(index)];
  if (pu) *pu = pair.pu;
  if (su) *su = pair.su;
  if (relay_power) *relay_power = pair.exchange.relay_power;
  if (access_time) *access_time = pair.exchange.access_time;
  if (su_utility) *su_utility = pair.su_utility;
  return ok();
}

sm_status sm_matching_save(const sm_matching* matching, const char* path) {
  if (!matching || !path)
    return fail(SM_ERR_INVALID_ARGUMENT, "matching/path must not be null");
  return guarded([&]() -> sm_status {
    save_matching(matching->matching, path);
    return ok();
  });
}

sm_status sm_matching_load(const char* path, const sm_instance* inst,
                           sm_matching** out) {
  if (!path || !inst || !out)
    return fail(SM_ERR_INVALID_ARGUMENT, "path/inst/out must not be null");
  return guarded([&]() -> sm_status {
    Matching matching =
        load_matching(path, inst->inst.pu_count(), inst->inst.su_count());
    *out = new sm_matching{std::move(matching)};
    return ok();
  });
}

sm_status sm_run_mechanism(const sm_instance* inst, const char* mechanism,
                           double epsilon, const char* trace_path, sm_matching** out,
                           long* rounds) {
  if (!inst || !mechanism || !out)
    return fail(SM_ERR_INVALID_ARGUMENT, "inst/mechanism/out must not be null");
  return guarded([&]() -> sm_status {
    MechanismConfig cfg;
    cfg.record_trace = trace_path != nullptr;
    MechanismTrace trace =
        run_mechanism(inst->inst, mechanism, epsilon, inst->solver, cfg);
    if (trace_path) save_trace(trace, trace_path);
    if (rounds) *rounds = trace.rounds;
    *out = new sm_matching{std::move(trace.matching)};
    return ok();
  });
}

sm_status sm_solve_brute_force(const sm_instance* inst, sm_matching** out) {
  if (!inst || !out) return fail(SM_ERR_INVALID_ARGUMENT, "inst/out must not be null");
  return guarded([&]() -> sm_status {
    EnumerationConfig cfg;
    const auto all = brute_force_equilibria(inst->inst, inst->solver, cfg);
    if (all.empty()) return fail(SM_ERR_NO_SOLUTION, "no equilibrium found");
    const CurveTransfer transfer(inst->inst, inst->solver, cfg.curve_points);
    int best = find_pu_dominant(transfer, all, cfg.tol);
    if (best < 0) {
      // No member dominates numerically; fall back to the largest PU total.
      double top = -1e300;
      for (size_t i = 0; i < all.size(); ++i) {
        double total = 0.0;
        for (double v : pu_utilities_of(transfer, all[i])) total += v;
        if (total > top) {
          top = total;
          best = static_cast<int>(i);
        }
      }
    }
    *out = new sm_matching{all[static_cast<size_t>(best)]};
    return ok();
  });
}

sm_status sm_verify(const sm_instance* inst, const sm_matching* matching, int use_gs,
                    double tol, int* verdict, char** report) {
  if (!inst || !matching || !verdict)
    return fail(SM_ERR_INVALID_ARGUMENT, "inst/matching/verdict must not be null");
  if (matching->matching.pu_count() != inst->inst.pu_count() ||
      matching->matching.su_count() != inst->inst.su_count())
    return fail(SM_ERR_INVALID_ARGUMENT, "matching does not fit the instance");
  if (!(tol > 0.0)) return fail(SM_ERR_INVALID_ARGUMENT, "tol must be positive");
  return guarded([&]() -> sm_status {
    EquilibriumCertificate cert;
    if (use_gs) {
      const GsTransfer transfer(inst->inst, inst->solver);
      cert = verify_equilibrium(transfer, matching->matching, tol);
    } else {
      const UtfTransfer transfer(inst->inst, inst->solver);
      cert = verify_equilibrium(transfer, matching->matching, tol);
    }
    *verdict = cert.verdict ? 1 : 0;
    if (report) {
      *report = copy_string(cert.describe());
      if (!*report) return fail(SM_ERR_INTERNAL, "out of memory");
    }
    return ok();
  });
}

void sm_string_free(char* text) { delete[] text; }

sm_status sm_fixed_da(int pu_count, int su_count, const int* pu_prefs,
                      const int* pu_pref_len, const int* su_prefs,
                      const int* su_pref_len, int su_proposes, int* pu_to_su_out) {
  if (pu_count < 0 || su_count < 0)
    return fail(SM_ERR_INVALID_ARGUMENT, "user counts must be nonnegative");
  if ((pu_count > 0 && (!pu_prefs || !pu_pref_len)) ||
      (su_count > 0 && (!su_prefs || !su_pref_len)) || !pu_to_su_out)
    return fail(SM_ERR_INVALID_ARGUMENT, "preference arrays must not be null");
  return guarded([&]() -> sm_status {
    PreferenceLists prefs;
    prefs.pu_prefs.resize(static_cast<size_t>(pu_count));
    prefs.su_prefs.resize(static_cast<size_t>(su_count));
    const int* cursor = pu_prefs;
    for (int m = 0; m < pu_count; ++m) {
      if (pu_pref_len[m] < 0)
        return fail(SM_ERR_INVALID_ARGUMENT, "negative preference list length");
      prefs.pu_prefs[static_cast<size_t>(m)].assign(cursor, cursor + pu_pref_len[m]);
      cursor += pu_pref_len[m];
    }
    cursor = su_prefs;
    for (int n = 0; n < su_count; ++n) {
      if (su_pref_len[n] < 0)
        return fail(SM_ERR_INVALID_ARGUMENT, "negative preference list length");
      prefs.su_prefs[static_cast<size_t>(n)].assign(cursor, cursor + su_pref_len[n]);
      cursor += su_pref_len[n];
    }
    const std::vector<int> result = deferred_acceptance(prefs, su_proposes != 0);
    for (int m = 0; m < pu_count; ++m) pu_to_su_out[m] = result[static_cast<size_t>(m)];
    return ok();
  });
}

sm_status sm_run_sweep(const char* config_path, const char* rows_csv_path,
                       const char* summary_csv_path, int jobs) {
  if (!rows_csv_path || !summary_csv_path)
    return fail(SM_ERR_INVALID_ARGUMENT, "output paths must not be null");
  return guarded([&]() -> sm_status {
    CliConfig cfg =
        config_path ? load_cli_config(config_path) : parse_cli_config(std::string());
    if (jobs > 0) cfg.experiment.jobs = jobs;
    const auto rows = run_sweep(cfg.experiment, cfg.topology, cfg.solver);
    save_rows_csv(rows, rows_csv_path);
    save_summary_csv(summarize(rows), summary_csv_path);
    return ok();
  });
}

sm_status sm_default_config(char** text) {
  if (!text) return fail(SM_ERR_INVALID_ARGUMENT, "text must not be null");
  *text = copy_string(default_config_text());
  if (!*text) return fail(SM_ERR_INTERNAL, "out of memory");
  return ok();
}

}  // extern "C"
