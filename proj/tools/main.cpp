// specmatch command line: instance generation, mechanism runs, equilibrium
// verification and experiment sweeps over the shared-library C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specmatch.h"

namespace {

// 0 = success, 1 = verification/convergence failure, 2 = usage/validation.
int exit_code_for(sm_status status) {
  switch (status) {
    case SM_OK:
      return 0;
    case SM_ERR_ITERATION_CAP:
    case SM_ERR_NO_SOLUTION:
      return 1;
    default:
      return 2;
  }
}

int report_failure(sm_status status) {
  std::fprintf(stderr, "error: %s: %s\n", sm_status_name(status), sm_last_error());
  return exit_code_for(status);
}

struct InstanceHandle {
  sm_instance* ptr = nullptr;
  ~InstanceHandle() { sm_instance_free(ptr); }
};

struct MatchingHandle {
  sm_matching* ptr = nullptr;
  ~MatchingHandle() { sm_matching_free(ptr); }
};

int cmd_gen(const std::string& config, uint64_t seed, const std::string& out,
            int pus, int sus) {
  InstanceHandle inst;
  sm_status status = sm_instance_generate(config.empty() ? nullptr : config.c_str(),
                                          pus, sus, seed, &inst.ptr);
  if (status != SM_OK) return report_failure(status);
  status = sm_instance_save(inst.ptr, out.c_str());
  if (status != SM_OK) return report_failure(status);
  std::printf("wrote %s (%d PUs, %d SUs, seed %llu)\n", out.c_str(),
              sm_instance_pu_count(inst.ptr), sm_instance_su_count(inst.ptr),
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& mechanism,
              double epsilon, const std::string& out, const std::string& trace) {
  InstanceHandle inst;
  sm_status status = sm_instance_load(instance_path.c_str(), &inst.ptr);
  if (status != SM_OK) return report_failure(status);

  MatchingHandle matching;
  long rounds = 0;
  if (mechanism == "brute-force") {
    status = sm_solve_brute_force(inst.ptr, &matching.ptr);
  } else {
    status = sm_run_mechanism(inst.ptr, mechanism.c_str(), epsilon,
                              trace.empty() ? nullptr : trace.c_str(), &matching.ptr,
                              &rounds);
  }
  if (status != SM_OK) return report_failure(status);

  status = sm_matching_save(matching.ptr, out.c_str());
  if (status != SM_OK) return report_failure(status);
  std::printf("%s: %d pair(s)", mechanism.c_str(),
              sm_matching_pair_count(matching.ptr));
  if (mechanism != "brute-force") std::printf(" in %ld round(s)", rounds);
  std::printf("; wrote %s\n", out.c_str());
  return 0;
}

int cmd_verify(const std::string& instance_path, const std::string& matching_path,
               bool use_gs, double tol) {
  InstanceHandle inst;
  sm_status status = sm_instance_load(instance_path.c_str(), &inst.ptr);
  if (status != SM_OK) return report_failure(status);
  MatchingHandle matching;
  status = sm_matching_load(matching_path.c_str(), inst.ptr, &matching.ptr);
  if (status != SM_OK) return report_failure(status);

  int verdict = 0;
  char* report = nullptr;
  status = sm_verify(inst.ptr, matching.ptr, use_gs ? 1 : 0, tol, &verdict, &report);
  if (status != SM_OK) return report_failure(status);
  if (report) {
    std::fputs(report, stdout);
    sm_string_free(report);
  }
  return verdict ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& out_prefix, int jobs) {
  const std::string rows = out_prefix + ".rows.csv";
  const std::string summary = out_prefix + ".summary.csv";
  const sm_status status = sm_run_sweep(config.empty() ? nullptr : config.c_str(),
                                        rows.c_str(), summary.c_str(), jobs);
  if (status != SM_OK) return report_failure(status);
  std::printf("wrote %s and %s\n", rows.c_str(), summary.c_str());
  return 0;
}

// The 3x3 worked example with cyclic preferences and its three equilibria.
int cmd_example1() {
  const std::vector<int> pu_prefs = {0, 1, 2, 1, 2, 0, 2, 0, 1};
  const std::vector<int> pu_len = {3, 3, 3};
  const std::vector<int> su_prefs_true = {1, 2, 0, 2, 0, 1, 0, 1, 2};
  const std::vector<int> su_len_true = {3, 3, 3};

  const auto run = [&](const char* label, const std::vector<int>& su_prefs,
                       const std::vector<int>& su_len, bool su_proposes) -> int {
    std::vector<int> assignment(3, -1);
    const sm_status status =
        sm_fixed_da(3, 3, pu_prefs.data(), pu_len.data(), su_prefs.data(),
                    su_len.data(), su_proposes ? 1 : 0, assignment.data());
    if (status != SM_OK) return report_failure(status);
    std::printf("%-34s", label);
    for (int m = 0; m < 3; ++m) {
      if (assignment[m] >= 0)
        std::printf("  (m%d,n%d)", m + 1, assignment[m] + 1);
      else
        std::printf("  (m%d,-)", m + 1);
    }
    std::printf("\n");
    return 0;
  };

  int rc = run("PU-proposing deferred acceptance", su_prefs_true, su_len_true, false);
  if (rc) return rc;
  rc = run("SU-proposing deferred acceptance", su_prefs_true, su_len_true, true);
  if (rc) return rc;
  // SU n1 drops m1 from its report: {m2, m3}.
  const std::vector<int> report_a = {1, 2, 2, 0, 1, 0, 1, 2};
  const std::vector<int> len_a = {2, 3, 3};
  rc = run("n1 reports {m2, m3}", report_a, len_a, false);
  if (rc) return rc;
  // SU n1 reports only {m2}.
  const std::vector<int> report_b = {1, 2, 0, 1, 0, 1, 2};
  const std::vector<int> len_b = {1, 3, 3};
  return run("n1 reports {m2}", report_b, len_b, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specmatch: cooperative spectrum sharing as a two-sided matching "
               "market"};
  app.require_subcommand(1);
  {
    char* text = nullptr;
    if (sm_default_config(&text) == SM_OK && text) {
      app.footer(std::string("Config file defaults:\n") + text);
      sm_string_free(text);
    }
  }

  std::string config, out, instance_path, matching_path, trace;
  std::string mechanism = "g-dac";
  uint64_t seed = 1;
  int pus = -1, sus = -1, jobs = 0;
  double epsilon = 0.01;
  double tol = 1e-6;
  bool use_gs = false;

  auto* gen = app.add_subcommand("gen", "Generate a random network instance file");
  gen->add_option("--config", config, "Config file ([market]/[topology] sections)");
  gen->add_option("--seed", seed, "Topology seed")->capture_default_str();
  gen->add_option("--out", out, "Output instance file")->required();
  gen->add_option("--pus", pus, "Override the PU count");
  gen->add_option("--sus", sus, "Override the SU count");

  auto* solve = app.add_subcommand("solve", "Run a mechanism on an instance");
  solve->add_option("--instance", instance_path, "Instance file")->required();
  solve->add_option("--mechanism", mechanism, "Mechanism")
      ->check(CLI::IsMember({"g-dac", "g-rdac", "gsg-rdac", "brute-force"}))
      ->capture_default_str();
  solve->add_option("--epsilon", epsilon, "Offer step size")->capture_default_str();
  solve->add_option("--out", out, "Output matching file")->required();
  solve->add_option("--trace", trace, "Write the round-by-round trace here");

  auto* verify = app.add_subcommand("verify", "Check a matching for stability");
  verify->add_option("--instance", instance_path, "Instance file")->required();
  verify->add_option("--matching", matching_path, "Matching file")->required();
  verify->add_flag("--gs", use_gs, "Verify against the guess-based curves");
  verify->add_option("--tol", tol, "Certificate tolerance")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Run the configured experiment grid");
  sweep->add_option("--config", config, "Config file ([experiment] section)");
  sweep->add_option("--out", out, "Output prefix (<out>.rows.csv, <out>.summary.csv)")
      ->required();
  sweep->add_option("--jobs", jobs, "Parallel cells (0 = config value)")
      ->capture_default_str();

  app.add_subcommand("example1",
                     "Print the worked 3x3 fixed-preference market outcomes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors exit 2
  }

  if (gen->parsed()) return cmd_gen(config, seed, out, pus, sus);
  if (solve->parsed()) return cmd_solve(instance_path, mechanism, epsilon, out, trace);
  if (verify->parsed()) return cmd_verify(instance_path, matching_path, use_gs, tol);
  if (sweep->parsed()) return cmd_sweep(config, out, jobs);
  return cmd_example1();
}
