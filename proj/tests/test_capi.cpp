// Exercises the shared-library C interface end to end: everything the CLI
// relies on, plus the error paths.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "specmatch.h"

namespace {

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/specmatch_capi_XXXXXX";
    path = mkdtemp(tmpl);
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(sm_status_name(SM_OK)) == "ok");
  CHECK(std::string(sm_status_name(SM_ERR_ITERATION_CAP)) == "iteration-cap-exceeded");
  CHECK(std::strlen(sm_version()) > 0);
}

TEST_CASE("generate, save, load") {
  TempDir dir;
  sm_instance* inst = nullptr;
  REQUIRE(sm_instance_generate(nullptr, 2, 3, 11, &inst) == SM_OK);
  CHECK(sm_instance_pu_count(inst) == 2);
  CHECK(sm_instance_su_count(inst) == 3);

  const std::string path = dir.file("inst.txt");
  REQUIRE(sm_instance_save(inst, path.c_str()) == SM_OK);

  sm_instance* loaded = nullptr;
  REQUIRE(sm_instance_load(path.c_str(), &loaded) == SM_OK);
  CHECK(sm_instance_pu_count(loaded) == 2);
  CHECK(sm_instance_su_count(loaded) == 3);

  sm_instance_free(inst);
  sm_instance_free(loaded);

  CHECK(sm_instance_load("/nonexistent/file", &loaded) == SM_ERR_IO);
  CHECK(std::strlen(sm_last_error()) > 0);
  CHECK(sm_instance_generate(nullptr, -1, 3, 1, nullptr) == SM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("transfer solves through the api") {
  sm_instance* inst = nullptr;
  REQUIRE(sm_instance_generate(nullptr, 1, 1, 80, &inst) == SM_OK);

  double value = 0.0, p = 0.0, t = 0.0;
  REQUIRE(sm_solve_utf(inst, 0, 0, 0.0, &value, &p, &t) == SM_OK);
  CHECK(value > 0.0);
  CHECK(p >= 0.0);
  CHECK(t >= 0.0);

  double delta = -1.0;
  REQUIRE(sm_inverse_utf(inst, 0, 0, value, &delta) == SM_OK);
  CHECK(delta <= 1e-6);
  CHECK(sm_inverse_utf(inst, 0, 0, value + 1.0, &delta) == SM_ERR_TARGET_UNREACHABLE);
  CHECK(sm_solve_utf(inst, 0, 0, 1e9, &value, &p, &t) == SM_ERR_INFEASIBLE);
  CHECK(sm_solve_utf(inst, 5, 0, 0.0, &value, &p, &t) == SM_ERR_INVALID_ARGUMENT);

  sm_instance_free(inst);
}

TEST_CASE("mechanisms, matchings and verification through the api") {
  TempDir dir;
  sm_instance* inst = nullptr;
  REQUIRE(sm_instance_generate(nullptr, 2, 2, 101, &inst) == SM_OK);

  for (const char* mech : {"g-dac", "g-rdac", "gsg-rdac"}) {
    sm_matching* matching = nullptr;
    long rounds = -1;
    const std::string trace_path = dir.file(std::string("trace_") + mech + ".log");
    REQUIRE(sm_run_mechanism(inst, mech, 0.01, trace_path.c_str(), &matching,
                             &rounds) == SM_OK);
    CHECK(rounds >= 1);
    std::ifstream trace(trace_path);
    REQUIRE(trace.good());

    const int pairs = sm_matching_pair_count(matching);
    CHECK(pairs >= 0);
    for (int i = 0; i < pairs; ++i) {
      int pu = -1, su = -1;
      double rp = -1, at = -1, delta = -1;
      REQUIRE(sm_matching_pair(matching, i, &pu, &su, &rp, &at, &delta) == SM_OK);
      CHECK(pu >= 0);
      CHECK(su >= 0);
      CHECK(delta >= -1e-9);
    }

    const std::string mpath = dir.file(std::string("match_") + mech + ".txt");
    REQUIRE(sm_matching_save(matching, mpath.c_str()) == SM_OK);
    sm_matching* loaded = nullptr;
    REQUIRE(sm_matching_load(mpath.c_str(), inst, &loaded) == SM_OK);
    CHECK(sm_matching_pair_count(loaded) == pairs);

    int verdict = 0;
    char* report = nullptr;
    const int use_gs = std::string(mech) == "gsg-rdac" ? 1 : 0;
    REQUIRE(sm_verify(inst, loaded, use_gs, 1e-6, &verdict, &report) == SM_OK);
    CHECK(verdict == 1);
    REQUIRE(report != nullptr);
    CHECK(std::strstr(report, "verdict equilibrium") != nullptr);
    sm_string_free(report);

    sm_matching_free(matching);
    sm_matching_free(loaded);
  }

  CHECK(sm_run_mechanism(inst, "nope", 0.01, nullptr, nullptr, nullptr) ==
        SM_ERR_INVALID_ARGUMENT);
  sm_instance_free(inst);
}

TEST_CASE("a tampered matching fails verification") {
  TempDir dir;
  sm_instance* inst = nullptr;
  REQUIRE(sm_instance_generate(nullptr, 1, 1, 80, &inst) == SM_OK);

  const std::string path = dir.file("bad.txt");
  std::ofstream out(path);
  out << "m 0 n 0 p 0 t 0 delta 99\n";  // far beyond anything sustainable
  out.close();

  sm_matching* matching = nullptr;
  REQUIRE(sm_matching_load(path.c_str(), inst, &matching) == SM_OK);
  int verdict = 1;
  char* report = nullptr;
  REQUIRE(sm_verify(inst, matching, 0, 1e-6, &verdict, &report) == SM_OK);
  CHECK(verdict == 0);
  REQUIRE(report != nullptr);
  CHECK(std::strstr(report, "IR") != nullptr);
  sm_string_free(report);
  sm_matching_free(matching);
  sm_instance_free(inst);
}

TEST_CASE("brute force solve agrees with the forward auction") {
  sm_instance* inst = nullptr;
  REQUIRE(sm_instance_generate(nullptr, 2, 2, 151, &inst) == SM_OK);

  sm_matching* exact = nullptr;
  REQUIRE(sm_solve_brute_force(inst, &exact) == SM_OK);
  int verdict = 0;
  REQUIRE(sm_verify(inst, exact, 0, 1e-6, &verdict, nullptr) == SM_OK);
  CHECK(verdict == 1);

  sm_matching* auction = nullptr;
  REQUIRE(sm_run_mechanism(inst, "g-dac", 0.01, nullptr, &auction, nullptr) == SM_OK);
  CHECK(sm_matching_pair_count(auction) == sm_matching_pair_count(exact));

  sm_matching_free(exact);
  sm_matching_free(auction);
  sm_instance_free(inst);

  // Enumeration refuses oversized markets.
  REQUIRE(sm_instance_generate(nullptr, 5, 5, 1, &inst) == SM_OK);
  CHECK(sm_solve_brute_force(inst, &exact) == SM_ERR_INSTANCE_TOO_LARGE);
  sm_instance_free(inst);
}

TEST_CASE("fixed deferred acceptance reproduces the worked example") {
  const std::vector<int> pu_prefs = {0, 1, 2, 1, 2, 0, 2, 0, 1};
  const std::vector<int> pu_len = {3, 3, 3};
  const std::vector<int> su_prefs = {1, 2, 0, 2, 0, 1, 0, 1, 2};
  const std::vector<int> su_len = {3, 3, 3};

  std::vector<int> fwd(3, -1);
  REQUIRE(sm_fixed_da(3, 3, pu_prefs.data(), pu_len.data(), su_prefs.data(),
                      su_len.data(), 0, fwd.data()) == SM_OK);
  CHECK(fwd == std::vector<int>{0, 1, 2});

  std::vector<int> rev(3, -1);
  REQUIRE(sm_fixed_da(3, 3, pu_prefs.data(), pu_len.data(), su_prefs.data(),
                      su_len.data(), 1, rev.data()) == SM_OK);
  CHECK(rev == std::vector<int>{2, 0, 1});

  CHECK(sm_fixed_da(3, 3, nullptr, nullptr, nullptr, nullptr, 0, nullptr) ==
        SM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("sweep through the api") {
  TempDir dir;
  const std::string cfg_path = dir.file("sweep.toml");
  {
    std::ofstream cfg(cfg_path);
    cfg << "[experiment]\nm_values = [1]\nn_values = [1, 2]\nseeds = 2\n"
           "mechanisms = [\"g-dac\", \"g-rdac\"]\nepsilon = 0.01\n";
  }
  const std::string rows = dir.file("rows.csv");
  const std::string summary = dir.file("summary.csv");
  REQUIRE(sm_run_sweep(cfg_path.c_str(), rows.c_str(), summary.c_str(), 1) == SM_OK);

  std::ifstream rows_in(rows);
  std::string header;
  std::getline(rows_in, header);
  CHECK(header ==
        "seed,M,N,mechanism,total_pu_utility,total_su_utility,matched_pairs,"
        "rounds,runtime_ms");
  int lines = 0;
  for (std::string line; std::getline(rows_in, line);) ++lines;
  CHECK(lines == 8);

  std::ifstream summary_in(summary);
  std::getline(summary_in, header);
  CHECK(header == "M,N,mechanism,mean_pu,stderr_pu,mean_su,stderr_su,gap");

  CHECK(sm_run_sweep(dir.file("missing.toml").c_str(), rows.c_str(),
                     summary.c_str(), 1) == SM_ERR_IO);
}

TEST_CASE("default config text round trips") {
  char* text = nullptr;
  REQUIRE(sm_default_config(&text) == SM_OK);
  REQUIRE(text != nullptr);
  CHECK(std::strstr(text, "[topology]") != nullptr);
  CHECK(std::strstr(text, "noise_dbm = -105") != nullptr);
  sm_string_free(text);
}
