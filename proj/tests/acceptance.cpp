// Acceptance suite: one checked criterion per line, nonzero exit when any
// fails. Tolerances are fixed here, not tunable from outside.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "mechanisms.hpp"
#include "oracle.hpp"
#include "simulation.hpp"
#include "transfer.hpp"
#include "utf.hpp"

using namespace specmatch;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

MechanismConfig mech_config(const NetworkInstance& inst, const SolverConfig& scfg) {
  MechanismConfig cfg;
  cfg.repair_factory = [&inst, &scfg]() {
    return std::unique_ptr<TransferSystem>(new CurveTransfer(inst, scfg));
  };
  return cfg;
}

std::string fmt_int(long v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---- criterion 1: the worked 3x3 ordinal market ---------------------------

void criterion_1(Check& check) {
  PreferenceLists prefs;
  prefs.pu_prefs = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  prefs.su_prefs = {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}};

  const auto assignment = [](const Matching& matching) {
    std::vector<int> out(static_cast<size_t>(matching.pu_count()));
    for (int m = 0; m < matching.pu_count(); ++m)
      out[static_cast<size_t>(m)] = matching.su_of(m);
    return out;
  };

  check.require(assignment(dac_fixed(prefs)) == std::vector<int>{0, 1, 2},
                "PU-proposing run is not mu^a");
  check.require(assignment(rdac_fixed(prefs)) == std::vector<int>{2, 0, 1},
                "SU-proposing run is not mu^c");

  std::vector<SuReportStrategy> reports(3);
  reports[0] = SuReportStrategy::truncate({1, 2});
  check.require(assignment(dac_with_reports(prefs, reports)) ==
                    std::vector<int>{1, 2, 0},
                "report {m2,m3} does not yield mu^b");
  reports[0] = SuReportStrategy::truncate({1});
  check.require(assignment(dac_with_reports(prefs, reports)) ==
                    std::vector<int>{2, 0, 1},
                "report {m2} does not yield mu^c");
}

// ---- criterion 2: certificate regression ----------------------------------

void criterion_2(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  const double epsilon = 0.01;
  const double tol = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t seed = mix_seed(0xC2, 0, 0, static_cast<uint64_t>(i));
    Rng r(seed ^ 0x5bd1e995);
    const int m_count = 1 + static_cast<int>(r.uniform() * 5);
    const int n_count = 1 + static_cast<int>(r.uniform() * 5);
    const auto inst = generate_topology(topo, m_count, n_count, seed);
    const auto cfg = mech_config(inst, scfg);
    for (bool forward : {true, false}) {
      const UtfTransfer transfer(inst, scfg);
      const MechanismTrace trace = forward ? g_dac(transfer, epsilon, cfg)
                                           : g_rdac(transfer, epsilon, cfg);
      const UtfTransfer fresh(inst, scfg);
      const auto cert = verify_equilibrium(fresh, trace.matching, tol);
      check.require(cert.verdict && cert.violations.empty(),
                    std::string(forward ? "g-dac" : "g-rdac") +
                        " violation on instance " + fmt_int(i) + " (M=" +
                        fmt_int(m_count) + ", N=" + fmt_int(n_count) + ")");
      if (!check.pass) return;
    }
  }
}

// ---- criterion 3: oracle equivalence --------------------------------------

void criterion_3(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  const double epsilon = 0.01;
  const EnumerationConfig ecfg;
  for (int i = 0; i < 50; ++i) {
    const int side = (i % 2 == 0) ? 2 : 3;
    const uint64_t seed = mix_seed(0xC3, static_cast<uint64_t>(side), 0,
                                   static_cast<uint64_t>(i));
    const auto inst = generate_topology(topo, side, side, seed);
    const auto all = brute_force_equilibria(inst, scfg, ecfg);
    check.require(!all.empty(), "no equilibria enumerated on instance " + fmt_int(i));
    if (!check.pass) return;

    const CurveTransfer curves(inst, scfg, ecfg.curve_points);
    const int best = find_pu_dominant(curves, all, 1e-5);
    const int worst = find_pu_dominated(curves, all, 1e-5);
    check.require(best >= 0, "no PU-optimal member on instance " + fmt_int(i));
    check.require(worst >= 0, "no PU-worst member on instance " + fmt_int(i));
    if (!check.pass) return;
    const auto u_best = pu_utilities_of(curves, all[static_cast<size_t>(best)]);
    const auto u_worst = pu_utilities_of(curves, all[static_cast<size_t>(worst)]);

    const auto cfg = mech_config(inst, scfg);
    const UtfTransfer transfer(inst, scfg);
    const auto fwd = pu_utilities_of(transfer, g_dac(transfer, epsilon, cfg).matching);
    const auto rev =
        pu_utilities_of(transfer, g_rdac(transfer, epsilon, cfg).matching);
    for (int m = 0; m < side; ++m) {
      check.require(std::abs(fwd[static_cast<size_t>(m)] -
                             u_best[static_cast<size_t>(m)]) <= 5 * epsilon,
                    "g-dac off the PU-optimal point on instance " + fmt_int(i));
      check.require(std::abs(rev[static_cast<size_t>(m)] -
                             u_worst[static_cast<size_t>(m)]) <= 5 * epsilon,
                    "g-rdac off the PU-worst point on instance " + fmt_int(i));
    }
    if (!check.pass) return;
  }
}

// ---- criterion 4: transfer function properties ----------------------------

void criterion_4(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  for (int fixture = 0; fixture < 5; ++fixture) {
    const uint64_t seed = mix_seed(0xC4, 0, 0, static_cast<uint64_t>(fixture));
    const auto inst = generate_topology(topo, 2, 2, seed);
    const int m = fixture % 2;
    const int n = (fixture / 2) % 2;
    const double cap = su_utility_cap(inst, m, n, scfg);
    if (cap <= 1e-4) continue;
    Rng r(seed ^ 0x1234567);

    // Inverse roundtrip at 1e-6 over 100 random feasible reservations.
    for (int k = 0; k < 100; ++k) {
      const double delta = r.uniform(0.0, cap);
      const UtfSolution sol = solve_utf(inst, m, n, delta, scfg);
      check.require(sol.feasible, "feasible reservation rejected");
      const auto back = inverse_utf(inst, m, n, sol.pu_utility, scfg);
      check.require(back && std::abs(*back - delta) <= 1e-6,
                    "roundtrip error above 1e-6");
      // Tightness of the returned contract.
      check.require(std::abs(pair_su_utility(inst, m, n, sol.exchange) - delta) <=
                        1e-5,
                    "constraint not tight at the optimum");
      if (!check.pass) return;
    }

    // Strict monotonicity with gaps of at least 1e-5.
    for (int k = 0; k < 100; ++k) {
      const double d1 = r.uniform(0.0, cap - 2e-5);
      const double d2 = d1 + 1e-5 + r.uniform(0.0, cap - d1 - 1e-5);
      const double f1 = solve_utf(inst, m, n, d1, scfg).pu_utility;
      const double f2 = solve_utf(inst, m, n, d2, scfg).pu_utility;
      check.require(f1 > f2, "transfer not strictly decreasing");
      if (!check.pass) return;
    }

    // Exhaustive 2-D grid agreement at three reservation levels.
    const auto g0 = inverse_utf(inst, m, n, 0.0, scfg);
    check.require(g0.has_value(), "full-transfer point missing");
    if (!check.pass) return;
    for (double delta : {0.0, 0.25 * *g0, 0.5 * *g0}) {
      const UtfSolution sol = solve_utf(inst, m, n, delta, scfg);
      const auto grid = oracle::solve_utf_grid(inst, m, n, delta, scfg.p_max,
                                               scfg.t_max(inst.pu(m).coop_time),
                                               2000, 2000);
      check.require(grid.feasible && sol.feasible, "grid/solver feasibility mismatch");
      check.require(std::abs(sol.pu_utility - grid.pu_utility) <= 1e-3,
                    "solver disagrees with the 2-D grid beyond 1e-3");
      if (!check.pass) return;
    }
  }
}

// ---- criterion 5: lattice closure ------------------------------------------

void criterion_5(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  const EnumerationConfig ecfg;
  int merged = 0;
  uint64_t fixture = 0;
  Rng pick(0xC5);
  while (merged < 200 && fixture < 80) {
    const uint64_t seed = mix_seed(0xC5, 0, 0, fixture++);
    const auto inst = generate_topology(topo, 2, 2, seed);
    const auto all = brute_force_equilibria(inst, scfg, ecfg);
    const CurveTransfer transfer(inst, scfg, ecfg.curve_points);
    std::vector<std::pair<size_t, size_t>> candidates;
    for (size_t i = 0; i < all.size(); ++i)
      for (size_t j = i + 1; j < all.size(); ++j)
        if (all[i].same_assignment(all[j]) && all[i].pair_count() > 0)
          candidates.emplace_back(i, j);
    std::shuffle(candidates.begin(), candidates.end(),
                 std::mt19937_64(seed ^ 0x9e37));
    for (const auto& [i, j] : candidates) {
      if (merged >= 200) break;
      const auto merge = lattice_merge(transfer, all[i], all[j]);
      check.require(verify_equilibrium(transfer, merge, ecfg.tol).verdict,
                    "merged matching failed verification");
      ++merged;
      if (!check.pass) return;
    }
  }
  check.require(merged >= 200, "only " + fmt_int(merged) + " merged pairs available");
}

// ---- criterion 6: the pu-optimal point solves the function set -------------

void criterion_6(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  const EnumerationConfig ecfg;
  for (int i = 0; i < 50; ++i) {
    const int side = (i % 2 == 0) ? 2 : 3;
    const uint64_t seed = mix_seed(0xC6, static_cast<uint64_t>(side), 0,
                                   static_cast<uint64_t>(i));
    const auto inst = generate_topology(topo, side, side, seed);
    const auto all = brute_force_equilibria(inst, scfg, ecfg);
    const CurveTransfer transfer(inst, scfg, ecfg.curve_points);
    const int best = find_pu_dominant(transfer, all, 1e-5);
    check.require(best >= 0, "no PU-optimal member on instance " + fmt_int(i));
    if (!check.pass) return;

    std::vector<int> assignment(static_cast<size_t>(side));
    for (int m = 0; m < side; ++m)
      assignment[static_cast<size_t>(m)] = all[static_cast<size_t>(best)].su_of(m);

    FixedPointConfig fp;
    const auto solved = solve_function_set(transfer, assignment, fp);
    check.require(solved.solved, "function set unsolved on instance " + fmt_int(i));
    if (!check.pass) return;

    for (int n = 0; n < side; ++n) {
      if (!solved.matching.su_matched(n)) continue;
      const double lo = lower_bound(transfer, solved.matching, n);
      check.require(std::abs(solved.matching.su_utility(n) - lo) <= 1e-5,
                    "fixed point off the lower bound on instance " + fmt_int(i));
    }

    const auto u_star = pu_utilities_of(transfer, solved.matching);
    for (const auto& other : all) {
      const auto u_other = pu_utilities_of(transfer, other);
      for (int m = 0; m < side; ++m)
        check.require(u_star[static_cast<size_t>(m)] >=
                          u_other[static_cast<size_t>(m)] - 1e-5,
                      "fixed point dominated on instance " + fmt_int(i));
    }
    if (!check.pass) return;
  }
}

// ---- criterion 7: ensemble trends ------------------------------------------

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  const auto ranks = [n](const std::vector<double>& v) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> out(n);
    for (size_t pos = 0; pos < n; ++pos) out[idx[pos]] = static_cast<double>(pos + 1);
    return out;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  double d2 = 0.0;
  for (size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double dn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (dn * (dn * dn - 1.0));
}

void criterion_7(Check& check) {
  const TopologyConfig topo;
  const SolverConfig solver;
  std::map<std::pair<int, int>, double> mean_fwd, mean_rev, gap;
  for (int m_count : {2, 4}) {
    ExperimentConfig exp;
    exp.m_values = {m_count};
    exp.n_values = {1, 2, 3, 4, 5, 6, 7, 8};
    exp.seeds = 100;
    exp.mechanisms = {"g-dac", "g-rdac"};
    exp.epsilon = 0.01;
    exp.master_seed = 0xC7;
    const auto rows = run_sweep(exp, topo, solver);
    for (const auto& row : rows)
      check.require(!row.failed, "sweep cell failed (M=" + fmt_int(row.m_count) +
                                     ", N=" + fmt_int(row.n_count) + ")");
    const auto summary = summarize(rows);
    for (const auto& cell : summary) {
      if (cell.mechanism == "g-dac") mean_fwd[{cell.m_count, cell.n_count}] = cell.mean_pu;
      if (cell.mechanism == "g-rdac") mean_rev[{cell.m_count, cell.n_count}] = cell.mean_pu;
      gap[{cell.m_count, cell.n_count}] = cell.gap;
    }
  }

  // Total PU utility rises with the number of SUs under both mechanisms.
  for (int m_count : {2, 4}) {
    std::vector<double> ns, fwd, rev;
    for (int n = 1; n <= 8; ++n) {
      ns.push_back(n);
      fwd.push_back(mean_fwd[{m_count, n}]);
      rev.push_back(mean_rev[{m_count, n}]);
    }
    check.require(spearman(ns, fwd) >= 0.9,
                  "optimal trend not rising for M=" + fmt_int(m_count));
    check.require(spearman(ns, rev) >= 0.9,
                  "robust trend not rising for M=" + fmt_int(m_count));
  }

  // More PUs means less per PU, cell by cell.
  for (int n = 1; n <= 8; ++n) {
    check.require(mean_fwd[{4, n}] / 4.0 < mean_fwd[{2, n}] / 2.0,
                  "per-PU optimal mean not lower at M=4 (N=" + fmt_int(n) + ")");
    check.require(mean_rev[{4, n}] / 4.0 < mean_rev[{2, n}] / 2.0,
                  "per-PU robust mean not lower at M=4 (N=" + fmt_int(n) + ")");
  }

  // Information matters little off the diagonal, a lot on it.
  for (int m_count : {2, 4}) {
    for (int n = 1; n <= 8; ++n) {
      if (n == m_count) continue;
      check.require(gap[{m_count, n}] < 0.15,
                    "off-diagonal gap >= 15% at M=" + fmt_int(m_count) +
                        ", N=" + fmt_int(n));
    }
    const double diagonal = gap[{m_count, m_count}];
    check.require(diagonal > gap[{m_count, m_count - 1}] &&
                      diagonal > gap[{m_count, m_count + 1}],
                  "diagonal gap not larger than its neighbors at M=" +
                      fmt_int(m_count));
  }
}

// ---- criterion 8: guess-based auction --------------------------------------

void criterion_8(Check& check) {
  const SolverConfig scfg;
  const TopologyConfig topo;
  for (int i = 0; i < 50; ++i) {
    const uint64_t seed = mix_seed(0xC8, 0, 0, static_cast<uint64_t>(i));
    Rng r(seed ^ 0xabcdef);
    const int m_count = 1 + static_cast<int>(r.uniform() * 4);
    const int n_count = 1 + static_cast<int>(r.uniform() * 4);
    const auto inst = generate_topology(topo, m_count, n_count, seed);
    MechanismConfig cfg;
    const auto trace = gsg_rdac(inst, scfg, 0.01, cfg);
    for (int n = 0; n < n_count; ++n) {
      if (!trace.matching.su_matched(n)) continue;
      const double actual = pair_su_utility(inst, trace.matching.pu_of(n), n,
                                            trace.matching.exchange(n));
      check.require(actual >= -1e-6,
                    "accepted contract leaves the SU negative on instance " +
                        fmt_int(i));
    }
    const GsTransfer transfer(inst, scfg);
    check.require(verify_equilibrium(transfer, trace.matching, 1e-6).verdict,
                  "guess-based output fails its verifier on instance " + fmt_int(i));
    if (!check.pass) return;
  }
}

// ---- criterion 9: the two su-utility forms agree ---------------------------

void criterion_9(Check& check) {
  const TopologyConfig topo;
  const auto inst = generate_topology(topo, 3, 3, 0xC9);
  Rng r(0x99);
  for (int k = 0; k < 10000; ++k) {
    const int m = static_cast<int>(r.uniform() * 3);
    const int n = static_cast<int>(r.uniform() * 3);
    const ResourceExchange exch{r.uniform(0.0, 100.0), r.uniform(0.0, 10.0)};
    const double direct = pair_su_utility(inst, m, n, exch);
    const DerivedRates rates = derived_rates(inst, m, n, exch);
    const double via_type =
        (exch.access_time * pair_su_type(inst, m, n) - exch.relay_power) *
        rates.gs_constant;
    check.require(std::abs(direct - via_type) <=
                      1e-12 * std::max(1.0, std::abs(direct)),
                  "utility forms disagree beyond 1e-12");
    if (!check.pass) return;
  }
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    std::function<void(Check&)> run;
  };
  const std::vector<Entry> criteria = {
      {1, "worked ordinal market reproduces its three equilibria", criterion_1},
      {2, "auction outputs verify on 1000 random markets", criterion_2},
      {3, "auctions land on the enumerated extreme equilibria", criterion_3},
      {4, "transfer function inverse, monotonicity, tightness, grid oracle",
       criterion_4},
      {5, "lattice merges of 200 equilibrium pairs verify", criterion_5},
      {6, "function-set fixed point sits on the bounds and dominates",
       criterion_6},
      {7, "ensemble trends and optimal-vs-robust gap", criterion_7},
      {8, "guess-based auction signs and certificate", criterion_8},
      {9, "su utility forms agree to 1e-12", criterion_9},
  };

  int failures = 0;
  for (const auto& entry : criteria) {
    Check check;
    const auto start = Clock::now();
    try {
      entry.run(check);
    } catch (const std::exception& e) {
      check.pass = false;
      check.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (check.pass) {
      std::printf("PASS criterion %d: %s (%.1fs)\n", entry.id, entry.label, seconds);
    } else {
      std::printf("FAIL criterion %d: %s (%.1fs) — %s\n", entry.id, entry.label,
                  seconds, check.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
