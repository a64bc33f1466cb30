#include "mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"

namespace specmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct AuctionState {
  OfferBook book;
  std::vector<int> holder;  // per responder: accepted proposer, -1 = none
  long rounds = 0;
  std::vector<TraceEvent> events;

  AuctionState(int proposers, int responders)
      : book(proposers, responders),
        holder(static_cast<size_t>(responders), -1) {}
};

// Shared ascending-auction loop, resumable on an existing state (used by
// the step-refinement fallback). `own_value(p, r, offer)` is the proposing
// side's value of target r at the standing offer; responders always compare
// the raw offer values. Rejected proposers raise their offer by epsilon;
// the loop ends on the first round with no book change.
template <typename OwnValue>
void ascending_auction(AuctionState& out, int proposers, int responders,
                       double epsilon, long round_cap, double tie_tol, char side,
                       bool record, const OwnValue& own_value) {
  if (proposers == 0 || responders == 0) return;

  std::vector<int> target(static_cast<size_t>(proposers), -1);
  std::vector<std::vector<int>> proposals(static_cast<size_t>(responders));

  const long first_round = out.rounds + 1;
  for (long round = first_round; round <= round_cap; ++round) {
    out.rounds = round;
    for (auto& v : proposals) v.clear();

    // Proposal phase: each proposer picks its best responder at the
    // standing offers, or abstains when even the best is negative.
    for (int p = 0; p < proposers; ++p) {
      int best_r = -1;
      double best_v = kNegInf;
      for (int r = 0; r < responders; ++r) {
        const auto v = own_value(p, r, out.book.at(p, r));
        if (!v) continue;
        if (*v > best_v + tie_tol || (best_r < 0 && *v >= best_v)) {
          best_v = *v;
          best_r = r;
        }
      }
      if (best_r >= 0 && best_v >= 0.0) {
        target[static_cast<size_t>(p)] = best_r;
        proposals[static_cast<size_t>(best_r)].push_back(p);
        if (record)
          out.events.push_back({round, side, p, TraceAction::propose, best_r,
                                out.book.at(p, best_r)});
      } else {
        target[static_cast<size_t>(p)] = -1;
        if (record)
          out.events.push_back({round, side, p, TraceAction::abstain, -1, best_v});
      }
    }

    // Response phase: each responder holds the best standing proposal;
    // the incumbent is released only for a strictly better offer.
    bool changed = false;
    for (int r = 0; r < responders; ++r) {
      const auto& cands = proposals[static_cast<size_t>(r)];
      if (cands.empty()) {
        out.holder[static_cast<size_t>(r)] = -1;
        continue;
      }
      const int incumbent =
          (out.holder[static_cast<size_t>(r)] >= 0 &&
           target[static_cast<size_t>(out.holder[static_cast<size_t>(r)])] == r)
              ? out.holder[static_cast<size_t>(r)]
              : -1;
      int winner = incumbent;
      double winner_offer = incumbent >= 0 ? out.book.at(incumbent, r) : kNegInf;
      for (int p : cands) {
        if (p == incumbent) continue;
        const double offer = out.book.at(p, r);
        if (incumbent >= 0 || winner >= 0) {
          if (offer > winner_offer + tie_tol) {
            winner = p;
            winner_offer = offer;
          }
        } else {
          winner = p;
          winner_offer = offer;
        }
      }
      out.holder[static_cast<size_t>(r)] = winner;
      if (record)
        out.events.push_back({round, side, winner, TraceAction::accept, r,
                              out.book.at(winner, r)});
      for (int p : cands) {
        if (p == winner) continue;
        out.book.at(p, r) += epsilon;
        changed = true;
        if (record) {
          out.events.push_back({round, side, p, TraceAction::reject, r, 0.0});
          out.events.push_back(
              {round, side, p, TraceAction::increment, r, out.book.at(p, r)});
        }
      }
    }

    if (!changed) return;
  }
  throw IterationCapExceeded("auction did not settle within " +
                             std::to_string(round_cap) + " rounds");
}

// Exact utility division on a settled assignment. The step auction lands
// within O(epsilon) of the equilibrium prices; the fixed point pins them
// exactly (the optimal side's utilities coincide with their bounds there).
std::optional<Matching> polish_assignment(const TransferSystem& transfer,
                                          const std::vector<int>& pu_to_su,
                                          bool pu_optimal, double verify_tol) {
  FixedPointConfig cfg;
  cfg.max_iterations = 2000;
  // Must sit above the transfer evaluations' own resolution (the inverse
  // solves carry ~1e-9 of bisection noise) or the iteration never settles.
  cfg.tol = 1e-7;
  cfg.verify_tol = verify_tol;
  if (pu_optimal) {
    FunctionSetResult result = solve_function_set(transfer, pu_to_su, cfg);
    if (!result.solved) return std::nullopt;
    return std::move(result.matching);
  }
  return su_optimal_point(transfer, pu_to_su, cfg);
}

long derived_round_cap(double total_range, double epsilon, int pairs) {
  const double increments = total_range / epsilon;
  const double cap = increments + 2.0 * pairs + 16.0;
  return static_cast<long>(std::min(cap, 1e9));
}

}  // namespace

const char* trace_action_name(TraceAction action) {
  switch (action) {
    case TraceAction::propose: return "propose";
    case TraceAction::accept: return "accept";
    case TraceAction::reject: return "reject";
    case TraceAction::increment: return "increment";
    case TraceAction::abstain: return "abstain";
    case TraceAction::restart: return "restart";
  }
  return "?";
}

namespace {

// Shared driver for both auction directions: run the step auction, polish
// the settled assignment to its exact utility division, and on failure
// restart with a halved step (the convergence guarantee is an
// as-the-step-vanishes statement). If a few restarts still leave the
// assignment off a stable one, search the assignment space exactly.
MechanismTrace run_two_sided_auction(const TransferSystem& transfer, double epsilon,
                                     const MechanismConfig& cfg, bool pu_proposes) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const int m_count = transfer.pu_count();
  const int n_count = transfer.su_count();
  const int proposers = pu_proposes ? m_count : n_count;
  const int responders = pu_proposes ? n_count : m_count;
  const char side = pu_proposes ? 'P' : 'S';

  const auto own_value = [&](int p, int r, double offer) {
    return pu_proposes ? transfer.pu_value(p, r, offer)
                       : transfer.su_value(r, p, offer);
  };

  // Books are bounded by what the proposing side can ever concede: the SU
  // utility caps for proposing PUs, the full-extraction values for
  // proposing SUs.
  double book_range = 0.0;
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < n_count; ++n) {
      if (pu_proposes) {
        book_range += transfer.su_utility_cap(m, n);
      } else {
        const auto top = transfer.pu_value(m, n, 0.0);
        if (top && *top > 0.0) book_range += *top;
      }
    }
  }

  MechanismTrace trace;
  std::optional<Matching> polished;
  AuctionState state(proposers, responders);
  double step = epsilon;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    if (attempt > 0) {
      step /= 2.0;
      trace.rounds += state.rounds;
      if (cfg.record_trace)
        trace.events.insert(trace.events.end(), state.events.begin(),
                            state.events.end());
      state = AuctionState(proposers, responders);
      if (cfg.record_trace)
        state.events.push_back({0, side, -1, TraceAction::restart, -1, step});
    }
    const long cap = cfg.round_cap > 0
                         ? cfg.round_cap
                         : derived_round_cap(book_range, step, m_count * n_count);
    ascending_auction(state, proposers, responders, step, cap, cfg.tie_tol, side,
                      cfg.record_trace, own_value);

    std::vector<int> pu_to_su(static_cast<size_t>(m_count), -1);
    if (pu_proposes) {
      for (int n = 0; n < n_count; ++n) {
        const int m = state.holder[static_cast<size_t>(n)];
        if (m >= 0) pu_to_su[static_cast<size_t>(m)] = n;
      }
    } else {
      for (int m = 0; m < m_count; ++m)
        pu_to_su[static_cast<size_t>(m)] = state.holder[static_cast<size_t>(m)];
    }
    polished = polish_assignment(transfer, pu_to_su, pu_proposes, cfg.tie_tol);
    if (polished) break;
  }

  if (!polished) {
    // The step auction is stuck on an assignment with no exact equilibrium;
    // fall back to the exact assignment search.
    FixedPointConfig fp;
    fp.max_iterations = 2000;
    fp.tol = 1e-7;
    fp.verify_tol = cfg.tie_tol;
    std::unique_ptr<TransferSystem> repair =
        cfg.repair_factory ? cfg.repair_factory() : nullptr;
    const TransferSystem& search = repair ? *repair : transfer;
    const long budget = repair ? 200000 : cfg.repair_max_assignments;
    const auto exact = optimal_equilibrium(search, pu_proposes, fp, budget);
    if (exact) {
      std::vector<int> assignment(static_cast<size_t>(m_count));
      for (int m = 0; m < m_count; ++m)
        assignment[static_cast<size_t>(m)] = exact->su_of(m);
      polished = polish_assignment(transfer, assignment, pu_proposes, cfg.tie_tol);
      if (!polished && !repair) polished = exact;
      if (!polished && repair) polished = exact;
    }
  }

  trace.rounds += state.rounds;
  trace.converged = true;
  trace.final_offers = std::move(state.book);
  if (cfg.record_trace)
    trace.events.insert(trace.events.end(), state.events.begin(),
                        state.events.end());
  if (polished) {
    trace.matching = std::move(*polished);
    return trace;
  }

  // Last resort: materialize the standing acceptances as-is.
  trace.matching = Matching(m_count, n_count);
  for (int r = 0; r < responders; ++r) {
    const int p = state.holder[static_cast<size_t>(r)];
    if (p < 0) continue;
    const int m = pu_proposes ? p : r;
    const int n = pu_proposes ? r : p;
    const double offer = trace.final_offers.at(p, r);
    double delta = offer;
    if (!pu_proposes) {
      const auto value = transfer.su_value(m, n, offer);
      if (!value) continue;
      delta = *value;
    }
    const auto exch = transfer.exchange_for(m, n, delta);
    if (!exch) continue;
    trace.matching.match(m, n, delta, *exch);
  }
  return trace;
}

}  // namespace

MechanismTrace g_dac(const TransferSystem& transfer, double epsilon,
                     const MechanismConfig& cfg) {
  return run_two_sided_auction(transfer, epsilon, cfg, true);
}

MechanismTrace g_rdac(const TransferSystem& transfer, double epsilon,
                      const MechanismConfig& cfg) {
  return run_two_sided_auction(transfer, epsilon, cfg, false);
}

MechanismTrace gsg_rdac(const NetworkInstance& inst, const SolverConfig& solver_cfg,
                        double epsilon, const MechanismConfig& cfg) {
  const GsTransfer transfer(inst, solver_cfg);
  MechanismConfig gs_cfg = cfg;
  gs_cfg.repair_max_assignments = 200000;  // curve lookups are cheap
  MechanismTrace trace = run_two_sided_auction(transfer, epsilon, gs_cfg, false);

  // Record the implied guess behind each pair's standing contract level:
  // the matched pairs at their settled utility, the rest at their last bid.
  GuessState guesses(inst.pu_count(), inst.su_count());
  for (int m = 0; m < inst.pu_count(); ++m) {
    for (int n = 0; n < inst.su_count(); ++n) {
      double target = trace.final_offers.at(n, m);
      if (trace.matching.pu_of(n) == m) {
        const auto value = transfer.pu_value(m, n, trace.matching.su_utility(n));
        if (value) target = *value;
      }
      const auto pt = transfer.point_at_pu_utility(m, n, target);
      guesses.at(m, n) = pt ? pt->guess : std::numeric_limits<double>::quiet_NaN();
    }
  }
  trace.guesses = std::move(guesses);
  return trace;
}

MechanismTrace run_mechanism(const NetworkInstance& inst, const std::string& name,
                             double epsilon, const SolverConfig& solver_cfg,
                             const MechanismConfig& cfg) {
  MechanismConfig run_cfg = cfg;
  if (!run_cfg.repair_factory) {
    run_cfg.repair_factory = [&inst, &solver_cfg]() {
      return std::unique_ptr<TransferSystem>(new CurveTransfer(inst, solver_cfg));
    };
  }
  if (name == "g-dac") {
    const UtfTransfer transfer(inst, solver_cfg);
    return g_dac(transfer, epsilon, run_cfg);
  }
  if (name == "g-rdac") {
    const UtfTransfer transfer(inst, solver_cfg);
    return g_rdac(transfer, epsilon, run_cfg);
  }
  if (name == "gsg-rdac") {
    return gsg_rdac(inst, solver_cfg, epsilon, run_cfg);
  }
  throw ValidationError("unknown mechanism: " + name);
}

void PreferenceLists::validate() const {
  const int m_count = pu_count();
  const int n_count = su_count();
  for (const auto& list : pu_prefs) {
    std::vector<bool> seen(static_cast<size_t>(n_count), false);
    for (int n : list) {
      if (n < 0 || n >= n_count || seen[static_cast<size_t>(n)])
        throw ValidationError("PU preference list invalid");
      seen[static_cast<size_t>(n)] = true;
    }
  }
  for (const auto& list : su_prefs) {
    std::vector<bool> seen(static_cast<size_t>(m_count), false);
    for (int m : list) {
      if (m < 0 || m >= m_count || seen[static_cast<size_t>(m)])
        throw ValidationError("SU preference list invalid");
      seen[static_cast<size_t>(m)] = true;
    }
  }
}

PreferenceLists build_preference_lists(const NetworkInstance& inst,
                                       const std::vector<double>& fixed_time_rewards,
                                       const std::vector<double>& fixed_relay_powers) {
  const int m_count = inst.pu_count();
  const int n_count = inst.su_count();
  if (static_cast<int>(fixed_time_rewards.size()) != m_count ||
      static_cast<int>(fixed_relay_powers.size()) != n_count)
    throw ValidationError("fixed exchange vectors must match the market size");

  const auto exchange = [&](int m, int n) {
    return ResourceExchange{fixed_relay_powers[static_cast<size_t>(n)],
                            fixed_time_rewards[static_cast<size_t>(m)]};
  };

  PreferenceLists prefs;
  prefs.pu_prefs.resize(static_cast<size_t>(m_count));
  prefs.su_prefs.resize(static_cast<size_t>(n_count));
  for (int m = 0; m < m_count; ++m) {
    std::vector<std::pair<double, int>> ranked;
    for (int n = 0; n < n_count; ++n) {
      const double value = pair_pu_utility(inst, m, n, exchange(m, n));
      if (value >= 0.0) ranked.emplace_back(value, n);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [value, n] : ranked)
      prefs.pu_prefs[static_cast<size_t>(m)].push_back(n);
  }
  for (int n = 0; n < n_count; ++n) {
    std::vector<std::pair<double, int>> ranked;
    for (int m = 0; m < m_count; ++m) {
      const double value = pair_su_utility(inst, m, n, exchange(m, n));
      if (value >= 0.0) ranked.emplace_back(value, m);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [value, m] : ranked)
      prefs.su_prefs[static_cast<size_t>(n)].push_back(m);
  }
  return prefs;
}

namespace {

// Round-based deferred acceptance over ordinal lists. Proposers walk their
// lists; a responder holds the best acceptable proposer seen so far.
std::vector<int> ordinal_da(const std::vector<std::vector<int>>& proposer_lists,
                            const std::vector<std::vector<int>>& responder_lists,
                            int responder_count) {
  const int proposer_count = static_cast<int>(proposer_lists.size());
  // rank[r][p]: responder r's position of proposer p; lower is better.
  const int unacceptable = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> rank(
      static_cast<size_t>(responder_count),
      std::vector<int>(static_cast<size_t>(proposer_count), unacceptable));
  for (int r = 0; r < responder_count; ++r)
    for (size_t pos = 0; pos < responder_lists[static_cast<size_t>(r)].size(); ++pos)
      rank[static_cast<size_t>(r)]
          [static_cast<size_t>(responder_lists[static_cast<size_t>(r)][pos])] =
              static_cast<int>(pos);

  std::vector<size_t> next(static_cast<size_t>(proposer_count), 0);
  std::vector<int> held_by(static_cast<size_t>(responder_count), -1);
  std::vector<int> engaged_to(static_cast<size_t>(proposer_count), -1);

  bool progress = true;
  while (progress) {
    progress = false;
    for (int p = 0; p < proposer_count; ++p) {
      if (engaged_to[static_cast<size_t>(p)] >= 0) continue;
      auto& cursor = next[static_cast<size_t>(p)];
      const auto& list = proposer_lists[static_cast<size_t>(p)];
      while (cursor < list.size()) {
        const int r = list[cursor];
        const int p_rank = rank[static_cast<size_t>(r)][static_cast<size_t>(p)];
        if (p_rank == unacceptable) {
          ++cursor;
          continue;
        }
        const int current = held_by[static_cast<size_t>(r)];
        if (current < 0 ||
            p_rank < rank[static_cast<size_t>(r)][static_cast<size_t>(current)]) {
          if (current >= 0) {
            engaged_to[static_cast<size_t>(current)] = -1;
            ++next[static_cast<size_t>(current)];
          }
          held_by[static_cast<size_t>(r)] = p;
          engaged_to[static_cast<size_t>(p)] = r;
          progress = true;
          break;
        }
        ++cursor;
      }
      if (engaged_to[static_cast<size_t>(p)] < 0 && cursor >= list.size()) continue;
    }
  }
  return engaged_to;
}

}  // namespace

std::vector<int> deferred_acceptance(const PreferenceLists& prefs, bool su_proposes) {
  prefs.validate();
  if (!su_proposes) {
    return ordinal_da(prefs.pu_prefs, prefs.su_prefs, prefs.su_count());
  }
  const std::vector<int> su_to_pu =
      ordinal_da(prefs.su_prefs, prefs.pu_prefs, prefs.pu_count());
  std::vector<int> pu_to_su(static_cast<size_t>(prefs.pu_count()), -1);
  for (int n = 0; n < prefs.su_count(); ++n) {
    const int m = su_to_pu[static_cast<size_t>(n)];
    if (m >= 0) pu_to_su[static_cast<size_t>(m)] = n;
  }
  return pu_to_su;
}

namespace {

Matching assignment_to_matching(const std::vector<int>& pu_to_su, int su_count) {
  Matching matching(static_cast<int>(pu_to_su.size()), su_count);
  for (size_t m = 0; m < pu_to_su.size(); ++m) {
    if (pu_to_su[m] >= 0)
      matching.match(static_cast<int>(m), pu_to_su[m], 0.0, ResourceExchange{});
  }
  return matching;
}

}  // namespace

Matching dac_fixed(const PreferenceLists& prefs) {
  return assignment_to_matching(deferred_acceptance(prefs, false), prefs.su_count());
}

Matching rdac_fixed(const PreferenceLists& prefs) {
  return assignment_to_matching(deferred_acceptance(prefs, true), prefs.su_count());
}

Matching dac_with_reports(const PreferenceLists& prefs,
                          const std::vector<SuReportStrategy>& strategies) {
  if (static_cast<int>(strategies.size()) != prefs.su_count())
    throw ValidationError("one report strategy per SU required");
  PreferenceLists reported = prefs;
  for (int n = 0; n < prefs.su_count(); ++n) {
    const auto& strategy = strategies[static_cast<size_t>(n)];
    const auto& truth = prefs.su_prefs[static_cast<size_t>(n)];
    auto in_truth = [&](int m) {
      return std::find(truth.begin(), truth.end(), m) != truth.end();
    };
    switch (strategy.mode) {
      case SuReportStrategy::Mode::truthful:
        break;
      case SuReportStrategy::Mode::truncate: {
        std::vector<int> kept;
        for (int m : truth)
          if (std::find(strategy.list.begin(), strategy.list.end(), m) !=
              strategy.list.end())
            kept.push_back(m);
        reported.su_prefs[static_cast<size_t>(n)] = std::move(kept);
        break;
      }
      case SuReportStrategy::Mode::permute: {
        for (int m : strategy.list) {
          if (!in_truth(m))
            throw ValidationError("reported list must be drawn from the true list");
        }
        reported.su_prefs[static_cast<size_t>(n)] = strategy.list;
        break;
      }
    }
  }
  return dac_fixed(reported);
}

}  // namespace specmatch
