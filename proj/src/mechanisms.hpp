#ifndef SPECMATCH_MECHANISMS_HPP
#define SPECMATCH_MECHANISMS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "transfer.hpp"
#include "utf.hpp"

namespace specmatch {

/// Standing offers of the proposing side, proposer-major. For the PU-side
/// auction entry (m, n) is the utility PU m is willing to hand SU n; for
/// the reversed auctions entry (n, m) is the utility SU n offers PU m.
/// Entries start at zero and only ever rise by the step size.
struct OfferBook {
  int proposer_count = 0;
  int responder_count = 0;
  std::vector<double> offers;

  OfferBook() = default;
  OfferBook(int proposers, int responders)
      : proposer_count(proposers),
        responder_count(responders),
        offers(static_cast<size_t>(proposers) * static_cast<size_t>(responders), 0.0) {}
  double at(int p, int r) const {
    return offers[static_cast<size_t>(p) * static_cast<size_t>(responder_count) +
                  static_cast<size_t>(r)];
  }
  double& at(int p, int r) {
    return offers[static_cast<size_t>(p) * static_cast<size_t>(responder_count) +
                  static_cast<size_t>(r)];
  }
};

enum class TraceAction { propose, accept, reject, increment, abstain, restart };
const char* trace_action_name(TraceAction action);

struct TraceEvent {
  long round = 0;
  char side = 'P';  // proposing side: 'P' (PUs) or 'S' (SUs)
  int actor = -1;
  TraceAction action = TraceAction::propose;
  int target = -1;
  double value = 0.0;
};

struct MechanismTrace {
  long rounds = 0;
  bool converged = false;
  Matching matching;
  OfferBook final_offers;
  std::vector<TraceEvent> events;          // populated when record_trace is set
  std::optional<GuessState> guesses;       // implied guesses (guess-based runs)
};

struct MechanismConfig {
  double tie_tol = 1e-6;  // indifference threshold; below it, lowest index wins
  long round_cap = 0;     // 0 = derive from the books' reachable range
  bool record_trace = false;
  int max_restarts = 3;   // halved-step reruns when the settled assignment
                          // has no exact utility division
  // Builds a cheap transfer (tabulated curves) for the exact assignment
  // search fallback; without it the fallback runs on the primary transfer
  // and only for small assignment spaces.
  std::function<std::unique_ptr<TransferSystem>()> repair_factory;
  long repair_max_assignments = 300;
};

/// PU-proposing ascending auction: every PU proposes to its best SU at the
/// standing offers, every SU holds the best proposal, rejected PUs raise
/// their offer by epsilon. Converges to the PU-optimal equilibrium up to
/// O(epsilon). Throws IterationCapExceeded if the round cap is hit.
MechanismTrace g_dac(const TransferSystem& transfer, double epsilon,
                     const MechanismConfig& cfg);

/// Role-reversed auction: SUs bid PU utilities upward. Converges to the
/// SU-optimal equilibrium, i.e. the PU-worst case that bounds what any
/// misrepresentation can cost a PU.
MechanismTrace g_rdac(const TransferSystem& transfer, double epsilon,
                      const MechanismConfig& cfg);

/// Reversed auction over the guess-based transfer curves, for the setting
/// where PUs cannot observe SU types at all. Pairs with degenerate curves
/// never trade.
MechanismTrace gsg_rdac(const NetworkInstance& inst, const SolverConfig& solver_cfg,
                        double epsilon, const MechanismConfig& cfg);

/// Dispatch by CLI name: "g-dac", "g-rdac" or "gsg-rdac".
MechanismTrace run_mechanism(const NetworkInstance& inst, const std::string& name,
                             double epsilon, const SolverConfig& solver_cfg,
                             const MechanismConfig& cfg);

/// Ordinal preference lists for the fixed-exchange market: strictly ordered,
/// truncated to acceptable partners.
struct PreferenceLists {
  std::vector<std::vector<int>> pu_prefs;  // P(m): SU indices, best first
  std::vector<std::vector<int>> su_prefs;  // Q(n): PU indices, best first

  int pu_count() const { return static_cast<int>(pu_prefs.size()); }
  int su_count() const { return static_cast<int>(su_prefs.size()); }
  void validate() const;
};

/// Lists induced by fixed per-PU time rewards and per-SU relay powers:
/// only partners with nonnegative utility appear, ordered by utility
/// (ties broken by index).
PreferenceLists build_preference_lists(const NetworkInstance& inst,
                                       const std::vector<double>& fixed_time_rewards,
                                       const std::vector<double>& fixed_relay_powers);

/// Classic deferred acceptance on ordinal lists. Returns the PU-to-SU
/// assignment (-1 for unmatched).
std::vector<int> deferred_acceptance(const PreferenceLists& prefs, bool su_proposes);

/// PU-proposing run: the PU-optimal stable assignment.
Matching dac_fixed(const PreferenceLists& prefs);

/// SU-proposing run: the SU-optimal stable assignment.
Matching rdac_fixed(const PreferenceLists& prefs);

/// How an SU reports its list: as-is, truncated to a set (true order kept),
/// or replaced by an explicit reordering of a sublist.
struct SuReportStrategy {
  enum class Mode { truthful, truncate, permute };
  Mode mode = Mode::truthful;
  std::vector<int> list;  // members for truncate; full reported order for permute

  static SuReportStrategy truthful() { return {}; }
  static SuReportStrategy truncate(std::vector<int> keep) {
    return {Mode::truncate, std::move(keep)};
  }
  static SuReportStrategy permute(std::vector<int> order) {
    return {Mode::permute, std::move(order)};
  }
};

/// PU-proposing deferred acceptance where SUs respond according to their
/// reported lists. One strategy per SU.
Matching dac_with_reports(const PreferenceLists& prefs,
                          const std::vector<SuReportStrategy>& strategies);

}  // namespace specmatch

#endif
