#ifndef SPECMATCH_EQUILIBRIUM_HPP
#define SPECMATCH_EQUILIBRIUM_HPP

#include <string>
#include <vector>

#include "channel_model.hpp"
#include "transfer.hpp"

namespace specmatch {

struct MatchedPair {
  int pu = -1;
  int su = -1;
  double su_utility = 0.0;
  ResourceExchange exchange;
};

/// A partial one-to-one assignment between PUs and SUs together with each
/// matched SU's utility and the contract implementing it. Injectivity is
/// enforced on every mutation.
class Matching {
 public:
  Matching() = default;
  Matching(int pu_count, int su_count);

  void match(int m, int n, double su_utility, const ResourceExchange& exch);

  int pu_count() const { return static_cast<int>(pu_to_su_.size()); }
  int su_count() const { return static_cast<int>(su_to_pu_.size()); }
  int su_of(int m) const { return pu_to_su_[static_cast<size_t>(m)]; }
  int pu_of(int n) const { return su_to_pu_[static_cast<size_t>(n)]; }
  bool pu_matched(int m) const { return su_of(m) >= 0; }
  bool su_matched(int n) const { return pu_of(n) >= 0; }

  /// Utility of SU n in this matching; zero for an unmatched SU.
  double su_utility(int n) const { return su_utility_[static_cast<size_t>(n)]; }
  void set_su_utility(int n, double v) { su_utility_[static_cast<size_t>(n)] = v; }
  const ResourceExchange& exchange(int n) const {
    return exchange_[static_cast<size_t>(n)];
  }
  void set_exchange(int n, const ResourceExchange& e) {
    exchange_[static_cast<size_t>(n)] = e;
  }

  int pair_count() const;
  std::vector<MatchedPair> pairs() const;  // sorted by PU index
  bool same_assignment(const Matching& other) const;

 private:
  std::vector<int> pu_to_su_;  // -1 = unmatched
  std::vector<int> su_to_pu_;
  std::vector<double> su_utility_;
  std::vector<ResourceExchange> exchange_;
};

enum class ViolationKind {
  individual_rationality,
  incentive_compatibility,
  competitive_compatibility,
  blocking_pair,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int pu = -1;     // offending / tempted PU (-1 when not applicable)
  int su = -1;     // affected SU
  double amount = 0.0;  // size of the breach in utility units
};

struct SuBounds {
  int su = -1;
  double lower = 0.0;    // lowest acceptable utility
  double upper = 0.0;    // highest achievable utility
  double utility = 0.0;  // recorded utility
};

/// Outcome of the stability check: per-SU utility bounds and the list of
/// violated conditions. `verdict` is true iff the list is empty.
struct EquilibriumCertificate {
  bool verdict = false;
  double tol = 0.0;
  std::vector<SuBounds> bounds;      // one entry per matched SU
  std::vector<Violation> violations;

  std::string describe() const;
};

/// Utility of PU m under the matching: f at the recorded SU utility, zero
/// when unmatched, -infinity when the recorded utility is infeasible for
/// the pair.
double pu_utility_of(const TransferSystem& transfer, const Matching& matching, int m);

/// Per-PU utility vector (length M).
std::vector<double> pu_utilities_of(const TransferSystem& transfer,
                                    const Matching& matching);

/// Lowest utility SU n can be held at without some other PU poaching it:
/// the max over competitors of g_n^m at their current utility, floored at 0.
double lower_bound(const TransferSystem& transfer, const Matching& matching, int n);

/// Highest utility SU n can extract before its PU prefers an alternative:
/// the min over alternative SUs of g at their current value, capped at the
/// full-transfer point g(0). May be -infinity when no utility level keeps
/// the PU's incentive constraints intact.
double upper_bound(const TransferSystem& transfer, const Matching& matching, int n);

/// Stability verifier: bounds check for every matched SU plus a blocking
/// pair scan over unmatched users. The recorded SU utilities are treated as
/// authoritative; contracts are not re-derived here.
EquilibriumCertificate verify_equilibrium(const TransferSystem& transfer,
                                          const Matching& matching, double tol);

/// Componentwise minimum of the SU utilities of two equilibria sharing an
/// assignment; contracts re-solved through the transfer. The result is
/// again an equilibrium. Throws AssignmentMismatch.
Matching lattice_merge(const TransferSystem& transfer, const Matching& a,
                       const Matching& b);

struct FixedPointConfig {
  int max_iterations = 10000;
  double tol = 1e-8;         // sup-norm convergence threshold
  double verify_tol = 1e-6;  // certificate tolerance applied to the result
};

struct FunctionSetResult {
  bool solved = false;
  Matching matching;
  int iterations = 0;
};

/// Jointly solves the self-consistency system for SU utilities under a
/// fixed assignment: iterate delta <- F(delta) from zero, where F_n is the
/// competitors' best counter-offer. F is monotone, so the iteration climbs
/// to the least fixed point, which is the PU-optimal utility division.
/// Non-convergence or a failed certificate means the assignment supports
/// no equilibrium.
FunctionSetResult solve_function_set(const TransferSystem& transfer,
                                     const std::vector<int>& pu_to_su,
                                     const FixedPointConfig& cfg);

/// Greatest fixed point of the upper-bound map on a fixed assignment,
/// iterated downward from the per-pair caps: the SU-optimal utility
/// division, when the assignment supports one.
std::optional<Matching> su_optimal_point(const TransferSystem& transfer,
                                         const std::vector<int>& pu_to_su,
                                         const FixedPointConfig& cfg);

/// Every partial injective PU-to-SU assignment (entries -1 = unmatched).
std::vector<std::vector<int>> all_partial_assignments(int pu_count, int su_count);

/// Exact equilibrium search across every assignment: solves each
/// assignment's PU-optimal (pu_side) or SU-optimal point and returns the
/// member dominating the verified candidates for that side. nullopt when
/// nothing verifies or the assignment space exceeds max_assignments.
std::optional<Matching> optimal_equilibrium(const TransferSystem& transfer,
                                            bool pu_side,
                                            const FixedPointConfig& cfg,
                                            long max_assignments = 200000);

struct EnumerationConfig {
  int max_users_per_side = 4;  // hard cap on exhaustive enumeration
  int grid_points_per_su = 21;
  int max_vectors_per_assignment = 200;
  int curve_points = 1025;
  double tol = 1e-6;
  FixedPointConfig fixed_point;
};

/// Exhaustive oracle: enumerates every partial injective assignment; for
/// each, computes the PU-optimal (least) and SU-optimal (greatest) utility
/// fixed points and additionally samples utility vectors between them,
/// keeping everything the verifier accepts. Results are canonically
/// sorted. Throws InstanceTooLarge beyond the configured cap.
std::vector<Matching> brute_force_equilibria(const NetworkInstance& inst,
                                             const SolverConfig& solver_cfg,
                                             const EnumerationConfig& cfg);

/// Index of the matching whose PU utility vector componentwise dominates
/// all others within tol; -1 if none does.
int find_pu_dominant(const TransferSystem& transfer,
                     const std::vector<Matching>& candidates, double tol);

/// Index of the matching componentwise dominated by all others within tol
/// (the PU-worst member); -1 if none is.
int find_pu_dominated(const TransferSystem& transfer,
                      const std::vector<Matching>& candidates, double tol);

}  // namespace specmatch

#endif
