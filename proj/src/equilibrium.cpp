#include "equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace specmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Transfer evaluations carry ~1e-9 of solver noise. Targets this close to a
// pair's maximum are treated as sitting on the boundary instead of beyond
// it; the margin stays two decades under the certificate tolerances.
constexpr double kBoundarySlack = 1e-7;

struct BoundResult {
  double value = 0.0;
  int actor = -1;  // binding competitor PU / alternative SU
};

// Lowest acceptable utility for SU n: the strongest counter-offer any other
// PU could make given its own current utility, floored at zero.
BoundResult lower_bound_impl(const TransferSystem& transfer, const Matching& matching,
                             int n) {
  BoundResult out{0.0, -1};
  const int mu = matching.pu_of(n);
  for (int m = 0; m < matching.pu_count(); ++m) {
    if (m == mu) continue;
    const double current = pu_utility_of(transfer, matching, m);
    const auto counter = transfer.su_value(m, n, current);
    if (!counter) continue;  // pair (m, n) cannot reach that utility level
    if (*counter > out.value) {
      out.value = *counter;
      out.actor = m;
    }
  }
  return out;
}

// Highest achievable utility for SU n: the point where its PU becomes
// indifferent to the best alternative (another SU, or walking away).
BoundResult upper_bound_impl(const TransferSystem& transfer, const Matching& matching,
                             int n) {
  const int mu = matching.pu_of(n);
  BoundResult out{kNegInf, -1};
  // The inverse transfer is decreasing, so the binding constraint is the
  // strongest alternative; a single inverse call covers them all.
  double best_alternative = 0.0;
  int best_k = -1;
  for (int k = 0; k < matching.su_count(); ++k) {
    if (k == n) continue;
    const auto alternative = transfer.pu_value(mu, k, matching.su_utility(k));
    if (!alternative) continue;  // switching to k is not even feasible
    if (*alternative > best_alternative) {
      best_alternative = *alternative;
      best_k = k;
    }
  }
  auto limit = transfer.su_value(mu, n, best_alternative);
  if (!limit) {
    const auto top = transfer.pu_value(mu, n, 0.0);
    if (top && best_alternative <= *top + kBoundarySlack) {
      limit = 0.0;  // exactly at the indifference point
    } else {
      // The alternative beats anything this pair can produce (or the pair
      // cannot even give its PU zero).
      out.actor = best_k;
      return out;
    }
  }
  out.value = *limit;
  out.actor = best_k;
  return out;
}

}  // namespace

Matching::Matching(int pu_count, int su_count)
    : pu_to_su_(static_cast<size_t>(pu_count), -1),
      su_to_pu_(static_cast<size_t>(su_count), -1),
      su_utility_(static_cast<size_t>(su_count), 0.0),
      exchange_(static_cast<size_t>(su_count)) {}

void Matching::match(int m, int n, double su_utility, const ResourceExchange& exch) {
  if (m < 0 || m >= pu_count() || n < 0 || n >= su_count())
    throw ValidationError("matching: index out of range");
  if (pu_to_su_[static_cast<size_t>(m)] >= 0 || su_to_pu_[static_cast<size_t>(n)] >= 0)
    throw ValidationError("matching: user already matched");
  pu_to_su_[static_cast<size_t>(m)] = n;
  su_to_pu_[static_cast<size_t>(n)] = m;
  su_utility_[static_cast<size_t>(n)] = su_utility;
  exchange_[static_cast<size_t>(n)] = exch;
}

int Matching::pair_count() const {
  int count = 0;
  for (int s : pu_to_su_) count += (s >= 0);
  return count;
}

std::vector<MatchedPair> Matching::pairs() const {
  std::vector<MatchedPair> out;
  for (int m = 0; m < pu_count(); ++m) {
    const int n = su_of(m);
    if (n < 0) continue;
    out.push_back({m, n, su_utility(n), exchange(n)});
  }
  return out;
}

bool Matching::same_assignment(const Matching& other) const {
  return pu_to_su_ == other.pu_to_su_;
}

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::individual_rationality: return "IR";
    case ViolationKind::incentive_compatibility: return "IC";
    case ViolationKind::competitive_compatibility: return "CC";
    case ViolationKind::blocking_pair: return "BlockingPair";
  }
  return "?";
}

std::string EquilibriumCertificate::describe() const {
  std::ostringstream os;
  os.precision(9);
  for (const SuBounds& b : bounds) {
    os << "su " << b.su << " delta " << b.utility << " bounds [" << b.lower << ", "
       << b.upper << "]\n";
  }
  for (const Violation& v : violations) {
    os << "violation " << violation_kind_name(v.kind);
    if (v.pu >= 0) os << " pu " << v.pu;
    if (v.su >= 0) os << " su " << v.su;
    os << " amount " << v.amount << "\n";
  }
  os << (verdict ? "verdict equilibrium" : "verdict not-equilibrium") << "\n";
  return os.str();
}

double pu_utility_of(const TransferSystem& transfer, const Matching& matching, int m) {
  const int n = matching.su_of(m);
  if (n < 0) return 0.0;
  const auto value = transfer.pu_value(m, n, matching.su_utility(n));
  return value ? *value : kNegInf;
}

std::vector<double> pu_utilities_of(const TransferSystem& transfer,
                                    const Matching& matching) {
  std::vector<double> out(static_cast<size_t>(matching.pu_count()));
  for (int m = 0; m < matching.pu_count(); ++m)
    out[static_cast<size_t>(m)] = pu_utility_of(transfer, matching, m);
  return out;
}

double lower_bound(const TransferSystem& transfer, const Matching& matching, int n) {
  return lower_bound_impl(transfer, matching, n).value;
}

double upper_bound(const TransferSystem& transfer, const Matching& matching, int n) {
  return upper_bound_impl(transfer, matching, n).value;
}

EquilibriumCertificate verify_equilibrium(const TransferSystem& transfer,
                                          const Matching& matching, double tol) {
  EquilibriumCertificate cert;
  cert.tol = tol;

  for (int n = 0; n < matching.su_count(); ++n) {
    if (!matching.su_matched(n)) continue;
    const int mu = matching.pu_of(n);
    const double delta = matching.su_utility(n);

    bool ir_violated = false;
    if (delta < -tol) {
      cert.violations.push_back(
          {ViolationKind::individual_rationality, -1, n, -delta});
      ir_violated = true;
    }
    const auto pu_val = transfer.pu_value(mu, n, delta);
    if (!pu_val) {
      cert.violations.push_back({ViolationKind::individual_rationality, mu, n,
                                 delta - transfer.su_utility_cap(mu, n)});
      ir_violated = true;
    } else if (*pu_val < -tol) {
      cert.violations.push_back(
          {ViolationKind::individual_rationality, mu, n, -*pu_val});
      ir_violated = true;
    }

    const BoundResult lo = lower_bound_impl(transfer, matching, n);
    const BoundResult hi = upper_bound_impl(transfer, matching, n);
    cert.bounds.push_back({n, lo.value, hi.value, delta});

    if (delta < lo.value - tol) {
      cert.violations.push_back({ViolationKind::competitive_compatibility, lo.actor,
                                 n, lo.value - delta});
    }
    if (delta > hi.value + tol && !ir_violated) {
      // Exceeding the full-transfer point is the PU's rationality failing;
      // exceeding an alternative-SU limit is its incentive failing.
      cert.violations.push_back({ViolationKind::incentive_compatibility,
                                 hi.actor >= 0 ? mu : mu, n, delta - hi.value});
    }
  }

  // Bounds cover every pair with a matched member; what remains is a pair
  // of singles who would both gain by trading.
  for (int m = 0; m < matching.pu_count(); ++m) {
    if (matching.pu_matched(m)) continue;
    for (int n = 0; n < matching.su_count(); ++n) {
      if (matching.su_matched(n)) continue;
      const auto gain = transfer.pu_value(m, n, 0.0);
      if (gain && *gain > tol) {
        cert.violations.push_back({ViolationKind::blocking_pair, m, n, *gain});
      }
    }
  }

  cert.verdict = cert.violations.empty();
  return cert;
}

Matching lattice_merge(const TransferSystem& transfer, const Matching& a,
                       const Matching& b) {
  if (a.pu_count() != b.pu_count() || a.su_count() != b.su_count() ||
      !a.same_assignment(b)) {
    throw AssignmentMismatch("lattice merge requires identical assignments");
  }
  Matching merged(a.pu_count(), a.su_count());
  for (int n = 0; n < a.su_count(); ++n) {
    if (!a.su_matched(n)) continue;
    const int mu = a.pu_of(n);
    const double delta = std::min(a.su_utility(n), b.su_utility(n));
    const auto exch = transfer.exchange_for(mu, n, delta);
    if (!exch) throw ValidationError("lattice merge: contract infeasible");
    merged.match(mu, n, delta, *exch);
  }
  return merged;
}

FunctionSetResult solve_function_set(const TransferSystem& transfer,
                                     const std::vector<int>& pu_to_su,
                                     const FixedPointConfig& cfg) {
  const int m_count = transfer.pu_count();
  const int n_count = transfer.su_count();
  if (static_cast<int>(pu_to_su.size()) != m_count)
    throw ValidationError("assignment length must equal the PU count");

  std::vector<int> su_to_pu(static_cast<size_t>(n_count), -1);
  for (int m = 0; m < m_count; ++m) {
    const int n = pu_to_su[static_cast<size_t>(m)];
    if (n < 0) continue;
    if (n >= n_count || su_to_pu[static_cast<size_t>(n)] >= 0)
      throw ValidationError("assignment must be injective");
    su_to_pu[static_cast<size_t>(n)] = m;
  }

  FunctionSetResult result;
  std::vector<double> delta(static_cast<size_t>(n_count), 0.0);
  std::vector<double> next(static_cast<size_t>(n_count), 0.0);

  int iter = 0;
  bool converged = false;
  for (; iter < cfg.max_iterations && !converged; ++iter) {
    // Current utility of every PU under the working delta vector.
    std::vector<double> pu_now(static_cast<size_t>(m_count), 0.0);
    for (int m = 0; m < m_count; ++m) {
      const int mate = pu_to_su[static_cast<size_t>(m)];
      if (mate < 0) continue;
      const auto value = transfer.pu_value(m, mate, delta[static_cast<size_t>(mate)]);
      if (!value) return result;  // pair overdriven: assignment infeasible
      pu_now[static_cast<size_t>(m)] = *value;
    }

    double change = 0.0;
    for (int n = 0; n < n_count; ++n) {
      if (su_to_pu[static_cast<size_t>(n)] < 0) continue;
      const int mu = su_to_pu[static_cast<size_t>(n)];
      double best = 0.0;
      for (int m = 0; m < m_count; ++m) {
        if (m == mu) continue;
        const auto counter = transfer.su_value(m, n, pu_now[static_cast<size_t>(m)]);
        if (counter && *counter > best) best = *counter;
      }
      next[static_cast<size_t>(n)] = best;
      change = std::max(change, std::abs(best - delta[static_cast<size_t>(n)]));
    }
    delta.swap(next);
    converged = change < cfg.tol;
  }
  result.iterations = iter;
  if (!converged) return result;

  Matching matching(m_count, n_count);
  for (int n = 0; n < n_count; ++n) {
    const int mu = su_to_pu[static_cast<size_t>(n)];
    if (mu < 0) continue;
    const auto exch = transfer.exchange_for(mu, n, delta[static_cast<size_t>(n)]);
    if (!exch) return result;
    matching.match(mu, n, delta[static_cast<size_t>(n)], *exch);
  }
  if (!verify_equilibrium(transfer, matching, cfg.verify_tol).verdict) return result;

  result.solved = true;
  result.matching = std::move(matching);
  return result;
}

std::optional<Matching> su_optimal_point(const TransferSystem& transfer,
                                         const std::vector<int>& pu_to_su,
                                         const FixedPointConfig& cfg) {
  const int m_count = transfer.pu_count();
  const int n_count = transfer.su_count();
  std::vector<int> su_to_pu(static_cast<size_t>(n_count), -1);
  for (int m = 0; m < m_count; ++m) {
    const int n = pu_to_su[static_cast<size_t>(m)];
    if (n >= 0) su_to_pu[static_cast<size_t>(n)] = m;
  }

  std::vector<double> delta(static_cast<size_t>(n_count), 0.0);
  for (int n = 0; n < n_count; ++n) {
    const int mu = su_to_pu[static_cast<size_t>(n)];
    if (mu >= 0) delta[static_cast<size_t>(n)] = transfer.su_utility_cap(mu, n);
  }

  bool converged = false;
  for (int iter = 0; iter < cfg.max_iterations && !converged; ++iter) {
    double change = 0.0;
    std::vector<double> next = delta;
    for (int n = 0; n < n_count; ++n) {
      const int mu = su_to_pu[static_cast<size_t>(n)];
      if (mu < 0) continue;
      double strongest = 0.0;
      for (int k = 0; k < n_count; ++k) {
        if (k == n) continue;
        const double delta_k =
            su_to_pu[static_cast<size_t>(k)] >= 0 ? delta[static_cast<size_t>(k)] : 0.0;
        const auto alt = transfer.pu_value(mu, k, delta_k);
        if (alt) strongest = std::max(strongest, *alt);
      }
      auto limit = transfer.su_value(mu, n, strongest);
      if (!limit) {
        const auto top = transfer.pu_value(mu, n, 0.0);
        if (top && strongest <= *top + kBoundarySlack) {
          limit = 0.0;
        } else {
          return std::nullopt;  // an alternative dominates outright
        }
      }
      const double best = *limit;
      next[static_cast<size_t>(n)] = best;
      change = std::max(change, std::abs(best - delta[static_cast<size_t>(n)]));
    }
    delta.swap(next);
    converged = change < cfg.tol;
  }
  if (!converged) return std::nullopt;

  Matching matching(m_count, n_count);
  for (int n = 0; n < n_count; ++n) {
    const int mu = su_to_pu[static_cast<size_t>(n)];
    if (mu < 0) continue;
    if (delta[static_cast<size_t>(n)] < 0.0) return std::nullopt;
    const auto exch = transfer.exchange_for(mu, n, delta[static_cast<size_t>(n)]);
    if (!exch) return std::nullopt;
    matching.match(mu, n, delta[static_cast<size_t>(n)], *exch);
  }
  if (!verify_equilibrium(transfer, matching, cfg.verify_tol).verdict)
    return std::nullopt;
  return matching;
}

namespace {

void enumerate_assignments(int m, int m_count, int n_count, std::vector<int>& current,
                           std::vector<bool>& used,
                           std::vector<std::vector<int>>& out) {
  if (m == m_count) {
    out.push_back(current);
    return;
  }
  current[static_cast<size_t>(m)] = -1;
  enumerate_assignments(m + 1, m_count, n_count, current, used, out);
  for (int n = 0; n < n_count; ++n) {
    if (used[static_cast<size_t>(n)]) continue;
    used[static_cast<size_t>(n)] = true;
    current[static_cast<size_t>(m)] = n;
    enumerate_assignments(m + 1, m_count, n_count, current, used, out);
    current[static_cast<size_t>(m)] = -1;
    used[static_cast<size_t>(n)] = false;
  }
}

std::string matching_key(const Matching& matching) {
  std::ostringstream os;
  for (int m = 0; m < matching.pu_count(); ++m) os << matching.su_of(m) << ";";
  os.precision(9);
  for (int n = 0; n < matching.su_count(); ++n)
    os << (matching.su_matched(n) ? matching.su_utility(n) : 0.0) << ";";
  return os.str();
}

}  // namespace

std::vector<std::vector<int>> all_partial_assignments(int pu_count, int su_count) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<size_t>(pu_count), -1);
  std::vector<bool> used(static_cast<size_t>(su_count), false);
  enumerate_assignments(0, pu_count, su_count, current, used, out);
  return out;
}

std::optional<Matching> optimal_equilibrium(const TransferSystem& transfer,
                                            bool pu_side,
                                            const FixedPointConfig& cfg,
                                            long max_assignments) {
  const int m_count = transfer.pu_count();
  const int n_count = transfer.su_count();
  // Count sum_k C(M,k) C(N,k) k! without enumerating; the space grows
  // combinatorially and large markets must bail out early.
  double count = 0.0;
  double term = 1.0;  // k = 0
  for (int k = 0; k <= std::min(m_count, n_count); ++k) {
    count += term;
    term *= static_cast<double>(m_count - k) * static_cast<double>(n_count - k) /
            static_cast<double>(k + 1);
    if (count > static_cast<double>(max_assignments)) return std::nullopt;
  }
  std::vector<std::vector<int>> assignments =
      all_partial_assignments(m_count, n_count);

  std::vector<Matching> candidates;
  for (const auto& assignment : assignments) {
    if (pu_side) {
      FunctionSetResult result = solve_function_set(transfer, assignment, cfg);
      if (result.solved) candidates.push_back(std::move(result.matching));
    } else {
      auto result = su_optimal_point(transfer, assignment, cfg);
      if (result) candidates.push_back(std::move(*result));
    }
  }
  if (candidates.empty()) return std::nullopt;

  if (pu_side) {
    const int best = find_pu_dominant(transfer, candidates, 1e-9);
    if (best >= 0) return candidates[static_cast<size_t>(best)];
    // No strict dominator among the verified points; take the largest total.
    double top = kNegInf;
    size_t pick = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      double total = 0.0;
      for (double v : pu_utilities_of(transfer, candidates[i])) total += v;
      if (total > top) {
        top = total;
        pick = i;
      }
    }
    return candidates[pick];
  }

  // SU side: prefer the candidate every SU weakly prefers; fall back to the
  // largest SU total.
  const auto su_vector = [&](const Matching& m) {
    std::vector<double> v(static_cast<size_t>(n_count), 0.0);
    for (int n = 0; n < n_count; ++n)
      if (m.su_matched(n)) v[static_cast<size_t>(n)] = m.su_utility(n);
    return v;
  };
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto vi = su_vector(candidates[i]);
    bool dominant = true;
    for (size_t j = 0; j < candidates.size() && dominant; ++j) {
      const auto vj = su_vector(candidates[j]);
      for (int n = 0; n < n_count; ++n) {
        if (vi[static_cast<size_t>(n)] < vj[static_cast<size_t>(n)] - 1e-9) {
          dominant = false;
          break;
        }
      }
    }
    if (dominant) return candidates[i];
  }
  double top = kNegInf;
  size_t pick = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    double total = 0.0;
    for (double v : su_vector(candidates[i])) total += v;
    if (total > top) {
      top = total;
      pick = i;
    }
  }
  return candidates[pick];
}

std::vector<Matching> brute_force_equilibria(const NetworkInstance& inst,
                                             const SolverConfig& solver_cfg,
                                             const EnumerationConfig& cfg) {
  const int m_count = inst.pu_count();
  const int n_count = inst.su_count();
  if (m_count > cfg.max_users_per_side || n_count > cfg.max_users_per_side) {
    throw InstanceTooLarge("exhaustive enumeration supports at most " +
                           std::to_string(cfg.max_users_per_side) +
                           " users per side");
  }

  const CurveTransfer transfer(inst, solver_cfg, cfg.curve_points);

  std::vector<std::vector<int>> assignments;
  {
    std::vector<int> current(static_cast<size_t>(m_count), -1);
    std::vector<bool> used(static_cast<size_t>(n_count), false);
    enumerate_assignments(0, m_count, n_count, current, used, assignments);
  }

  std::map<std::string, Matching> found;
  const auto consider = [&](const Matching& matching) {
    found.emplace(matching_key(matching), matching);
  };

  for (const std::vector<int>& assignment : assignments) {
    const FunctionSetResult least =
        solve_function_set(transfer, assignment, cfg.fixed_point);
    if (least.solved) consider(least.matching);
    const auto greatest = su_optimal_point(transfer, assignment, cfg.fixed_point);
    if (greatest) consider(*greatest);
    if (!least.solved || !greatest) continue;

    // Sample the utility box between the two extremes; every verified
    // vector is an equilibrium representative.
    std::vector<int> matched;
    for (int n = 0; n < n_count; ++n)
      if (least.matching.su_matched(n)) matched.push_back(n);
    if (matched.empty()) continue;

    int points = cfg.grid_points_per_su;
    while (points > 2 &&
           std::pow(static_cast<double>(points), static_cast<double>(matched.size())) >
               static_cast<double>(cfg.max_vectors_per_assignment)) {
      --points;
    }
    std::vector<int> idx(matched.size(), 0);
    while (true) {
      Matching candidate(m_count, n_count);
      for (size_t j = 0; j < matched.size(); ++j) {
        const int n = matched[j];
        const double lo = least.matching.su_utility(n);
        const double hi = greatest->su_utility(n);
        const double w =
            points > 1 ? static_cast<double>(idx[j]) / (points - 1) : 0.0;
        candidate.match(least.matching.pu_of(n), n, lo + w * (hi - lo),
                        ResourceExchange{});
      }
      if (verify_equilibrium(transfer, candidate, cfg.tol).verdict) {
        for (size_t j = 0; j < matched.size(); ++j) {
          const int n = matched[j];
          const auto exch =
              transfer.exchange_for(candidate.pu_of(n), n, candidate.su_utility(n));
          if (exch) candidate.set_exchange(n, *exch);
        }
        consider(candidate);
      }
      size_t j = 0;
      for (; j < idx.size(); ++j) {
        if (++idx[j] < points) break;
        idx[j] = 0;
      }
      if (j == idx.size()) break;
    }
  }

  std::vector<Matching> out;
  out.reserve(found.size());
  for (auto& [key, matching] : found) out.push_back(std::move(matching));
  return out;
}

int find_pu_dominant(const TransferSystem& transfer,
                     const std::vector<Matching>& candidates, double tol) {
  std::vector<std::vector<double>> utils;
  utils.reserve(candidates.size());
  for (const Matching& m : candidates) utils.push_back(pu_utilities_of(transfer, m));
  for (size_t i = 0; i < candidates.size(); ++i) {
    bool dominant = true;
    for (size_t j = 0; j < candidates.size() && dominant; ++j) {
      for (size_t m = 0; m < utils[i].size(); ++m) {
        if (utils[i][m] < utils[j][m] - tol) {
          dominant = false;
          break;
        }
      }
    }
    if (dominant) return static_cast<int>(i);
  }
  return -1;
}

int find_pu_dominated(const TransferSystem& transfer,
                      const std::vector<Matching>& candidates, double tol) {
  std::vector<std::vector<double>> utils;
  utils.reserve(candidates.size());
  for (const Matching& m : candidates) utils.push_back(pu_utilities_of(transfer, m));
  for (size_t i = 0; i < candidates.size(); ++i) {
    bool dominated = true;
    for (size_t j = 0; j < candidates.size() && dominated; ++j) {
      for (size_t m = 0; m < utils[i].size(); ++m) {
        if (utils[i][m] > utils[j][m] + tol) {
          dominated = false;
          break;
        }
      }
    }
    if (dominated) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace specmatch
