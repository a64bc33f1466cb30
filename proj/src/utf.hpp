#ifndef SPECMATCH_UTF_HPP
#define SPECMATCH_UTF_HPP

#include <optional>
#include <vector>

#include "channel_model.hpp"

namespace specmatch {

/// Knobs for the one-dimensional transfer solver. The search runs a dense
/// grid over the feasible access-time interval followed by golden-section
/// refinement around the best cell; the grid stage guards against local
/// optima since the objective along the tight-constraint curve is not
/// provably unimodal.
struct SolverConfig {
  int grid_points = 512;
  int refine_iters = 60;
  double tol = 1e-9;          // absolute utility tolerance
  double p_max = 100.0;       // relay power cap, in units of PU transmit power
  double t_max_factor = 10.0; // access-time cap as a multiple of coop_time
  int gs_curve_samples = 256; // guess grid size for the guess-based curve

  double t_max(double coop_time) const { return t_max_factor * coop_time; }
  void validate() const;
};

/// Result of one transfer solve: the PU's maximal utility when the matched
/// SU is guaranteed a reservation utility, and the contract achieving it.
/// `feasible == false` means the pair cannot deliver that reservation at
/// all; callers treat such pairs as non-cooperating.
struct UtfSolution {
  bool feasible = false;
  double pu_utility = 0.0;
  ResourceExchange exchange;
};

/// Closed interval of access times on the tight-constraint curve where the
/// implied relay power lies in [0, p_max]. Empty optional when the
/// reservation exceeds what the pair can generate under the caps.
std::optional<std::pair<double, double>> tight_time_domain(
    const NetworkInstance& inst, int m, int n, double su_reservation,
    const SolverConfig& cfg);

/// Relay power making the SU utility constraint tight at access time t:
///   p(t) = 2 (t (R - C) - delta (T + t)) / (C T).
double tight_relay_power(const NetworkInstance& inst, int m, int n,
                         double su_reservation, double t);

/// Largest SU reservation this pair can deliver under the caps:
///   t_max (R - C) / (T + t_max), floored at 0.
double su_utility_cap(const NetworkInstance& inst, int m, int n,
                      const SolverConfig& cfg);

/// Utility transfer function f_n^m: maximize the PU's utility subject to
/// the SU receiving at least `su_reservation`. The constraint binds at the
/// optimum, so the search runs over access time alone.
UtfSolution solve_utf(const NetworkInstance& inst, int m, int n,
                      double su_reservation, const SolverConfig& cfg);

/// Inverse transfer g_n^m: the largest SU utility delta with
/// f_n^m(delta) >= pu_target, found by bisection on the strictly
/// decreasing f. Returns nullopt when even delta = 0 cannot reach the
/// target. When the target lies below what the capped domain can express,
/// returns the cap (the SU cannot extract more regardless).
/// `hint` (a nearby previous result) narrows the initial bracket;
/// `known_f0` skips the reachability probe when f(0) is already cached.
std::optional<double> inverse_utf(const NetworkInstance& inst, int m, int n,
                                  double pu_target, const SolverConfig& cfg,
                                  std::optional<double> hint = std::nullopt,
                                  std::optional<double> known_f0 = std::nullopt);

/// One point of the guess-based proposal rule: maximize the PU utility
/// subject to p = t * guessed_type. A non-positive guess degenerates to the
/// null contract (t = 0). Always returns a value.
UtfSolution gs_utf(const NetworkInstance& inst, int m, int n,
                   double guessed_type, const SolverConfig& cfg);

struct GsCurvePoint {
  double guess = 0.0;       // the guessed type behind this contract
  double pu_utility = 0.0;  // PU value of the proposed contract
  double su_utility = 0.0;  // SU's actual utility when accepting it
  ResourceExchange exchange;
};

/// Sampled guess-based transfer curve for one pair: a strictly monotone
/// piecewise-linear map between the PU utility extracted by the guess rule
/// and the SU's actual utility. Built by the SU, which knows its own type;
/// used by the reversed auction under strongly incomplete information.
class GsUtfCurve {
 public:
  /// Sweeps guesses over [min(0, H) - 1, H] and keeps the strictly
  /// monotone non-degenerate contracts. Returns nullopt (degenerate curve)
  /// when fewer than two usable samples exist, e.g. when the SU's type is
  /// non-positive or relaying never helps this PU.
  static std::optional<GsUtfCurve> build(const NetworkInstance& inst, int m,
                                         int n, const SolverConfig& cfg);

  /// f~: PU utility when the SU keeps `su_utility`. Clamped to the top of
  /// the curve for su_utility <= 0; nullopt above the curve's SU range.
  std::optional<double> pu_value(double su_utility) const;

  /// g~: SU utility when the PU is guaranteed `pu_target`. Nullopt above
  /// the curve's PU range; clamped to the SU maximum below it.
  std::optional<double> su_value(double pu_target) const;

  /// Interpolated contract delivering the given PU utility.
  std::optional<GsCurvePoint> point_at_pu_utility(double pu_target) const;

  double max_pu_utility() const { return points_.back().pu_utility; }
  double max_su_utility() const { return points_.front().su_utility; }
  const std::vector<GsCurvePoint>& points() const { return points_; }

 private:
  // Sorted by pu_utility ascending; su_utility strictly decreasing.
  std::vector<GsCurvePoint> points_;
};

/// One guess per pair, as maintained by a guess-based mechanism run.
struct GuessState {
  int pu_count = 0;
  int su_count = 0;
  std::vector<double> guesses;  // row-major MxN

  GuessState() = default;
  GuessState(int m_count, int n_count)
      : pu_count(m_count),
        su_count(n_count),
        guesses(static_cast<size_t>(m_count) * static_cast<size_t>(n_count), 0.0) {}
  double& at(int m, int n) {
    return guesses[static_cast<size_t>(m) * static_cast<size_t>(su_count) +
                   static_cast<size_t>(n)];
  }
  double at(int m, int n) const {
    return guesses[static_cast<size_t>(m) * static_cast<size_t>(su_count) +
                   static_cast<size_t>(n)];
  }
};

}  // namespace specmatch

#endif
