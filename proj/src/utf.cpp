#include "utf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace specmatch {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

struct PairContext {
  const NetworkInstance* inst;
  int m;
  int n;
  double coop_time;     // T
  double sensitivity;   // C
  double own_rate;      // R_{n(m)}
  double t_cap;
  double p_cap;
};

PairContext make_context(const NetworkInstance& inst, int m, int n,
                         const SolverConfig& cfg) {
  PairContext ctx;
  ctx.inst = &inst;
  ctx.m = m;
  ctx.n = n;
  ctx.coop_time = inst.pu(m).coop_time;
  ctx.sensitivity = inst.su(n).power_sensitivity;
  ctx.own_rate = pair_su_rate(inst, m, n);
  ctx.t_cap = cfg.t_max(ctx.coop_time);
  ctx.p_cap = cfg.p_max;
  return ctx;
}

double tight_power(const PairContext& ctx, double delta, double t) {
  return 2.0 *
         (t * (ctx.own_rate - ctx.sensitivity) - delta * (ctx.coop_time + t)) /
         (ctx.sensitivity * ctx.coop_time);
}

// PU utility along the tight-constraint curve; power clamped into the box
// to absorb endpoint rounding.
double objective(const PairContext& ctx, double delta, double t) {
  double p = tight_power(ctx, delta, t);
  p = std::clamp(p, 0.0, ctx.p_cap);
  return pair_pu_utility(*ctx.inst, ctx.m, ctx.n, ResourceExchange{p, t});
}

std::optional<std::pair<double, double>> time_domain(const PairContext& ctx,
                                                     double delta) {
  const double slack = ctx.own_rate - ctx.sensitivity - delta;  // s = R - C - delta
  if (slack > 0.0) {
    double t_lo = delta * ctx.coop_time / slack;
    const double t_hi = std::min(
        ctx.t_cap,
        (ctx.p_cap * ctx.sensitivity * ctx.coop_time / 2.0 + delta * ctx.coop_time) /
            slack);
    // Rounding at the exact feasibility cap can push t_lo a hair past t_hi.
    const double edge = 1e-9 * std::max(1.0, ctx.t_cap);
    if (t_lo > t_hi + edge || t_lo > ctx.t_cap + edge) return std::nullopt;
    t_lo = std::min(t_lo, t_hi);
    return std::make_pair(t_lo, t_hi);
  }
  // Non-positive slack: p(t) <= p(0) = -2 delta / C, so only delta = 0 works.
  if (delta > 0.0) return std::nullopt;
  if (slack == 0.0) return std::make_pair(0.0, ctx.t_cap);  // p identically 0
  return std::make_pair(0.0, 0.0);                          // only the null contract
}

struct ScalarMax {
  double arg = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Dense grid over [lo, hi], then golden-section refinement of the best cell.
template <typename F>
ScalarMax maximize_on_interval(double lo, double hi, const F& f, int grid_points,
                               int refine_iters) {
  ScalarMax best;
  if (!(hi > lo)) {
    best.arg = lo;
    best.value = f(lo);
    return best;
  }
  const int g = std::max(grid_points, 8);
  const double step = (hi - lo) / (g - 1);
  int best_i = 0;
  for (int i = 0; i < g; ++i) {
    const double t = (i == g - 1) ? hi : lo + i * step;
    const double v = f(t);
    if (v > best.value) {
      best.value = v;
      best.arg = t;
      best_i = i;
    }
  }
  double a = lo + std::max(0, best_i - 1) * step;
  double b = (best_i + 1 >= g - 1) ? hi : lo + (best_i + 1) * step;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < refine_iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double refined_arg = f1 > f2 ? x1 : x2;
  const double refined_val = std::max(f1, f2);
  if (refined_val > best.value) {
    best.value = refined_val;
    best.arg = refined_arg;
  }
  return best;
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_points < 8) throw ValidationError("solver grid_points must be >= 8");
  if (refine_iters < 0) throw ValidationError("solver refine_iters must be >= 0");
  if (!(tol > 0.0)) throw ValidationError("solver tol must be positive");
  if (!(p_max > 0.0)) throw ValidationError("solver p_max must be positive");
  if (!(t_max_factor > 0.0)) throw ValidationError("solver t_max_factor must be positive");
  if (gs_curve_samples < 8) throw ValidationError("gs_curve_samples must be >= 8");
}

std::optional<std::pair<double, double>> tight_time_domain(
    const NetworkInstance& inst, int m, int n, double su_reservation,
    const SolverConfig& cfg) {
  return time_domain(make_context(inst, m, n, cfg), su_reservation);
}

double tight_relay_power(const NetworkInstance& inst, int m, int n,
                         double su_reservation, double t) {
  SolverConfig cfg;
  return tight_power(make_context(inst, m, n, cfg), su_reservation, t);
}

double su_utility_cap(const NetworkInstance& inst, int m, int n,
                      const SolverConfig& cfg) {
  const PairContext ctx = make_context(inst, m, n, cfg);
  const double margin = ctx.own_rate - ctx.sensitivity;
  if (margin <= 0.0) return 0.0;
  return ctx.t_cap * margin / (ctx.coop_time + ctx.t_cap);
}

namespace debug_counters { extern std::atomic<long> solve_utf_calls; }

UtfSolution solve_utf(const NetworkInstance& inst, int m, int n,
                      double su_reservation, const SolverConfig& cfg) {
  debug_counters::solve_utf_calls.fetch_add(1, std::memory_order_relaxed);
  su_reservation = std::max(su_reservation, 0.0);  // SU utilities are nonnegative
  const PairContext ctx = make_context(inst, m, n, cfg);
  const auto domain = time_domain(ctx, su_reservation);
  UtfSolution out;
  if (!domain) return out;

  const auto f = [&](double t) { return objective(ctx, su_reservation, t); };
  const ScalarMax best = maximize_on_interval(domain->first, domain->second, f,
                                              cfg.grid_points, cfg.refine_iters);
  out.feasible = true;
  out.pu_utility = best.value;
  out.exchange.access_time = best.arg;
  out.exchange.relay_power =
      std::clamp(tight_power(ctx, su_reservation, best.arg), 0.0, ctx.p_cap);
  return out;
}

std::optional<double> inverse_utf(const NetworkInstance& inst, int m, int n,
                                  double pu_target, const SolverConfig& cfg,
                                  std::optional<double> hint,
                                  std::optional<double> known_f0) {
  const double cap = su_utility_cap(inst, m, n, cfg);
  const auto f = [&](double delta) {
    return solve_utf(inst, m, n, delta, cfg).pu_utility;
  };

  const double f0 = known_f0 ? *known_f0 : f(0.0);
  if (pu_target > f0) return std::nullopt;  // unreachable even at delta = 0
  if (pu_target >= f0 || cap <= 0.0) return 0.0;

  double lo = 0.0;   // f(lo) >= pu_target
  double f_lo = f0;
  double hi = cap;   // candidate upper end
  double f_hi = 0.0;
  bool hi_known_below = false;

  // Exponential bracket around the hint: auction loops move the target by a
  // small step each call, so the new root sits near the previous one.
  if (hint && *hint > 0.0 && *hint < cap) {
    double step = std::max(64.0 * cfg.tol, 1e-4 * cap);
    const double f_hint = f(*hint);
    if (f_hint >= pu_target) {
      lo = *hint;
      f_lo = f_hint;
      double probe = std::min(cap, lo + step);
      while (probe < cap) {
        const double v = f(probe);
        if (v < pu_target) {
          hi = probe;
          f_hi = v;
          hi_known_below = true;
          break;
        }
        lo = probe;
        f_lo = v;
        step *= 4.0;
        probe = std::min(cap, lo + step);
      }
    } else {
      hi = *hint;
      f_hi = f_hint;
      hi_known_below = true;
      double probe = std::max(0.0, hi - step);
      while (probe > 0.0) {
        const double v = f(probe);
        if (v >= pu_target) {
          lo = probe;
          f_lo = v;
          break;
        }
        hi = probe;
        f_hi = v;
        step *= 4.0;
        probe = std::max(0.0, hi - step);
      }
      if (lo == 0.0) f_lo = f0;
    }
  }

  if (!hi_known_below) {
    f_hi = f(cap);
    if (f_hi >= pu_target) return cap;  // target below the capped range
  }

  // Root of f - target on [lo, hi] by false position with the Illinois
  // weighting; falls back to the midpoint when the secant stalls.
  double g_lo = f_lo - pu_target;  // >= 0
  double g_hi = f_hi - pu_target;  // < 0
  int last_side = 0;
  for (int i = 0; i < 200 && hi - lo > cfg.tol; ++i) {
    double mid = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    const double margin = 0.01 * (hi - lo);
    if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
    const double g_mid = f(mid) - pu_target;
    if (g_mid >= 0.0) {
      lo = mid;
      g_lo = g_mid;
      if (last_side == 1) g_hi *= 0.5;
      last_side = 1;
    } else {
      hi = mid;
      g_hi = g_mid;
      if (last_side == -1) g_lo *= 0.5;
      last_side = -1;
    }
  }
  return lo;
}

UtfSolution gs_utf(const NetworkInstance& inst, int m, int n,
                   double guessed_type, const SolverConfig& cfg) {
  const PairContext ctx = make_context(inst, m, n, cfg);
  UtfSolution out;
  out.feasible = true;
  if (guessed_type <= 0.0) {
    // Power would have to be non-positive; the best zero-power offer is the
    // null contract.
    out.exchange = ResourceExchange{0.0, 0.0};
    out.pu_utility = pair_pu_utility(inst, m, n, out.exchange);
    return out;
  }
  const double t_hi = std::min(ctx.t_cap, ctx.p_cap / guessed_type);
  const auto f = [&](double t) {
    return pair_pu_utility(inst, m, n, ResourceExchange{t * guessed_type, t});
  };
  const ScalarMax best =
      maximize_on_interval(0.0, t_hi, f, cfg.grid_points, cfg.refine_iters);
  out.pu_utility = best.value;
  out.exchange = ResourceExchange{best.arg * guessed_type, best.arg};
  return out;
}

std::optional<GsUtfCurve> GsUtfCurve::build(const NetworkInstance& inst, int m,
                                            int n, const SolverConfig& cfg) {
  const double type = pair_su_type(inst, m, n);
  const double lo = std::min(0.0, type) - 1.0;
  const double hi = type;
  const int samples = std::max(cfg.gs_curve_samples, 8);

  std::vector<GsCurvePoint> raw;
  raw.reserve(static_cast<size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double guess = lo + (hi - lo) * i / (samples - 1);
    const UtfSolution sol = gs_utf(inst, m, n, guess, cfg);
    if (sol.exchange.access_time <= 0.0) continue;  // null contract, no trade
    GsCurvePoint pt;
    pt.guess = guess;
    pt.pu_utility = sol.pu_utility;
    pt.su_utility = pair_su_utility(inst, m, n, sol.exchange);
    pt.exchange = sol.exchange;
    raw.push_back(pt);
  }

  // Keep a strictly monotone subsequence in guess order: PU value rising,
  // SU value falling. Numerical jitter from the scalar optimizer can create
  // flat spots; those are dropped.
  std::vector<GsCurvePoint> kept;
  for (const GsCurvePoint& pt : raw) {
    if (!kept.empty()) {
      if (pt.pu_utility <= kept.back().pu_utility + 1e-12) continue;
      if (pt.su_utility >= kept.back().su_utility - 1e-12) continue;
    }
    kept.push_back(pt);
  }
  if (kept.size() < 2) return std::nullopt;

  GsUtfCurve curve;
  curve.points_ = std::move(kept);
  return curve;
}

std::optional<double> GsUtfCurve::pu_value(double su_utility) const {
  if (su_utility > points_.front().su_utility) return std::nullopt;
  if (su_utility <= points_.back().su_utility) return points_.back().pu_utility;
  // su_utility decreases along the vector; find the bracketing segment.
  for (size_t i = 1; i < points_.size(); ++i) {
    if (su_utility >= points_[i].su_utility) {
      const GsCurvePoint& a = points_[i - 1];
      const GsCurvePoint& b = points_[i];
      const double w = (a.su_utility - su_utility) / (a.su_utility - b.su_utility);
      return a.pu_utility + w * (b.pu_utility - a.pu_utility);
    }
  }
  return points_.back().pu_utility;
}

std::optional<double> GsUtfCurve::su_value(double pu_target) const {
  if (pu_target > points_.back().pu_utility) return std::nullopt;
  if (pu_target <= points_.front().pu_utility) return points_.front().su_utility;
  for (size_t i = 1; i < points_.size(); ++i) {
    if (pu_target <= points_[i].pu_utility) {
      const GsCurvePoint& a = points_[i - 1];
      const GsCurvePoint& b = points_[i];
      const double w = (pu_target - a.pu_utility) / (b.pu_utility - a.pu_utility);
      return a.su_utility + w * (b.su_utility - a.su_utility);
    }
  }
  return points_.front().su_utility;
}

std::optional<GsCurvePoint> GsUtfCurve::point_at_pu_utility(double pu_target) const {
  if (pu_target > points_.back().pu_utility) return std::nullopt;
  if (pu_target <= points_.front().pu_utility) return points_.front();
  for (size_t i = 1; i < points_.size(); ++i) {
    if (pu_target <= points_[i].pu_utility) {
      const GsCurvePoint& a = points_[i - 1];
      const GsCurvePoint& b = points_[i];
      const double w = (pu_target - a.pu_utility) / (b.pu_utility - a.pu_utility);
      GsCurvePoint pt;
      pt.guess = a.guess + w * (b.guess - a.guess);
      pt.pu_utility = pu_target;
      pt.su_utility = a.su_utility + w * (b.su_utility - a.su_utility);
      pt.exchange.access_time =
          a.exchange.access_time + w * (b.exchange.access_time - a.exchange.access_time);
      pt.exchange.relay_power =
          a.exchange.relay_power + w * (b.exchange.relay_power - a.exchange.relay_power);
      return pt;
    }
  }
  return points_.back();
}

}  // namespace specmatch

namespace specmatch {
namespace debug_counters {
std::atomic<long> solve_utf_calls{0};
}
}
