#include "transfer.hpp"

#include <algorithm>
#include <cmath>

namespace specmatch {

UtfTransfer::UtfTransfer(const NetworkInstance& inst, const SolverConfig& cfg)
    : inst_(inst), cfg_(cfg), n_count_(inst.su_count()) {
  cfg_.validate();
  const size_t pairs =
      static_cast<size_t>(inst.pu_count()) * static_cast<size_t>(n_count_);
  caps_.resize(pairs);
  state_.resize(pairs);
  for (int m = 0; m < inst.pu_count(); ++m) {
    for (int n = 0; n < n_count_; ++n) {
      caps_[index(m, n)] = specmatch::su_utility_cap(inst, m, n, cfg_);
    }
  }
}

std::optional<double> UtfTransfer::pu_value(int m, int n, double su_utility) const {
  su_utility = std::max(su_utility, 0.0);
  PairState& st = state_[index(m, n)];
  if (st.has_f && st.f_arg == su_utility) {
    if (!st.f_feasible) return std::nullopt;
    return st.f_val;
  }
  const UtfSolution sol = solve_utf(inst_, m, n, su_utility, cfg_);
  st.has_f = true;
  st.f_arg = su_utility;
  st.f_feasible = sol.feasible;
  st.f_val = sol.pu_utility;
  if (!sol.feasible) return std::nullopt;
  return sol.pu_utility;
}

std::optional<double> UtfTransfer::su_value(int m, int n, double pu_utility) const {
  PairState& st = state_[index(m, n)];
  if (st.has_g && st.g_arg == pu_utility) return st.g_val;
  if (!st.f0) st.f0 = solve_utf(inst_, m, n, 0.0, cfg_).pu_utility;
  const auto result = inverse_utf(inst_, m, n, pu_utility, cfg_, st.g_hint, st.f0);
  if (result) st.g_hint = *result;
  st.has_g = true;
  st.g_arg = pu_utility;
  st.g_val = result;
  return result;
}

std::optional<ResourceExchange> UtfTransfer::exchange_for(int m, int n,
                                                          double su_utility) const {
  const UtfSolution sol = solve_utf(inst_, m, n, std::max(su_utility, 0.0), cfg_);
  if (!sol.feasible) return std::nullopt;
  return sol.exchange;
}

double UtfTransfer::su_utility_cap(int m, int n) const { return caps_[index(m, n)]; }

CurveTransfer::CurveTransfer(const NetworkInstance& inst, const SolverConfig& cfg,
                             int points_per_pair)
    : inst_(inst), cfg_(cfg), n_count_(inst.su_count()) {
  cfg_.validate();
  points_per_pair = std::max(points_per_pair, 2);
  curves_.resize(static_cast<size_t>(inst.pu_count()) *
                 static_cast<size_t>(n_count_));
  for (int m = 0; m < inst.pu_count(); ++m) {
    for (int n = 0; n < n_count_; ++n) {
      PairCurve& curve = curves_[index(m, n)];
      curve.cap = specmatch::su_utility_cap(inst, m, n, cfg_);
      if (curve.cap <= 0.0) {
        curve.step = 0.0;
        curve.pu_values = {solve_utf(inst, m, n, 0.0, cfg_).pu_utility};
        continue;
      }
      curve.step = curve.cap / (points_per_pair - 1);
      curve.pu_values.resize(static_cast<size_t>(points_per_pair));
      for (int i = 0; i < points_per_pair; ++i) {
        const double delta = (i == points_per_pair - 1) ? curve.cap : i * curve.step;
        curve.pu_values[static_cast<size_t>(i)] =
            solve_utf(inst, m, n, delta, cfg_).pu_utility;
      }
      // The transfer function is strictly decreasing; iron out solver
      // jitter so the inverse search can binary-chop.
      for (size_t i = 1; i < curve.pu_values.size(); ++i) {
        curve.pu_values[i] = std::min(curve.pu_values[i], curve.pu_values[i - 1]);
      }
    }
  }
}

std::optional<double> CurveTransfer::pu_value(int m, int n, double su_utility) const {
  const PairCurve& curve = curves_[index(m, n)];
  su_utility = std::max(su_utility, 0.0);
  // Same cap-edge treatment as the direct solver.
  const double edge = 1e-9 * std::max(1.0, curve.cap);
  if (su_utility > curve.cap + edge) return std::nullopt;
  su_utility = std::min(su_utility, curve.cap);
  if (curve.pu_values.size() == 1 || curve.step <= 0.0) return curve.pu_values[0];
  const double pos = su_utility / curve.step;
  const size_t i = std::min(static_cast<size_t>(pos), curve.pu_values.size() - 2);
  const double w = pos - static_cast<double>(i);
  return curve.pu_values[i] + w * (curve.pu_values[i + 1] - curve.pu_values[i]);
}

std::optional<double> CurveTransfer::su_value(int m, int n, double pu_utility) const {
  const PairCurve& curve = curves_[index(m, n)];
  if (pu_utility > curve.pu_values.front()) return std::nullopt;
  if (pu_utility <= curve.pu_values.back()) return curve.cap;
  // Largest delta with f(delta) >= target; values are nonincreasing.
  size_t lo = 0;
  size_t hi = curve.pu_values.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (curve.pu_values[mid] >= pu_utility) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double span = curve.pu_values[lo] - curve.pu_values[hi];
  const double w = span > 0.0 ? (curve.pu_values[lo] - pu_utility) / span : 0.0;
  return (static_cast<double>(lo) + w) * curve.step;
}

std::optional<ResourceExchange> CurveTransfer::exchange_for(int m, int n,
                                                            double su_utility) const {
  const UtfSolution sol = solve_utf(inst_, m, n, std::max(su_utility, 0.0), cfg_);
  if (!sol.feasible) return std::nullopt;
  return sol.exchange;
}

double CurveTransfer::su_utility_cap(int m, int n) const {
  return curves_[index(m, n)].cap;
}

GsTransfer::GsTransfer(const NetworkInstance& inst, const SolverConfig& cfg)
    : m_count_(inst.pu_count()), n_count_(inst.su_count()) {
  cfg.validate();
  curves_.resize(static_cast<size_t>(inst.pu_count()) *
                 static_cast<size_t>(n_count_));
  for (int m = 0; m < inst.pu_count(); ++m) {
    for (int n = 0; n < n_count_; ++n) {
      curves_[index(m, n)] = GsUtfCurve::build(inst, m, n, cfg);
    }
  }
}

std::optional<double> GsTransfer::pu_value(int m, int n, double su_utility) const {
  const auto& curve = curves_[index(m, n)];
  if (!curve) return std::nullopt;
  return curve->pu_value(std::max(su_utility, 0.0));
}

std::optional<double> GsTransfer::su_value(int m, int n, double pu_utility) const {
  const auto& curve = curves_[index(m, n)];
  if (!curve) return std::nullopt;
  return curve->su_value(pu_utility);
}

std::optional<ResourceExchange> GsTransfer::exchange_for(int m, int n,
                                                         double su_utility) const {
  const auto& curve = curves_[index(m, n)];
  if (!curve) return std::nullopt;
  su_utility = std::max(su_utility, 0.0);
  const auto& pts = curve->points();
  if (su_utility > pts.front().su_utility) return std::nullopt;
  if (su_utility <= pts.back().su_utility) return pts.back().exchange;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (su_utility >= pts[i].su_utility) {
      const GsCurvePoint& a = pts[i - 1];
      const GsCurvePoint& b = pts[i];
      const double w = (a.su_utility - su_utility) / (a.su_utility - b.su_utility);
      ResourceExchange exch;
      exch.access_time =
          a.exchange.access_time + w * (b.exchange.access_time - a.exchange.access_time);
      exch.relay_power =
          a.exchange.relay_power + w * (b.exchange.relay_power - a.exchange.relay_power);
      return exch;
    }
  }
  return pts.back().exchange;
}

double GsTransfer::su_utility_cap(int m, int n) const {
  const auto& curve = curves_[index(m, n)];
  return curve ? curve->max_su_utility() : 0.0;
}

const GsUtfCurve* GsTransfer::curve(int m, int n) const {
  const auto& curve = curves_[index(m, n)];
  return curve ? &*curve : nullptr;
}

std::optional<GsCurvePoint> GsTransfer::point_at_pu_utility(int m, int n,
                                                            double pu_target) const {
  const auto& curve = curves_[index(m, n)];
  if (!curve) return std::nullopt;
  return curve->point_at_pu_utility(pu_target);
}

}  // namespace specmatch
