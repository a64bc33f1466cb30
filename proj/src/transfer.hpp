#ifndef SPECMATCH_TRANSFER_HPP
#define SPECMATCH_TRANSFER_HPP

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "channel_model.hpp"
#include "utf.hpp"

namespace specmatch {

/// Pairwise utility transfer seen by the market layers. `pu_value` is the
/// transfer function f (max PU utility at a guaranteed SU utility),
/// `su_value` its inverse g (max SU utility at a guaranteed PU utility).
/// nullopt means the pair cannot deliver the requested guarantee at all;
/// callers treat that as "no proposal".
class TransferSystem {
 public:
  virtual ~TransferSystem() = default;

  virtual int pu_count() const = 0;
  virtual int su_count() const = 0;

  virtual std::optional<double> pu_value(int m, int n, double su_utility) const = 0;
  virtual std::optional<double> su_value(int m, int n, double pu_utility) const = 0;

  /// Contract realizing `su_utility` on the pair (and the max PU utility).
  virtual std::optional<ResourceExchange> exchange_for(int m, int n,
                                                       double su_utility) const = 0;

  /// Highest SU utility the pair can deliver under the caps.
  virtual double su_utility_cap(int m, int n) const = 0;
};

/// Transfer backed directly by the one-dimensional solver. Memoizes the
/// last query per pair and warm-starts the inverse from the previous
/// result, which makes the ascending auctions (many small steps per pair)
/// cheap. Not safe for concurrent use; create one per run.
class UtfTransfer : public TransferSystem {
 public:
  UtfTransfer(const NetworkInstance& inst, const SolverConfig& cfg);

  int pu_count() const override { return inst_.pu_count(); }
  int su_count() const override { return n_count_; }

  std::optional<double> pu_value(int m, int n, double su_utility) const override;
  std::optional<double> su_value(int m, int n, double pu_utility) const override;
  std::optional<ResourceExchange> exchange_for(int m, int n,
                                               double su_utility) const override;
  double su_utility_cap(int m, int n) const override;

  const SolverConfig& config() const { return cfg_; }

 private:
  struct PairState {
    bool has_f = false;
    double f_arg = 0.0;
    double f_val = 0.0;
    bool f_feasible = false;
    std::optional<double> g_hint;
    std::optional<double> f0;  // cached f at delta = 0
    bool has_g = false;
    double g_arg = 0.0;
    std::optional<double> g_val;
  };

  size_t index(int m, int n) const {
    return static_cast<size_t>(m) * static_cast<size_t>(n_count_) +
           static_cast<size_t>(n);
  }

  const NetworkInstance& inst_;
  SolverConfig cfg_;
  int n_count_;
  std::vector<double> caps_;
  mutable std::vector<PairState> state_;
};

/// Transfer tabulated per pair on a dense SU-utility grid, with linear
/// interpolation for f and inverse interpolation for g. Built once per
/// instance; evaluations are then branch-free table lookups. Used by the
/// exhaustive oracle, which evaluates f and g many thousands of times.
class CurveTransfer : public TransferSystem {
 public:
  CurveTransfer(const NetworkInstance& inst, const SolverConfig& cfg,
                int points_per_pair = 1025);

  int pu_count() const override { return inst_.pu_count(); }
  int su_count() const override { return n_count_; }

  std::optional<double> pu_value(int m, int n, double su_utility) const override;
  std::optional<double> su_value(int m, int n, double pu_utility) const override;
  std::optional<ResourceExchange> exchange_for(int m, int n,
                                               double su_utility) const override;
  double su_utility_cap(int m, int n) const override;

 private:
  struct PairCurve {
    double cap = 0.0;   // delta range [0, cap]
    double step = 0.0;
    std::vector<double> pu_values;  // f at uniform delta grid, strictly decreasing
  };

  size_t index(int m, int n) const {
    return static_cast<size_t>(m) * static_cast<size_t>(n_count_) +
           static_cast<size_t>(n);
  }

  const NetworkInstance& inst_;
  SolverConfig cfg_;
  int n_count_;
  std::vector<PairCurve> curves_;
};

/// Transfer induced by the guess-based proposal rule. Pairs whose curve is
/// degenerate (non-positive SU type or a PU that never benefits from
/// relaying) report nullopt everywhere and never trade.
class GsTransfer : public TransferSystem {
 public:
  GsTransfer(const NetworkInstance& inst, const SolverConfig& cfg);

  int pu_count() const override { return m_count_; }
  int su_count() const override { return n_count_; }

  std::optional<double> pu_value(int m, int n, double su_utility) const override;
  std::optional<double> su_value(int m, int n, double pu_utility) const override;
  std::optional<ResourceExchange> exchange_for(int m, int n,
                                               double su_utility) const override;
  double su_utility_cap(int m, int n) const override;

  const GsUtfCurve* curve(int m, int n) const;
  /// Interpolated curve point delivering the given PU utility.
  std::optional<GsCurvePoint> point_at_pu_utility(int m, int n, double pu_target) const;

 private:
  size_t index(int m, int n) const {
    return static_cast<size_t>(m) * static_cast<size_t>(n_count_) +
           static_cast<size_t>(n);
  }

  int m_count_;
  int n_count_;
  std::vector<std::optional<GsUtfCurve>> curves_;
};

}  // namespace specmatch

#endif
