#ifndef SPECMATCH_CHANNEL_MODEL_HPP
#define SPECMATCH_CHANNEL_MODEL_HPP

#include <optional>
#include <vector>

namespace specmatch {

/// Base of the logarithm used for all rate expressions. Utilities scale
/// uniformly with the base, so this never changes orderings or matchings.
enum class LogBase { natural, base2 };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Primary user: a licensed transmitter/receiver pair.
/// Gains are stored as linear power ratios (received power at unit transmit
/// power); dB is converted once at the ingestion boundary.
struct PuParams {
  int id = 0;
  double direct_gain_sq = 0.0;  // G_m^2, PT_m -> PR_m
  double coop_time = 1.0;       // T_m, duration of the two relay phases
  std::optional<Vec2> position_tx;
  std::optional<Vec2> position_rx;
};

/// Secondary user: an unlicensed pair that relays PU traffic in exchange
/// for access time. Carries one own-band gain per PU band.
struct SuParams {
  int id = 0;
  double power_sensitivity = 1.0;           // C_n, utility per unit power
  std::vector<double> direct_gain_sq_per_pu;  // G_{n(m)}^2, ST_n -> SR_n per band
  std::optional<Vec2> position_tx;
  std::optional<Vec2> position_rx;
};

/// Relay channel gains for one PU/SU pair.
struct LinkGains {
  double g1_sq = 0.0;  // G_{m,n}^2, PT_m -> ST_n
  double g2_sq = 0.0;  // G_{n,m}^2, ST_n -> PR_m
};

/// One matched pair's contract: the SU relays with power `relay_power`
/// (in units of the PU transmit power) and receives `access_time` of
/// dedicated spectrum time (same units as coop_time).
struct ResourceExchange {
  double relay_power = 0.0;  // p
  double access_time = 0.0;  // t
};

/// The market: M PUs, N SUs, an MxN matrix of relay-link gains and a common
/// noise power. Immutable after construction and safe to share across
/// threads. Construction validates all invariants and throws
/// ValidationError on the first violation.
class NetworkInstance {
 public:
  NetworkInstance(std::vector<PuParams> pus, std::vector<SuParams> sus,
                  std::vector<LinkGains> links,  // row-major MxN
                  double noise_power, LogBase log_base = LogBase::natural);

  int pu_count() const { return static_cast<int>(pus_.size()); }
  int su_count() const { return static_cast<int>(sus_.size()); }
  const PuParams& pu(int m) const { return pus_[static_cast<size_t>(m)]; }
  const SuParams& su(int n) const { return sus_[static_cast<size_t>(n)]; }
  const LinkGains& link(int m, int n) const {
    return links_[static_cast<size_t>(m) * sus_.size() + static_cast<size_t>(n)];
  }
  double noise_power() const { return noise_power_; }
  LogBase log_base() const { return log_base_; }

  /// log(x) in the configured base.
  double rate_log(double x) const;

 private:
  std::vector<PuParams> pus_;
  std::vector<SuParams> sus_;
  std::vector<LinkGains> links_;
  double noise_power_;
  LogBase log_base_;
};

/// All per-pair physical quantities for a given exchange, in one struct.
struct DerivedRates {
  double snr_direct = 0.0;     // kappa_d = G_m^2 / sigma^2
  double snr_relay = 0.0;      // kappa_n, AF combining SNR
  double rate_coop = 0.0;      // R_n^m = (1/2) log(1 + kappa_d + kappa_n)
  double rate_effective = 0.0; // R~_n^m, frame-averaged cooperative rate
  double rate_direct = 0.0;    // R_d^m = log(1 + kappa_d)
  double su_rate = 0.0;        // R_{n(m)} = log(1 + G_{n(m)}^2 / sigma^2)
  double su_energy = 0.0;      // S_{n(m)} = (T_m/2) p + t
  double gs_constant = 0.0;    // A = C_n T_m / (2 (T_m + t))
};

/// SNR of the PU's direct channel: G_m^2 / sigma^2.
double direct_snr(const PuParams& pu, double noise_power);

/// SNR of the amplify-and-forward relay path at relay power p:
///   kappa = p G1^2 G2^2 / ((p G2^2 + G1^2 + sigma^2) sigma^2).
/// Nondecreasing in p, with limit G1^2 / sigma^2 as p -> inf.
double relay_snr(double relay_power, const LinkGains& link, double noise_power);

/// PU utility: rate increase over the direct link,
///   Pi = T log(1 + kappa_d + kappa_n) / (2 (T + t)) - log(1 + kappa_d).
/// May be negative (the relay phases halve the PU's own airtime).
double pu_utility(const PuParams& pu, const LinkGains& link, double noise_power,
                  const ResourceExchange& exch, LogBase base);

/// SU utility: frame-averaged own rate minus energy cost,
///   Delta = (t (R_{n(m)} - C_n) - p C_n T / 2) / (T + t).
double su_utility(const SuParams& su, int pu_band, double coop_time,
                  double noise_power, const ResourceExchange& exch, LogBase base);

/// SU's own-band rate R_{n(m)} = log(1 + G_{n(m)}^2 / sigma^2).
double su_rate(const SuParams& su, int pu_band, double noise_power, LogBase base);

/// SU type H = 2 (R_{n(m)} - C_n) / (C_n T): the one scalar a PU needs to
/// know about an SU. Negative when the band is not worth its energy cost.
double su_type(const SuParams& su, int pu_band, double coop_time,
               double noise_power, LogBase base);

DerivedRates derived_rates(const NetworkInstance& inst, int m, int n,
                           const ResourceExchange& exch);

// Instance-indexed conveniences used throughout the solver layers.
double pair_pu_utility(const NetworkInstance& inst, int m, int n,
                       const ResourceExchange& exch);
double pair_su_utility(const NetworkInstance& inst, int m, int n,
                       const ResourceExchange& exch);
double pair_su_rate(const NetworkInstance& inst, int m, int n);
double pair_su_type(const NetworkInstance& inst, int m, int n);

/// 10^(db/10).
double db_to_linear(double db);
/// 10 log10(x), x > 0.
double linear_to_db(double linear);

}  // namespace specmatch

#endif
