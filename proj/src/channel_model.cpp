#include "channel_model.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace specmatch {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

NetworkInstance::NetworkInstance(std::vector<PuParams> pus, std::vector<SuParams> sus,
                                 std::vector<LinkGains> links, double noise_power,
                                 LogBase log_base)
    : pus_(std::move(pus)),
      sus_(std::move(sus)),
      links_(std::move(links)),
      noise_power_(noise_power),
      log_base_(log_base) {
  require(positive_finite(noise_power_), "noise power must be positive");
  const size_t m_count = pus_.size();
  const size_t n_count = sus_.size();
  require(links_.size() == m_count * n_count, "link matrix must be M x N");
  for (const PuParams& pu : pus_) {
    require(positive_finite(pu.direct_gain_sq),
            "PU " + std::to_string(pu.id) + ": direct gain must be positive");
    require(positive_finite(pu.coop_time),
            "PU " + std::to_string(pu.id) + ": coop time must be positive");
  }
  for (const SuParams& su : sus_) {
    require(positive_finite(su.power_sensitivity),
            "SU " + std::to_string(su.id) + ": power sensitivity must be positive");
    require(su.direct_gain_sq_per_pu.size() == m_count,
            "SU " + std::to_string(su.id) + ": needs one band gain per PU");
    for (double g : su.direct_gain_sq_per_pu) {
      require(positive_finite(g),
              "SU " + std::to_string(su.id) + ": band gains must be positive");
    }
  }
  for (const LinkGains& link : links_) {
    require(positive_finite(link.g1_sq) && positive_finite(link.g2_sq),
            "relay link gains must be positive");
  }
}

double NetworkInstance::rate_log(double x) const {
  return log_base_ == LogBase::natural ? std::log(x) : std::log2(x);
}

double direct_snr(const PuParams& pu, double noise_power) {
  return pu.direct_gain_sq / noise_power;
}

double relay_snr(double relay_power, const LinkGains& link, double noise_power) {
  if (relay_power <= 0.0) return 0.0;
  const double num = relay_power * link.g1_sq * link.g2_sq;
  const double den = (relay_power * link.g2_sq + link.g1_sq + noise_power) * noise_power;
  return num / den;
}

namespace {

double log_in_base(double x, LogBase base) {
  return base == LogBase::natural ? std::log(x) : std::log2(x);
}

}  // namespace

double pu_utility(const PuParams& pu, const LinkGains& link, double noise_power,
                  const ResourceExchange& exch, LogBase base) {
  const double kd = direct_snr(pu, noise_power);
  const double kn = relay_snr(exch.relay_power, link, noise_power);
  const double t = exch.access_time;
  const double coop = pu.coop_time * log_in_base(1.0 + kd + kn, base) /
                      (2.0 * (pu.coop_time + t));
  return coop - log_in_base(1.0 + kd, base);
}

double su_rate(const SuParams& su, int pu_band, double noise_power, LogBase base) {
  const double gain = su.direct_gain_sq_per_pu[static_cast<size_t>(pu_band)];
  return log_in_base(1.0 + gain / noise_power, base);
}

double su_utility(const SuParams& su, int pu_band, double coop_time,
                  double noise_power, const ResourceExchange& exch, LogBase base) {
  const double rate = su_rate(su, pu_band, noise_power, base);
  const double t = exch.access_time;
  const double p = exch.relay_power;
  const double c = su.power_sensitivity;
  return (t * (rate - c) - p * c * coop_time / 2.0) / (coop_time + t);
}

double su_type(const SuParams& su, int pu_band, double coop_time,
               double noise_power, LogBase base) {
  const double rate = su_rate(su, pu_band, noise_power, base);
  const double c = su.power_sensitivity;
  return 2.0 * (rate - c) / (c * coop_time);
}

DerivedRates derived_rates(const NetworkInstance& inst, int m, int n,
                           const ResourceExchange& exch) {
  const PuParams& pu = inst.pu(m);
  const SuParams& su = inst.su(n);
  const LinkGains& link = inst.link(m, n);
  const double sigma2 = inst.noise_power();
  const double t = exch.access_time;

  DerivedRates out;
  out.snr_direct = direct_snr(pu, sigma2);
  out.snr_relay = relay_snr(exch.relay_power, link, sigma2);
  out.rate_coop = 0.5 * inst.rate_log(1.0 + out.snr_direct + out.snr_relay);
  out.rate_effective = pu.coop_time / (pu.coop_time + t) * out.rate_coop;
  out.rate_direct = inst.rate_log(1.0 + out.snr_direct);
  out.su_rate = su_rate(su, m, sigma2, inst.log_base());
  out.su_energy = pu.coop_time / 2.0 * exch.relay_power + t;
  out.gs_constant = su.power_sensitivity * pu.coop_time / (2.0 * (pu.coop_time + t));
  return out;
}

double pair_pu_utility(const NetworkInstance& inst, int m, int n,
                       const ResourceExchange& exch) {
  return pu_utility(inst.pu(m), inst.link(m, n), inst.noise_power(), exch,
                    inst.log_base());
}

double pair_su_utility(const NetworkInstance& inst, int m, int n,
                       const ResourceExchange& exch) {
  return su_utility(inst.su(n), m, inst.pu(m).coop_time, inst.noise_power(), exch,
                    inst.log_base());
}

double pair_su_rate(const NetworkInstance& inst, int m, int n) {
  return su_rate(inst.su(n), m, inst.noise_power(), inst.log_base());
}

double pair_su_type(const NetworkInstance& inst, int m, int n) {
  return su_type(inst.su(n), m, inst.pu(m).coop_time, inst.noise_power(),
                 inst.log_base());
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace specmatch
