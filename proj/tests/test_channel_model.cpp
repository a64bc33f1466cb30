#include <cmath>
#include <random>

#include <doctest.h>

#include "channel_model.hpp"
#include "errors.hpp"
#include "oracle.hpp"

using namespace specmatch;

namespace {

// Single-pair instance with every parameter explicit.
NetworkInstance pair_instance(double direct_gain_sq, double g1_sq, double g2_sq,
                              double own_gain_sq, double noise, double sensitivity,
                              double coop_time, LogBase base = LogBase::natural) {
  PuParams pu;
  pu.id = 0;
  pu.direct_gain_sq = direct_gain_sq;
  pu.coop_time = coop_time;
  SuParams su;
  su.id = 0;
  su.power_sensitivity = sensitivity;
  su.direct_gain_sq_per_pu = {own_gain_sq};
  return NetworkInstance({pu}, {su}, {LinkGains{g1_sq, g2_sq}}, noise, base);
}

double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

}  // namespace

TEST_CASE("direct snr") {
  PuParams pu;
  pu.direct_gain_sq = 2.5e-11;
  pu.coop_time = 1.0;
  CHECK(direct_snr(pu, 2.5e-11) == doctest::Approx(1.0));

  pu.direct_gain_sq = std::pow(10.0, -110.0 / 10.0);
  const double noise = std::pow(10.0, -105.0 / 10.0);
  CHECK(direct_snr(pu, noise) == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
}

TEST_CASE("nonpositive gains are rejected at construction") {
  CHECK_THROWS_AS(pair_instance(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(pair_instance(1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(pair_instance(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(pair_instance(1.0, 1.0, 1.0, 1.0, 1.0, -2.0, 1.0), ValidationError);
  CHECK_THROWS_AS(pair_instance(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("relay snr closed form") {
  const LinkGains sym{3.0, 3.0};
  CHECK(relay_snr(0.0, sym, 3.0) == 0.0);
  CHECK(relay_snr(1.0, LinkGains{2.0, 2.0}, 2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(relay_snr(3.0, LinkGains{4.0, 2.0}, 1.0) ==
        doctest::Approx(24.0 / 11.0).epsilon(1e-15));
}

TEST_CASE("relay snr monotone in power and bounded by the first hop") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 1000; ++i) {
    LinkGains link{uniform(gen, 1e-12, 10.0), uniform(gen, 1e-12, 10.0)};
    const double noise = uniform(gen, 1e-12, 2.0);
    double p1 = uniform(gen, 0.0, 50.0);
    double p2 = uniform(gen, 0.0, 50.0);
    if (p1 > p2) std::swap(p1, p2);
    const double k1 = relay_snr(p1, link, noise);
    const double k2 = relay_snr(p2, link, noise);
    CHECK(k1 <= k2 + 1e-15);
    CHECK(k2 <= link.g1_sq / noise + 1e-12);
  }
}

TEST_CASE("pu utility zero when the relay exactly offsets the half-rate penalty") {
  // kappa_n = kappa_d^2 + kappa_d collapses the utility to zero at t = 0.
  const double kd = 1.0;
  const double kn = kd * kd + kd;
  // kn(p) = 100 p / (p + 101) with these gains and unit noise.
  const double p = 101.0 * kn / (100.0 - kn);
  const auto inst = pair_instance(1.0, 100.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(pair_pu_utility(inst, 0, 0, {p, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pu utility direct substitution") {
  const double p = 303.0 / 97.0;  // gives kappa_n = 3 with the gains below
  const auto inst = pair_instance(1.0, 100.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  const double expected = 0.5 * std::log(5.0) - std::log(2.0);
  CHECK(pair_pu_utility(inst, 0, 0, {p, 0.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pu utility matches the independent transcription") {
  const auto inst = oracle::random_instance(11, 2, 3);
  std::mt19937_64 gen(13);
  for (int i = 0; i < 2000; ++i) {
    const int m = static_cast<int>(gen() % 2);
    const int n = static_cast<int>(gen() % 3);
    const ResourceExchange exch{uniform(gen, 0.0, 100.0), uniform(gen, 0.0, 10.0)};
    const double got = pair_pu_utility(inst, m, n, exch);
    const double want = oracle::pu_utility_ref(
        inst.pu(m).direct_gain_sq, inst.link(m, n).g1_sq, inst.link(m, n).g2_sq,
        inst.noise_power(), inst.pu(m).coop_time, exch.relay_power, exch.access_time,
        true);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("pu utility strictly decreasing in access time") {
  const auto inst = oracle::random_instance(17, 1, 1);
  std::mt19937_64 gen(19);
  for (int i = 0; i < 500; ++i) {
    const double p = uniform(gen, 0.0, 50.0);
    const double t1 = uniform(gen, 0.0, 8.0);
    const double t2 = t1 + 1e-6 + uniform(gen, 0.0, 2.0);
    CHECK(pair_pu_utility(inst, 0, 0, {p, t1}) > pair_pu_utility(inst, 0, 0, {p, t2}));
  }
}

TEST_CASE("su utility basics") {
  // No exchange, no utility.
  const auto inst = oracle::random_instance(23, 1, 1);
  CHECK(pair_su_utility(inst, 0, 0, {0.0, 0.0}) == 0.0);

  // R = 2 nats, C = 1, T = 1, t = 1, p = 1  ->  (1*1 - 0.5) / 2.
  const double own = std::expm1(2.0);  // gain with unit noise giving rate 2
  const auto unit = pair_instance(1.0, 1.0, 1.0, own, 1.0, 1.0, 1.0);
  CHECK(pair_su_utility(unit, 0, 0, {1.0, 1.0}) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("su utility without reward is pure energy cost") {
  std::mt19937_64 gen(29);
  const auto inst = oracle::random_instance(31, 1, 1);
  const double c = inst.su(0).power_sensitivity;
  for (int i = 0; i < 200; ++i) {
    const double p = uniform(gen, 0.0, 20.0);
    CHECK(pair_su_utility(inst, 0, 0, {p, 0.0}) ==
          doctest::Approx(-p * c / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("type summarizes the su side") {
  const double own = std::expm1(1.0);  // rate exactly C -> type 0
  const auto zero = pair_instance(1.0, 1.0, 1.0, own, 1.0, 1.0, 1.0);
  CHECK(pair_su_type(zero, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));

  const auto two = pair_instance(1.0, 1.0, 1.0, std::expm1(2.0), 1.0, 1.0, 1.0);
  CHECK(pair_su_type(two, 0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("negative type means no exchange ever profits the su") {
  const double own = std::expm1(0.5);  // rate 0.5 < C = 1
  const auto inst = pair_instance(1.0, 1.0, 1.0, own, 1.0, 1.0, 1.0);
  REQUIRE(pair_su_type(inst, 0, 0) < 0.0);
  std::mt19937_64 gen(37);
  for (int i = 0; i < 500; ++i) {
    const ResourceExchange exch{uniform(gen, 0.0, 100.0), uniform(gen, 0.0, 10.0)};
    CHECK(pair_su_utility(inst, 0, 0, exch) <= 1e-15);
  }
}

TEST_CASE("su utility agrees with its type form") {
  // Identity between the direct expression and (t H - p) * A.
  std::mt19937_64 gen(41);
  const auto inst = oracle::random_instance(43, 3, 3);
  for (int i = 0; i < 10000; ++i) {
    const int m = static_cast<int>(gen() % 3);
    const int n = static_cast<int>(gen() % 3);
    const ResourceExchange exch{uniform(gen, 0.0, 100.0), uniform(gen, 0.0, 10.0)};
    const double direct = pair_su_utility(inst, m, n, exch);
    const DerivedRates rates = derived_rates(inst, m, n, exch);
    const double via_type =
        (exch.access_time * pair_su_type(inst, m, n) - exch.relay_power) *
        rates.gs_constant;
    CHECK(std::abs(direct - via_type) <= 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("derived rates are consistent") {
  const auto inst = oracle::random_instance(47, 2, 2);
  const ResourceExchange exch{2.0, 1.5};
  const DerivedRates rates = derived_rates(inst, 1, 0, exch);
  CHECK(rates.snr_direct == doctest::Approx(direct_snr(inst.pu(1), inst.noise_power())));
  CHECK(rates.snr_relay ==
        doctest::Approx(relay_snr(2.0, inst.link(1, 0), inst.noise_power())));
  CHECK(rates.rate_coop ==
        doctest::Approx(0.5 * std::log(1.0 + rates.snr_direct + rates.snr_relay)));
  CHECK(rates.rate_effective ==
        doctest::Approx(rates.rate_coop * inst.pu(1).coop_time /
                        (inst.pu(1).coop_time + 1.5)));
  CHECK(rates.rate_direct == doctest::Approx(std::log(1.0 + rates.snr_direct)));
  CHECK(rates.su_energy ==
        doctest::Approx(inst.pu(1).coop_time / 2.0 * 2.0 + 1.5));
  CHECK(rates.gs_constant ==
        doctest::Approx(inst.su(0).power_sensitivity * inst.pu(1).coop_time /
                        (2.0 * (inst.pu(1).coop_time + 1.5))));
  // kappa_n vanishes with the relay off.
  CHECK(derived_rates(inst, 1, 0, {0.0, 1.0}).snr_relay == 0.0);
}

TEST_CASE("log base only rescales utilities") {
  PuParams pu;
  pu.id = 0;
  pu.direct_gain_sq = 1e-11;
  pu.coop_time = 1.0;
  SuParams su;
  su.id = 0;
  su.power_sensitivity = 1.0;
  su.direct_gain_sq_per_pu = {1e-9};
  const std::vector<LinkGains> links{LinkGains{1e-9, 1e-9}};
  const NetworkInstance nat({pu}, {su}, links, 1e-10, LogBase::natural);
  const NetworkInstance two({pu}, {su}, links, 1e-10, LogBase::base2);
  const ResourceExchange exch{3.0, 0.7};
  CHECK(pair_pu_utility(two, 0, 0, exch) ==
        doctest::Approx(pair_pu_utility(nat, 0, 0, exch) / std::log(2.0)));
}
