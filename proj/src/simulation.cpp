#include "simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "mechanisms.hpp"

namespace specmatch {

void TopologyConfig::validate() const {
  if (!(area_side > 0.0)) throw ValidationError("area_side must be positive");
  if (!(pu_pair_distance > 0.0) || pu_pair_distance >= area_side)
    throw ValidationError("pu_pair_distance must lie in (0, area_side)");
  if (!(su_pair_distance > 0.0) || su_pair_distance >= area_side)
    throw ValidationError("su_pair_distance must lie in (0, area_side)");
  if (pair_distance_jitter < 0.0 || pair_distance_jitter >= 1.0)
    throw ValidationError("pair_distance_jitter must lie in [0, 1)");
  if (pathloss_exponent < 1.0) throw ValidationError("pathloss_exponent must be >= 1");
  if (!std::isfinite(pathloss_constant_db) || !std::isfinite(noise_dbm))
    throw ValidationError("pathloss constant and noise must be finite");
  if (!(su_power_sensitivity > 0.0)) throw ValidationError("C_n must be positive");
  if (!(pu_coop_time > 0.0)) throw ValidationError("T_m must be positive");
}

uint64_t mix_seed(uint64_t master, uint64_t a, uint64_t b, uint64_t c) {
  // splitmix64 finalizer chained over the inputs
  uint64_t x = master;
  for (uint64_t v : {a, b, c}) {
    x += 0x9e3779b97f4a7c15ULL + v;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
  }
  return x;
}

namespace {

struct PlacedPair {
  Vec2 tx;
  Vec2 rx;
};

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

PlacedPair place_pair(Rng& rng, const TopologyConfig& cfg, double nominal) {
  const double j = cfg.pair_distance_jitter;
  for (int attempt = 0; attempt < 64; ++attempt) {
    PlacedPair pair;
    pair.tx = {rng.uniform(0.0, cfg.area_side), rng.uniform(0.0, cfg.area_side)};
    const double d = nominal * (1.0 + j * (2.0 * rng.uniform() - 1.0));
    const double angle = 2.0 * M_PI * rng.uniform();
    pair.rx = {pair.tx.x + d * std::cos(angle), pair.tx.y + d * std::sin(angle)};
    if (pair.rx.x >= 0.0 && pair.rx.x <= cfg.area_side && pair.rx.y >= 0.0 &&
        pair.rx.y <= cfg.area_side)
      return pair;
  }
  // Extremely unlikely with sane configs; clamp rather than loop forever.
  PlacedPair pair;
  pair.tx = {rng.uniform(0.0, cfg.area_side), rng.uniform(0.0, cfg.area_side)};
  pair.rx = {std::clamp(pair.tx.x + nominal, 0.0, cfg.area_side), pair.tx.y};
  return pair;
}

double pathloss_gain_db(const TopologyConfig& cfg, double d) {
  // 1 m far-field floor keeps coincident draws finite.
  return cfg.pathloss_constant_db -
         10.0 * cfg.pathloss_exponent * std::log10(std::max(d, 1.0));
}

}  // namespace

NetworkInstance generate_topology(const TopologyConfig& cfg, int pu_count,
                                  int su_count, uint64_t seed) {
  cfg.validate();
  if (pu_count < 0 || su_count < 0)
    throw ValidationError("user counts must be nonnegative");
  Rng rng(seed);

  std::vector<PlacedPair> pu_pos;
  pu_pos.reserve(static_cast<size_t>(pu_count));
  for (int m = 0; m < pu_count; ++m)
    pu_pos.push_back(place_pair(rng, cfg, cfg.pu_pair_distance));
  std::vector<PlacedPair> su_pos;
  su_pos.reserve(static_cast<size_t>(su_count));
  for (int n = 0; n < su_count; ++n)
    su_pos.push_back(place_pair(rng, cfg, cfg.su_pair_distance));

  std::vector<PuParams> pus;
  pus.reserve(static_cast<size_t>(pu_count));
  for (int m = 0; m < pu_count; ++m) {
    PuParams pu;
    pu.id = m;
    pu.coop_time = cfg.pu_coop_time;
    const double d = distance(pu_pos[static_cast<size_t>(m)].tx,
                              pu_pos[static_cast<size_t>(m)].rx);
    pu.direct_gain_sq =
        db_to_linear(pathloss_gain_db(cfg, d) + cfg.pu_direct_extra_attenuation_db);
    pu.position_tx = pu_pos[static_cast<size_t>(m)].tx;
    pu.position_rx = pu_pos[static_cast<size_t>(m)].rx;
    pus.push_back(pu);
  }

  std::vector<SuParams> sus;
  sus.reserve(static_cast<size_t>(su_count));
  for (int n = 0; n < su_count; ++n) {
    SuParams su;
    su.id = n;
    su.power_sensitivity = cfg.su_power_sensitivity;
    const double d = distance(su_pos[static_cast<size_t>(n)].tx,
                              su_pos[static_cast<size_t>(n)].rx);
    // Pure path loss carries no frequency dependence, so the own-band gain
    // is the same on every PU band.
    su.direct_gain_sq_per_pu.assign(static_cast<size_t>(pu_count),
                                    db_to_linear(pathloss_gain_db(cfg, d)));
    su.position_tx = su_pos[static_cast<size_t>(n)].tx;
    su.position_rx = su_pos[static_cast<size_t>(n)].rx;
    sus.push_back(su);
  }

  std::vector<LinkGains> links(static_cast<size_t>(pu_count) *
                               static_cast<size_t>(su_count));
  for (int m = 0; m < pu_count; ++m) {
    for (int n = 0; n < su_count; ++n) {
      LinkGains link;
      link.g1_sq = db_to_linear(pathloss_gain_db(
          cfg, distance(pu_pos[static_cast<size_t>(m)].tx,
                        su_pos[static_cast<size_t>(n)].tx)));
      link.g2_sq = db_to_linear(pathloss_gain_db(
          cfg, distance(su_pos[static_cast<size_t>(n)].tx,
                        pu_pos[static_cast<size_t>(m)].rx)));
      links[static_cast<size_t>(m) * static_cast<size_t>(su_count) +
            static_cast<size_t>(n)] = link;
    }
  }

  return NetworkInstance(std::move(pus), std::move(sus), std::move(links),
                         db_to_linear(cfg.noise_dbm), cfg.log_base);
}

void ExperimentConfig::validate() const {
  if (m_values.empty() || n_values.empty())
    throw ValidationError("m_values and n_values must be nonempty");
  for (int m : m_values)
    if (m < 0) throw ValidationError("m_values must be nonnegative");
  for (int n : n_values)
    if (n < 0) throw ValidationError("n_values must be nonnegative");
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  if (mechanisms.empty()) throw ValidationError("mechanisms must be nonempty");
  for (const std::string& name : mechanisms)
    if (name != "g-dac" && name != "g-rdac" && name != "gsg-rdac")
      throw ValidationError("unknown mechanism: " + name);
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
}

std::vector<ExperimentRow> run_sweep(const ExperimentConfig& exp,
                                     const TopologyConfig& topo,
                                     const SolverConfig& solver) {
  exp.validate();
  topo.validate();
  solver.validate();

  struct Cell {
    int m_count, n_count, rep;
    std::string mechanism;
  };
  std::vector<Cell> cells;
  for (int m : exp.m_values)
    for (int n : exp.n_values)
      for (int rep = 0; rep < exp.seeds; ++rep)
        for (const std::string& mech : exp.mechanisms)
          cells.push_back({m, n, rep, mech});

  std::vector<ExperimentRow> rows(cells.size());
  std::atomic<size_t> cursor{0};

  const auto worker = [&]() {
    MechanismConfig mech_cfg;
    mech_cfg.record_trace = false;
    while (true) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      ExperimentRow& row = rows[i];
      row.seed = mix_seed(exp.master_seed, static_cast<uint64_t>(cell.m_count),
                          static_cast<uint64_t>(cell.n_count),
                          static_cast<uint64_t>(cell.rep));
      row.m_count = cell.m_count;
      row.n_count = cell.n_count;
      row.mechanism = cell.mechanism;
      try {
        const NetworkInstance inst =
            generate_topology(topo, cell.m_count, cell.n_count, row.seed);
        const auto start = std::chrono::steady_clock::now();
        const MechanismTrace trace =
            run_mechanism(inst, cell.mechanism, exp.epsilon, solver, mech_cfg);
        const auto stop = std::chrono::steady_clock::now();
        row.runtime_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        row.rounds = trace.rounds;
        row.matched_pairs = trace.matching.pair_count();
        double total_su = 0.0;
        double total_pu = 0.0;
        if (cell.mechanism == "gsg-rdac") {
          const GsTransfer transfer(inst, solver);
          total_pu = 0.0;
          for (double v : pu_utilities_of(transfer, trace.matching)) total_pu += v;
        } else {
          const UtfTransfer transfer(inst, solver);
          for (double v : pu_utilities_of(transfer, trace.matching)) total_pu += v;
        }
        for (int n = 0; n < inst.su_count(); ++n)
          total_su += trace.matching.su_utility(n);
        row.total_pu_utility = total_pu;
        row.total_su_utility = total_su;
      } catch (const std::exception&) {
        row.failed = true;
        row.total_pu_utility = std::numeric_limits<double>::quiet_NaN();
        row.total_su_utility = std::numeric_limits<double>::quiet_NaN();
        row.matched_pairs = 0;
        row.rounds = -1;
        row.runtime_ms = 0.0;
      }
    }
  };

  int jobs = exp.jobs;
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRow>& rows) {
  if (rows.empty()) throw EmptyInput("summarize: no rows");

  struct Acc {
    std::vector<double> pu, su;
  };
  std::map<std::tuple<int, int, std::string>, Acc> cells;
  for (const ExperimentRow& row : rows) {
    if (row.failed) continue;
    Acc& acc = cells[{row.m_count, row.n_count, row.mechanism}];
    acc.pu.push_back(row.total_pu_utility);
    acc.su.push_back(row.total_su_utility);
  }

  const auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  const auto stderr_of = [&](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
  };

  // Cell gap: relative shortfall of the reversed auction's PU total.
  std::map<std::pair<int, int>, double> gap;
  for (const auto& [key, acc] : cells) {
    const auto& [m, n, mech] = key;
    (void)acc;
    const auto fwd = cells.find({m, n, "g-dac"});
    const auto rev = cells.find({m, n, "g-rdac"});
    double g = std::numeric_limits<double>::quiet_NaN();
    if (fwd != cells.end() && rev != cells.end()) {
      const double opt = mean_of(fwd->second.pu);
      const double rob = mean_of(rev->second.pu);
      if (opt != 0.0) g = (opt - rob) / opt;
    }
    gap[{m, n}] = g;
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, acc] : cells) {
    const auto& [m, n, mech] = key;
    SummaryRow row;
    row.m_count = m;
    row.n_count = n;
    row.mechanism = mech;
    row.mean_pu = mean_of(acc.pu);
    row.stderr_pu = stderr_of(acc.pu, row.mean_pu);
    row.mean_su = mean_of(acc.su);
    row.stderr_su = stderr_of(acc.su, row.mean_su);
    row.gap = gap[{m, n}];
    out.push_back(row);
  }
  return out;
}

}  // namespace specmatch
