#include "serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace specmatch {

namespace {

constexpr const char* kInstanceMagic = "specmatch-instance v1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  return is;
}

double parse_double(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number for " + what + ": '" + tok + "'");
  }
}

int parse_int(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad integer for " + what + ": '" + tok + "'");
  }
}

}  // namespace

void write_instance(std::ostream& os, const NetworkInstance& inst) {
  os << kInstanceMagic << "\n";
  os << "# gains in dB, noise in dBm; linear = 10^(dB/10); PU tx power = 1\n";
  os << "log_base " << (inst.log_base() == LogBase::natural ? "natural" : "base2")
     << "\n";
  os << "noise_dbm " << fmt(linear_to_db(inst.noise_power())) << "\n";
  os << "pus " << inst.pu_count() << "\n";
  os << "sus " << inst.su_count() << "\n";
  for (int m = 0; m < inst.pu_count(); ++m) {
    const PuParams& pu = inst.pu(m);
    os << "pu " << m << " gain_db " << fmt(linear_to_db(pu.direct_gain_sq))
       << " coop_time " << fmt(pu.coop_time);
    if (pu.position_tx && pu.position_rx) {
      os << " pos " << fmt(pu.position_tx->x) << " " << fmt(pu.position_tx->y) << " "
         << fmt(pu.position_rx->x) << " " << fmt(pu.position_rx->y);
    }
    os << "\n";
  }
  for (int n = 0; n < inst.su_count(); ++n) {
    const SuParams& su = inst.su(n);
    os << "su " << n << " sensitivity " << fmt(su.power_sensitivity) << " gains_db";
    for (double g : su.direct_gain_sq_per_pu) os << " " << fmt(linear_to_db(g));
    if (su.position_tx && su.position_rx) {
      os << " pos " << fmt(su.position_tx->x) << " " << fmt(su.position_tx->y) << " "
         << fmt(su.position_rx->x) << " " << fmt(su.position_rx->y);
    }
    os << "\n";
  }
  for (int m = 0; m < inst.pu_count(); ++m) {
    for (int n = 0; n < inst.su_count(); ++n) {
      const LinkGains& link = inst.link(m, n);
      os << "link " << m << " " << n << " relay1_db " << fmt(linear_to_db(link.g1_sq))
         << " relay2_db " << fmt(linear_to_db(link.g2_sq)) << "\n";
    }
  }
}

void save_instance(const NetworkInstance& inst, const std::string& path) {
  auto os = open_out(path);
  write_instance(os, inst);
  if (!os) throw IoError("write failed: " + path);
}

NetworkInstance read_instance(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kInstanceMagic)
    throw ParseError("not a specmatch instance file (bad magic line)");

  LogBase base = LogBase::natural;
  double noise_dbm = 0.0;
  bool have_noise = false;
  int m_count = -1;
  int n_count = -1;
  std::vector<PuParams> pus;
  std::vector<SuParams> sus;
  std::vector<LinkGains> links;
  std::vector<bool> pu_seen, su_seen, link_seen;

  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto where = [&] { return " (line " + std::to_string(line_no) + ")"; };
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);

    if (word == "log_base") {
      if (toks.size() != 1) throw ParseError("log_base needs one value" + where());
      if (toks[0] == "natural")
        base = LogBase::natural;
      else if (toks[0] == "base2")
        base = LogBase::base2;
      else
        throw ParseError("log_base must be natural or base2" + where());
    } else if (word == "noise_dbm") {
      if (toks.size() != 1) throw ParseError("noise_dbm needs one value" + where());
      noise_dbm = parse_double(toks[0], "noise_dbm");
      have_noise = true;
    } else if (word == "pus") {
      if (toks.size() != 1) throw ParseError("pus needs one value" + where());
      m_count = parse_int(toks[0], "pus");
      if (m_count < 0) throw ParseError("pus must be nonnegative" + where());
      pus.assign(static_cast<size_t>(m_count), PuParams{});
      pu_seen.assign(static_cast<size_t>(m_count), false);
    } else if (word == "sus") {
      if (toks.size() != 1) throw ParseError("sus needs one value" + where());
      n_count = parse_int(toks[0], "sus");
      if (n_count < 0) throw ParseError("sus must be nonnegative" + where());
      sus.assign(static_cast<size_t>(n_count), SuParams{});
      su_seen.assign(static_cast<size_t>(n_count), false);
      if (m_count < 0) throw ParseError("pus must precede sus" + where());
      links.assign(static_cast<size_t>(m_count) * static_cast<size_t>(n_count),
                   LinkGains{});
      link_seen.assign(links.size(), false);
    } else if (word == "pu") {
      if (m_count < 0) throw ParseError("pu record before pus header" + where());
      if (toks.size() != 5 && toks.size() != 10)
        throw ParseError("malformed pu record" + where());
      const int id = parse_int(toks[0], "pu id");
      if (id < 0 || id >= m_count || pu_seen[static_cast<size_t>(id)])
        throw ParseError("bad or duplicate pu id" + where());
      if (toks[1] != "gain_db" || toks[3] != "coop_time")
        throw ParseError("malformed pu record" + where());
      PuParams pu;
      pu.id = id;
      pu.direct_gain_sq = db_to_linear(parse_double(toks[2], "pu gain_db"));
      pu.coop_time = parse_double(toks[4], "pu coop_time");
      if (toks.size() == 10) {
        if (toks[5] != "pos") throw ParseError("malformed pu record" + where());
        pu.position_tx = Vec2{parse_double(toks[6], "pos"), parse_double(toks[7], "pos")};
        pu.position_rx = Vec2{parse_double(toks[8], "pos"), parse_double(toks[9], "pos")};
      }
      pus[static_cast<size_t>(id)] = pu;
      pu_seen[static_cast<size_t>(id)] = true;
    } else if (word == "su") {
      if (n_count < 0 || m_count < 0)
        throw ParseError("su record before headers" + where());
      const size_t base_len = 4 + static_cast<size_t>(m_count);
      if (toks.size() != base_len && toks.size() != base_len + 5)
        throw ParseError("malformed su record" + where());
      const int id = parse_int(toks[0], "su id");
      if (id < 0 || id >= n_count || su_seen[static_cast<size_t>(id)])
        throw ParseError("bad or duplicate su id" + where());
      if (toks[1] != "sensitivity" || toks[3] != "gains_db")
        throw ParseError("malformed su record" + where());
      SuParams su;
      su.id = id;
      su.power_sensitivity = parse_double(toks[2], "su sensitivity");
      su.direct_gain_sq_per_pu.reserve(static_cast<size_t>(m_count));
      for (int m = 0; m < m_count; ++m)
        su.direct_gain_sq_per_pu.push_back(
            db_to_linear(parse_double(toks[4 + static_cast<size_t>(m)], "su gain")));
      if (toks.size() == base_len + 5) {
        if (toks[base_len] != "pos") throw ParseError("malformed su record" + where());
        su.position_tx = Vec2{parse_double(toks[base_len + 1], "pos"),
                              parse_double(toks[base_len + 2], "pos")};
        su.position_rx = Vec2{parse_double(toks[base_len + 3], "pos"),
                              parse_double(toks[base_len + 4], "pos")};
      }
      sus[static_cast<size_t>(id)] = su;
      su_seen[static_cast<size_t>(id)] = true;
    } else if (word == "link") {
      if (links.empty() && (m_count <= 0 || n_count <= 0))
        throw ParseError("link record before headers" + where());
      if (toks.size() != 6 || toks[2] != "relay1_db" || toks[4] != "relay2_db")
        throw ParseError("malformed link record" + where());
      const int m = parse_int(toks[0], "link pu");
      const int n = parse_int(toks[1], "link su");
      if (m < 0 || m >= m_count || n < 0 || n >= n_count)
        throw ParseError("link indices out of range" + where());
      const size_t idx =
          static_cast<size_t>(m) * static_cast<size_t>(n_count) + static_cast<size_t>(n);
      if (link_seen[idx]) throw ParseError("duplicate link record" + where());
      links[idx].g1_sq = db_to_linear(parse_double(toks[3], "relay1_db"));
      links[idx].g2_sq = db_to_linear(parse_double(toks[5], "relay2_db"));
      link_seen[idx] = true;
    } else {
      throw ParseError("unknown directive '" + word + "'" + where());
    }
  }

  if (!have_noise || m_count < 0 || n_count < 0)
    throw ParseError("instance file missing noise_dbm/pus/sus headers");
  for (size_t i = 0; i < pu_seen.size(); ++i)
    if (!pu_seen[i]) throw ParseError("missing pu record " + std::to_string(i));
  for (size_t i = 0; i < su_seen.size(); ++i)
    if (!su_seen[i]) throw ParseError("missing su record " + std::to_string(i));
  for (size_t i = 0; i < link_seen.size(); ++i)
    if (!link_seen[i]) throw ParseError("missing link record #" + std::to_string(i));

  return NetworkInstance(std::move(pus), std::move(sus), std::move(links),
                         db_to_linear(noise_dbm), base);
}

NetworkInstance load_instance(const std::string& path) {
  auto is = open_in(path);
  return read_instance(is);
}

void write_matching(std::ostream& os, const Matching& matching) {
  os << "# specmatch matching: m <pu> n <su> p <relay_power> t <access_time> "
        "delta <su_utility>\n";
  for (const MatchedPair& pair : matching.pairs()) {
    os << "m " << pair.pu << " n " << pair.su << " p " << fmt(pair.exchange.relay_power)
       << " t " << fmt(pair.exchange.access_time) << " delta " << fmt(pair.su_utility)
       << "\n";
  }
}

void save_matching(const Matching& matching, const std::string& path) {
  auto os = open_out(path);
  write_matching(os, matching);
  if (!os) throw IoError("write failed: " + path);
}

Matching read_matching(std::istream& is, int pu_count, int su_count) {
  Matching matching(pu_count, su_count);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string km, kn, kp, kt, kd;
    int m = -1, n = -1;
    double p = 0.0, t = 0.0, delta = 0.0;
    ls >> km >> m >> kn >> n >> kp >> p >> kt >> t >> kd >> delta;
    if (!ls || km != "m" || kn != "n" || kp != "p" || kt != "t" || kd != "delta")
      throw ParseError("malformed matching record (line " + std::to_string(line_no) +
                       ")");
    std::string extra;
    if (ls >> extra)
      throw ParseError("trailing tokens in matching record (line " +
                       std::to_string(line_no) + ")");
    if (m < 0 || m >= pu_count || n < 0 || n >= su_count)
      throw ParseError("matching indices out of range (line " +
                       std::to_string(line_no) + ")");
    matching.match(m, n, delta, ResourceExchange{p, t});
  }
  return matching;
}

Matching load_matching(const std::string& path, int pu_count, int su_count) {
  auto is = open_in(path);
  return read_matching(is, pu_count, su_count);
}

void write_trace(std::ostream& os, const MechanismTrace& trace) {
  os << "# round,actor,action,target,value\n";
  for (const TraceEvent& ev : trace.events) {
    os << ev.round << "," << ev.side << ev.actor << "," << trace_action_name(ev.action)
       << ",";
    if (ev.target >= 0)
      os << (ev.side == 'P' ? 'S' : 'P') << ev.target;
    else
      os << "-";
    os << "," << fmt(ev.value) << "\n";
  }
  os << "# rounds=" << trace.rounds << " converged=" << (trace.converged ? 1 : 0)
     << "\n";
}

void save_trace(const MechanismTrace& trace, const std::string& path) {
  auto os = open_out(path);
  write_trace(os, trace);
  if (!os) throw IoError("write failed: " + path);
}

void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << "seed,M,N,mechanism,total_pu_utility,total_su_utility,matched_pairs,rounds,"
        "runtime_ms\n";
  for (const ExperimentRow& row : rows) {
    os << row.seed << "," << row.m_count << "," << row.n_count << "," << row.mechanism
       << "," << fmt(row.total_pu_utility) << "," << fmt(row.total_su_utility) << ","
       << row.matched_pairs << "," << (row.failed ? -1 : row.rounds) << ","
       << fmt(row.runtime_ms) << "\n";
  }
}

void save_rows_csv(const std::vector<ExperimentRow>& rows, const std::string& path) {
  auto os = open_out(path);
  write_rows_csv(os, rows);
  if (!os) throw IoError("write failed: " + path);
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "M,N,mechanism,mean_pu,stderr_pu,mean_su,stderr_su,gap\n";
  for (const SummaryRow& row : rows) {
    os << row.m_count << "," << row.n_count << "," << row.mechanism << ","
       << fmt(row.mean_pu) << "," << fmt(row.stderr_pu) << "," << fmt(row.mean_su)
       << "," << fmt(row.stderr_su) << "," << fmt(row.gap) << "\n";
  }
}

void save_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  auto os = open_out(path);
  write_summary_csv(os, rows);
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace specmatch
