#include "config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace specmatch {

namespace {

struct Value {
  enum class Kind { number, string, number_list, string_list } kind;
  double number = 0.0;
  std::string text;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

Value parse_scalar(const std::string& raw, int line_no) {
  Value v;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.kind = Value::Kind::string;
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  try {
    size_t pos = 0;
    v.number = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    v.kind = Value::Kind::number;
    return v;
  } catch (const std::exception&) {
    throw ParseError("config line " + std::to_string(line_no) +
                     ": expected a number or quoted string, got '" + raw + "'");
  }
}

Value parse_value(const std::string& raw, int line_no) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']')
      throw ParseError("config line " + std::to_string(line_no) +
                       ": unterminated array");
    Value v;
    v.kind = Value::Kind::number_list;
    const std::string inner = raw.substr(1, raw.size() - 2);
    std::string item;
    std::istringstream is(inner);
    bool any_string = false;
    std::vector<Value> items;
    while (std::getline(is, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      items.push_back(parse_scalar(t, line_no));
      any_string = any_string || items.back().kind == Value::Kind::string;
    }
    if (any_string) {
      v.kind = Value::Kind::string_list;
      for (const Value& it : items) {
        if (it.kind != Value::Kind::string)
          throw ParseError("config line " + std::to_string(line_no) +
                           ": mixed array types");
        v.strings.push_back(it.text);
      }
    } else {
      for (const Value& it : items) v.numbers.push_back(it.number);
    }
    return v;
  }
  return parse_scalar(raw, line_no);
}

using Section = std::map<std::string, std::pair<Value, int>>;  // value, line

// Typed extraction; every get_* consumes the key so leftovers can be
// reported as unknown.
struct SectionReader {
  std::string name;
  Section entries;

  std::optional<Value> take(const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    Value v = it->second.first;
    entries.erase(it);
    return v;
  }
  void number(const std::string& key, double& out) {
    if (auto v = take(key)) {
      if (v->kind != Value::Kind::number)
        throw ParseError("[" + name + "] " + key + " must be a number");
      out = v->number;
    }
  }
  void integer(const std::string& key, int& out) {
    double d = out;
    number(key, d);
    if (d != std::floor(d))
      throw ParseError("[" + name + "] " + key + " must be an integer");
    out = static_cast<int>(d);
  }
  void unsigned64(const std::string& key, uint64_t& out) {
    double d = static_cast<double>(out);
    number(key, d);
    if (d < 0 || d != std::floor(d))
      throw ParseError("[" + name + "] " + key + " must be a nonnegative integer");
    out = static_cast<uint64_t>(d);
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = take(key)) {
      if (v->kind != Value::Kind::string)
        throw ParseError("[" + name + "] " + key + " must be a quoted string");
      out = v->text;
    }
  }
  void int_list(const std::string& key, std::vector<int>& out) {
    if (auto v = take(key)) {
      if (v->kind != Value::Kind::number_list)
        throw ParseError("[" + name + "] " + key + " must be a number array");
      out.clear();
      for (double d : v->numbers) {
        if (d != std::floor(d))
          throw ParseError("[" + name + "] " + key + " must hold integers");
        out.push_back(static_cast<int>(d));
      }
    }
  }
  void string_list(const std::string& key, std::vector<std::string>& out) {
    if (auto v = take(key)) {
      if (v->kind == Value::Kind::number_list && v->numbers.empty()) {
        out.clear();
        return;
      }
      if (v->kind != Value::Kind::string_list)
        throw ParseError("[" + name + "] " + key + " must be a string array");
      out = v->strings;
    }
  }
  void finish() const {
    if (!entries.empty()) {
      const auto& [key, value] = *entries.begin();
      throw ParseError("unknown key '" + key + "' in section [" + name +
                       "] (line " + std::to_string(value.second) + ")");
    }
  }
};

}  // namespace

CliConfig parse_cli_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::istringstream is(text);
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("config line " + std::to_string(line_no) +
                         ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current != "market" && current != "topology" && current != "solver" &&
          current != "experiment")
        throw ParseError("unknown section [" + current + "] (line " +
                         std::to_string(line_no) + ")");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    if (current.empty())
      throw ParseError("config line " + std::to_string(line_no) +
                       ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty() || raw.empty())
      throw ParseError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    auto [it, inserted] =
        sections[current].emplace(key, std::make_pair(parse_value(raw, line_no), line_no));
    if (!inserted)
      throw ParseError("duplicate key '" + key + "' (line " + std::to_string(line_no) +
                       ")");
  }

  CliConfig cfg;

  {
    SectionReader r{"market", sections["market"]};
    r.integer("pus", cfg.pus);
    r.integer("sus", cfg.sus);
    r.finish();
    if (cfg.pus < 0 || cfg.sus < 0)
      throw ParseError("[market] pus and sus must be nonnegative");
  }
  {
    SectionReader r{"topology", sections["topology"]};
    r.number("area_side", cfg.topology.area_side);
    r.number("pu_pair_distance", cfg.topology.pu_pair_distance);
    r.number("su_pair_distance", cfg.topology.su_pair_distance);
    r.number("pair_distance_jitter", cfg.topology.pair_distance_jitter);
    r.number("pathloss_constant_db", cfg.topology.pathloss_constant_db);
    r.number("pathloss_exponent", cfg.topology.pathloss_exponent);
    r.number("pu_direct_extra_attenuation_db",
             cfg.topology.pu_direct_extra_attenuation_db);
    r.number("noise_dbm", cfg.topology.noise_dbm);
    r.number("su_power_sensitivity", cfg.topology.su_power_sensitivity);
    r.number("pu_coop_time", cfg.topology.pu_coop_time);
    std::string base = cfg.topology.log_base == LogBase::natural ? "natural" : "base2";
    r.text("log_base", base);
    if (base == "natural")
      cfg.topology.log_base = LogBase::natural;
    else if (base == "base2")
      cfg.topology.log_base = LogBase::base2;
    else
      throw ParseError("[topology] log_base must be \"natural\" or \"base2\"");
    r.finish();
  }
  {
    SectionReader r{"solver", sections["solver"]};
    r.integer("grid_points", cfg.solver.grid_points);
    r.integer("refine_iters", cfg.solver.refine_iters);
    r.number("tol", cfg.solver.tol);
    r.number("p_max", cfg.solver.p_max);
    r.number("t_max_factor", cfg.solver.t_max_factor);
    r.integer("gs_curve_samples", cfg.solver.gs_curve_samples);
    r.finish();
  }
  {
    SectionReader r{"experiment", sections["experiment"]};
    r.int_list("m_values", cfg.experiment.m_values);
    r.int_list("n_values", cfg.experiment.n_values);
    r.integer("seeds", cfg.experiment.seeds);
    r.string_list("mechanisms", cfg.experiment.mechanisms);
    r.number("epsilon", cfg.experiment.epsilon);
    r.unsigned64("master_seed", cfg.experiment.master_seed);
    r.integer("jobs", cfg.experiment.jobs);
    r.finish();
  }
  return cfg;
}

CliConfig load_cli_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_cli_config(buffer.str());
}

std::string default_config_text() {
  return R"(# specmatch configuration (all values shown are the defaults)

[market]
pus = 2
sus = 2

[topology]
area_side = 1500
pu_pair_distance = 1000
su_pair_distance = 400
pair_distance_jitter = 0.1
pathloss_constant_db = -30
pathloss_exponent = 2
pu_direct_extra_attenuation_db = -20
noise_dbm = -105
su_power_sensitivity = 1
pu_coop_time = 1
log_base = "natural"

[solver]
grid_points = 512
refine_iters = 60
tol = 1e-9
p_max = 100
t_max_factor = 10
gs_curve_samples = 256

[experiment]
m_values = [2]
n_values = [1, 2, 3, 4, 5, 6, 7, 8]
seeds = 1000
mechanisms = ["g-dac", "g-rdac"]
epsilon = 0.01
master_seed = 1
jobs = 1
)";
}

}  // namespace specmatch
