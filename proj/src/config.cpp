#include "frbm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "frbm/errors.hpp"

namespace frbm {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

const char* solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::Direct: return "direct";
    case SolverKind::ConjugateGradient: return "cg";
    case SolverKind::Sor: return "sor";
  }
  return "direct";
}

class Reader {
 public:
  Reader(const std::string& section, const pt::ptree& tree) : section_(section), tree_(tree) {}

  bool has(const char* key) {
    seen_.insert(key);
    return tree_.find(key) != tree_.not_found();
  }
  std::string raw(const char* key) { return trim(tree_.get<std::string>(key)); }
  std::string name(const char* key) const { return "[" + section_ + "] " + key; }

  void get(const char* key, double& out) {
    if (has(key)) out = to_double(raw(key), key);
  }
  void get(const char* key, int& out) {
    if (has(key)) out = static_cast<int>(to_int(raw(key), key));
  }
  void get(const char* key, std::uint64_t& out) {
    if (has(key)) {
      const std::string v = raw(key);
      std::uint64_t x = 0;
      int base = 10;
      const char* first = v.data();
      if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        base = 16;
        first += 2;
      }
      auto res = std::from_chars(first, v.data() + v.size(), x, base);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) bad(key, v, "an unsigned integer");
      out = x;
    }
  }
  void get(const char* key, bool& out) {
    if (!has(key)) return;
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "yes") out = true;
    else if (v == "false" || v == "0" || v == "no") out = false;
    else bad(key, v, "a boolean");
  }
  void get(const char* key, std::string& out) {
    if (has(key)) out = raw(key);
  }
  void get(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& item : split(raw(key), ',')) out.push_back(to_double(item, key));
  }
  void get(const char* key, std::vector<int>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& item : split(raw(key), ',')) out.push_back(static_cast<int>(to_int(item, key)));
  }
  void get(const char* key, Vec2& out) {
    if (!has(key)) return;
    const auto parts = split(raw(key), ',');
    if (parts.size() != 2) bad(key, raw(key), "a point x, y");
    out = {to_double(parts[0], key), to_double(parts[1], key)};
  }
  void get(const char* key, std::vector<Vec2>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& pair : split(raw(key), ';')) {
      const auto parts = split(pair, ',');
      if (parts.size() != 2) bad(key, pair, "points x, y; x, y; ...");
      out.push_back({to_double(parts[0], key), to_double(parts[1], key)});
    }
  }

  void reject_unknown() const {
    for (const auto& kv : tree_) {
      if (!seen_.count(kv.first)) throw ValidationError("unknown config key " + name(kv.first.c_str()));
    }
  }

  [[noreturn]] void bad(const char* key, const std::string& v, const char* what) const {
    throw ValidationError("config key " + name(key) + ": '" + v + "' is not " + what);
  }

 private:
  double to_double(const std::string& v, const char* key) const {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) bad(key, v, "a number");
    return x;
  }
  long long to_int(const std::string& v, const char* key) const {
    long long x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) bad(key, v, "an integer");
    return x;
  }

  std::string section_;
  const pt::ptree& tree_;
  std::set<std::string> seen_;
};

void read_run(Reader& r, ExperimentConfig& c) {
  r.get("mode", c.mode);
  r.get("b_sweep", c.b_sweep);
}

void read_geometry(Reader& r, GeometrySpec& g) {
  r.get("alpha", g.alpha);
  r.get("b", g.b);
  r.get("ell", g.ell);
  r.get("n_gen", g.n_gen);
  r.get("r0", g.r0);
  r.get("barrier_gen_min", g.barrier_gen_min);
  r.get("barrier_gen_max", g.barrier_gen_max);
  r.get("relax_gap", g.relax_gap);
}

void read_sim(Reader& r, ExperimentConfig& c) {
  SimParams& s = c.sim;
  r.get("h0", s.h0);
  r.get("c", s.c);
  r.get("c_edge", s.c_edge);
  r.get("edge_corners", s.edge_corners);
  r.get("wedge_jumps", s.wedge_jumps);
  r.get("bridge_correction", s.bridge_correction);
  r.get("jump_factor", s.jump_factor);
  r.get("max_bounces", s.max_bounces);
  r.get("max_time", s.max_time);
  r.get("h_min", s.h_min);
  r.get("seed", s.seed);
  r.get("start", s.start);
  r.get("n_paths", c.n_paths);
}

void read_analysis(Reader& r, AnalysisOptions& a) {
  r.get("depths", a.depths);
  r.get("bootstrap", a.bootstrap);
  r.get("bootstrap_seed", a.bootstrap_seed);
  r.get("tail_s", a.tail_s);
  r.get("records", a.records);
  r.get("monitor", a.monitor);
}

void read_oracle(Reader& r, OracleConfig& o) {
  r.get("pitch", o.grid.pitch);
  r.get("depth_offset", o.grid.depth_offset);
  std::string solver;
  r.get("solver", solver);
  if (!solver.empty()) {
    if (solver == "direct") o.solver = SolverKind::Direct;
    else if (solver == "cg") o.solver = SolverKind::ConjugateGradient;
    else if (solver == "sor") o.solver = SolverKind::Sor;
    else r.bad("solver", solver, "one of direct, cg, sor");
  }
  r.get("cell", o.cell);
  r.get("b_sweep", o.b_sweep);
  r.get("probes", o.probes);
  r.get("paths_per_probe", o.paths_per_probe);
  r.get("zeta_radius", o.zeta_radius);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (std::find(known_modes().begin(), known_modes().end(), c.mode) == known_modes().end()) {
    throw ValidationError("config key [run] mode: unknown mode '" + c.mode + "'");
  }
  try {
    validate(c.geometry);
    for (double b : c.b_sweep) {
      GeometrySpec g = c.geometry;
      g.b = b;
      validate(g);
    }
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("[geometry] ") + e.what());
  }
  try {
    validate(c.sim);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("[sim] ") + e.what());
  }
  if (c.analysis.bootstrap < 0) throw ValidationError("config key [analysis] bootstrap must be >= 0");
  for (int d : c.analysis.depths) {
    if (d < 1 || d > c.geometry.n_gen) {
      throw ValidationError("config key [analysis] depths: " + std::to_string(d) + " outside 1..n_gen");
    }
  }
  if (c.analysis.tail_s < 0.0) throw ValidationError("config key [analysis] tail_s must be >= 0");
  if (c.analysis.monitor != "-") {
    try {
      Word::parse(c.analysis.monitor);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("config key [analysis] monitor: ") + e.what());
    }
  }
  try {
    Word::parse(c.oracle.cell);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config key [oracle] cell: ") + e.what());
  }
  if (!(c.oracle.grid.pitch > 0.0)) throw ValidationError("config key [oracle] pitch must be positive");
  if (c.oracle.grid.depth_offset < 1) throw ValidationError("config key [oracle] depth_offset must be >= 1");
  if (!(c.oracle.zeta_radius > 0.0)) throw ValidationError("config key [oracle] zeta_radius must be positive");
  if (c.oracle.paths_per_probe < 1) throw ValidationError("config key [oracle] paths_per_probe must be >= 1");
  for (double b : c.oracle.b_sweep) {
    GeometrySpec g = c.geometry;
    g.b = b;
    try {
      validate(g);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("config key [oracle] b_sweep: ") + e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError("config key '" + section + "' must appear inside a section");
    }
    Reader r(section, body);
    if (section == "run") read_run(r, c);
    else if (section == "geometry") read_geometry(r, c.geometry);
    else if (section == "sim") read_sim(r, c);
    else if (section == "analysis") read_analysis(r, c.analysis);
    else if (section == "oracle") read_oracle(r, c.oracle);
    else throw ValidationError("unknown config section [" + section + "]");
    r.reject_unknown();
  }
  if (overrides.seed) c.sim.seed = *overrides.seed;
  if (overrides.relax_gap) c.geometry.relax_gap = true;
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  const GeometrySpec& g = c.geometry;
  const SimParams& s = c.sim;
  os << "[run]\n";
  os << "mode = " << c.mode << "\n";
  os << "b_sweep = " << fmt_list(c.b_sweep) << "\n";
  os << "\n[geometry]\n";
  os << "alpha = " << fmt(g.alpha) << "\n";
  os << "b = " << fmt(g.b) << "\n";
  os << "ell = " << fmt(g.ell) << "\n";
  os << "n_gen = " << g.n_gen << "\n";
  os << "r0 = " << fmt(g.r0) << "\n";
  os << "barrier_gen_min = " << g.barrier_gen_min << "\n";
  os << "barrier_gen_max = " << g.barrier_gen_max << "\n";
  os << "relax_gap = " << (g.relax_gap ? "true" : "false") << "\n";
  os << "\n[sim]\n";
  os << "h0 = " << fmt(s.h0) << "\n";
  os << "c = " << fmt(s.c) << "\n";
  os << "c_edge = " << fmt(s.c_edge) << "\n";
  os << "edge_corners = " << (s.edge_corners ? "true" : "false") << "\n";
  os << "wedge_jumps = " << (s.wedge_jumps ? "true" : "false") << "\n";
  os << "bridge_correction = " << (s.bridge_correction ? "true" : "false") << "\n";
  os << "jump_factor = " << fmt(s.jump_factor) << "\n";
  os << "max_bounces = " << s.max_bounces << "\n";
  os << "max_time = " << fmt(s.max_time) << "\n";
  os << "h_min = " << fmt(s.h_min) << "\n";
  os << "seed = " << s.seed << "\n";
  os << "start = " << fmt(s.start.x) << ", " << fmt(s.start.y) << "\n";
  os << "n_paths = " << c.n_paths << "\n";
  os << "\n[analysis]\n";
  os << "depths = ";
  for (std::size_t i = 0; i < c.analysis.depths.size(); ++i) os << (i ? ", " : "") << c.analysis.depths[i];
  os << "\n";
  os << "bootstrap = " << c.analysis.bootstrap << "\n";
  os << "bootstrap_seed = " << c.analysis.bootstrap_seed << "\n";
  os << "tail_s = " << fmt(c.analysis.tail_s) << "\n";
  os << "records = " << c.analysis.records << "\n";
  os << "monitor = " << c.analysis.monitor << "\n";
  os << "\n[oracle]\n";
  os << "pitch = " << fmt(c.oracle.grid.pitch) << "\n";
  os << "depth_offset = " << c.oracle.grid.depth_offset << "\n";
  os << "solver = " << solver_name(c.oracle.solver) << "\n";
  os << "cell = " << c.oracle.cell << "\n";
  os << "b_sweep = " << fmt_list(c.oracle.b_sweep) << "\n";
  os << "probes = ";
  for (std::size_t i = 0; i < c.oracle.probes.size(); ++i) {
    os << (i ? "; " : "") << fmt(c.oracle.probes[i].x) << ", " << fmt(c.oracle.probes[i].y);
  }
  os << "\n";
  os << "paths_per_probe = " << c.oracle.paths_per_probe << "\n";
  os << "zeta_radius = " << fmt(c.oracle.zeta_radius) << "\n";
  return os.str();
}

}  // namespace frbm
