#include "frbm/harness.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "frbm/errors.hpp"
#include "frbm/report.hpp"

namespace frbm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Outputs {
 public:
  Outputs(const std::string& dir, std::ostream& log) : dir_(dir), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ValidationError("--out: cannot create directory " + dir + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& bytes, bool artifact = true) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    os << bytes;
    if (!os) throw std::runtime_error("cannot write " + path.string());
    if (artifact) artifacts_.push_back({name, bytes});
    log_ << "wrote " << path.string() << "\n";
  }
  void input(const std::string& name, const std::string& bytes) { artifacts_.push_back({name, bytes}); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::vector<Artifact>& artifacts() const { return artifacts_; }

 private:
  fs::path dir_;
  std::ostream& log_;
  std::vector<Artifact> artifacts_;
};

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<double> sweep_values(const ExperimentConfig& c) {
  return c.b_sweep.empty() ? std::vector<double>{c.geometry.b} : c.b_sweep;
}

std::string suffix(const ExperimentConfig& c, double b) { return c.b_sweep.empty() ? "" : "_b" + fmt(b); }

SolveOptions solve_options(const ExperimentConfig& c) {
  SolveOptions s;
  s.solver = c.oracle.solver;
  return s;
}

GeometryModel monitored_model(const ExperimentConfig& c, const GeometrySpec& spec) {
  GeometryModel model = GeometryModel::build(spec);
  if (c.analysis.monitor == "-") return model;
  const Word q = Word::parse(c.analysis.monitor);
  if (q.size() >= std::size_t(spec.n_gen) || !spec.has_barrier(int(q.size()))) {
    throw ValidationError("config key [analysis] monitor: cell " + q.str() + " has no barrier box below depth n_gen");
  }
  return model.with_shell_monitor(model.restricted_domain(q));
}

void run_geometry(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  const GeometryModel model = GeometryModel::build(c.geometry);
  out.write("geometry.svg", geometry_svg(model));
  out.write("geometry.json", geometry_json(model));
  const double pitch = required_connectivity_pitch(c.geometry) / 2.0;
  const ConnectivityReport rep = check_connectivity(model, pitch);
  log << "connectivity: " << rep.reachable_absorbers << "/" << rep.total_absorbers << " absorbers, "
      << rep.reachable_gap_openings << " gap openings at pitch " << pitch << "\n";
  json g = to_json(rep);
  g["barrier_boxes"] = model.barrier_boxes().size();
  g["squares"] = model.square_count(model.depth());
  sec.geometry.push_back(g);
  if (!rep.connected) throw ValidationError("geometry: some absorbing squares are unreachable from the origin");
}

void run_simulate(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  for (double b : sweep_values(c)) {
    GeometrySpec spec = c.geometry;
    spec.b = b;
    const GeometryModel model = monitored_model(c, spec);
    const BatchResult res = batch_simulate(model, c.sim, c.n_paths);
    std::ostringstream records, measure;
    write_records_csv(records, res.records);
    write_measure_csv(measure, res.measure);
    out.write("records" + suffix(c, b) + ".csv", records.str());
    out.write("measure" + suffix(c, b) + ".csv", measure.str());
    json s;
    s["b"] = b;
    s["paths"] = c.n_paths;
    s["absorbed"] = res.measure.absorbed();
    s["censored"] = res.measure.censored;
    s["excluded"] = res.measure.excluded;
    s["tau"] = to_json(res.tau);
    s["diagnostics"] = to_json(res.diagnostics);
    sec.simulation.push_back(s);
    log << "b=" << b << ": " << res.measure.absorbed() << "/" << c.n_paths << " absorbed, " << res.measure.censored
        << " censored, " << res.diagnostics.aborted << " aborted\n";
  }
}

void run_analyze(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  const auto values = sweep_values(c);
  if (!c.analysis.records.empty() && values.size() > 1) {
    throw ValidationError("config key [analysis] records names one file but [run] b_sweep has several values");
  }
  json dims = json::array();
  for (double b : values) {
    const std::string name = "records" + suffix(c, b) + ".csv";
    const std::string path = c.analysis.records.empty() ? out.path(name) : c.analysis.records;
    const std::string text = read_file(path);
    out.input(name, text);
    std::istringstream is(text);
    const BatchResult res = summarize_records(read_records_csv(is), c.geometry.n_gen);
    const EmpiricalMeasure& m = res.measure;
    if (m.absorbed() == 0) throw ValidationError("analyze: " + path + " has no absorbed path");

    DimensionReport dim = entropy_dimension(m, c.geometry.alpha, c.analysis.bootstrap, c.analysis.bootstrap_seed);
    json d = to_json(dim);
    d["b"] = b;
    sec.dimension.push_back(d);
    dims.push_back(d);

    std::vector<int> depths = c.analysis.depths;
    if (depths.empty()) {
      for (int k = 1; k <= m.depth; ++k) depths.push_back(k);
    }
    for (int k : depths) {
      const EmpiricalMeasure ck = coarsen(m, k);
      json u = to_json(uniformity_stats(ck));
      u["b"] = b;
      if (c.analysis.bootstrap > 0) u["ratio_band"] = to_json(ratio_band(ck, c.analysis.bootstrap, c.analysis.bootstrap_seed));
      sec.uniformity.push_back(u);
      std::ostringstream cells;
      write_measure_csv(cells, ck);
      out.write("cells_depth" + std::to_string(k) + suffix(c, b) + ".csv", cells.str());
    }
    std::ostringstream boxes;
    write_box_counts_csv(boxes, m, c.geometry.alpha);
    out.write("box_counts" + suffix(c, b) + ".csv", boxes.str());

    json t;
    t["b"] = b;
    t["tau"] = to_json(res.tau);
    if (res.tau.taus.size() >= kTailMinRecords) {
      const double s = c.analysis.tail_s > 0.0 ? c.analysis.tail_s : res.tau.q50;
      t["fit"] = to_json(tau_tail_fit(res.tau, s));
    } else {
      t["fit"] = nullptr;
      log << "b=" << b << ": tail fit skipped, " << res.tau.taus.size() << " uncensored samples\n";
    }
    if (c.analysis.monitor != "-") {
      t["shell_crossings"] = to_json(shell_crossing_stats(res.records, int(Word::parse(c.analysis.monitor).size())));
    }
    sec.tail.push_back(t);
    log << "b=" << b << ": entropy slope " << dim.slope << " (reference " << dim.reference << ")\n";
  }
  out.write("dimension.json", dims.dump(1) + "\n");
}

void run_oracle(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  const Word q = Word::parse(c.oracle.cell);
  const SolveOptions solve = solve_options(c);
  const auto rows = lemma_hmD_check(c.geometry, q, 1, 2, c.oracle.b_sweep, c.oracle.grid, solve);
  std::ostringstream table;
  table << "b,sup_ratio,ratio_at_center,zeta_sup\n";
  json ratio = json::array(), zeta = json::array();
  for (const auto& row : rows) {
    GeometrySpec spec = c.geometry;
    spec.b = row.b;
    const ZetaResult z = zeta_field(spec, q, c.oracle.zeta_radius, c.oracle.grid, solve);
    ratio.push_back(to_json(row));
    zeta.push_back(to_json(z));
    table << fmt(row.b) << ',' << fmt(row.sup_ratio) << ',' << fmt(row.ratio_at_center) << ',' << fmt(z.sup_d_prime)
          << '\n';
    log << "b=" << row.b << ": sup U1/U2 = " << row.sup_ratio << ", at center " << row.ratio_at_center
        << ", sup zeta = " << z.sup_d_prime << "\n";
  }
  out.write("oracle.csv", table.str());
  json doc = {{"cell", q.str()}, {"pitch", c.oracle.grid.pitch}, {"ratio", ratio}, {"zeta", zeta}};
  out.write("oracle.json", doc.dump(1) + "\n");
  sec.oracle.push_back(doc);
}

void run_compare(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  const Word q = Word::parse(c.oracle.cell);
  const auto probes = c.oracle.probes.empty() ? default_probes(c.geometry, q) : c.oracle.probes;
  const CrossValidation cv =
      mc_cross_validate(c.geometry, q, c.sim, c.oracle.paths_per_probe, probes, c.oracle.grid, solve_options(c));
  std::ostringstream table;
  table << "x,y,label,mc,mc_sigma,pde,tolerance,pass\n";
  for (const auto& r : cv.rows) {
    table << fmt(r.probe.x) << ',' << fmt(r.probe.y) << ',' << r.label << ',' << fmt(r.mc) << ',' << fmt(r.mc_sigma)
          << ',' << fmt(r.pde) << ',' << fmt(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  out.write("compare.csv", table.str());
  sec.compare.push_back(to_json(cv));
  log << "cross-validation " << (cv.pass ? "passed" : "FAILED") << " over " << probes.size() << " probes\n";
}

void run_contrast(const ExperimentConfig& c, Outputs& out, ReportSections& sec, std::ostream& log) {
  const GeometryModel model = GeometryModel::build(c.geometry).with_absorbing_barriers();
  const BatchResult res = batch_simulate(model, c.sim, c.n_paths);
  const double n = double(c.n_paths);
  json j;
  j["b"] = c.geometry.b;
  j["n_gen"] = c.geometry.n_gen;
  j["paths"] = c.n_paths;
  j["absorbed_on_k"] = res.measure.absorbed();
  j["absorbed_elsewhere"] = res.diagnostics.absorbed_other;
  j["censored"] = res.measure.censored;
  j["aborted"] = res.diagnostics.aborted;
  j["k_fraction"] = n > 0 ? double(res.measure.absorbed()) / n : 0.0;
  out.write("contrast.json", j.dump(1) + "\n");
  sec.contrast.push_back(j);
  log << "barriers absorbing: K-absorption fraction " << j["k_fraction"].get<double>() << "\n";
}

}  // namespace

void run_mode(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log) {
  Outputs out(out_dir, log);
  ReportSections sec;
  const std::string& mode = config.mode;
  std::exception_ptr failure;
  try {
    if (mode == "geometry") run_geometry(config, out, sec, log);
    else if (mode == "simulate") run_simulate(config, out, sec, log);
    else if (mode == "analyze") run_analyze(config, out, sec, log);
    else if (mode == "oracle") run_oracle(config, out, sec, log);
    else if (mode == "compare") run_compare(config, out, sec, log);
    else if (mode == "dirichlet-contrast") run_contrast(config, out, sec, log);
    else throw ValidationError("unknown mode '" + mode + "'");
  } catch (const ValidationError&) {
    throw;
  } catch (...) {
    failure = std::current_exception();
  }
  if (!out.artifacts().empty()) {
    out.write("report.json", report_bundle(config, out.artifacts(), sec).dump(1) + "\n", false);
  }
  if (failure) std::rethrow_exception(failure);
  if (mode == "compare" && !sec.compare.empty() && !sec.compare.front()["pass"].get<bool>()) {
    throw NumericalError("compare: Monte Carlo and PDE disagree beyond tolerance (see compare.csv)");
  }
}

int run_main(const std::string& mode, const std::string& config_path, const std::string& out_dir,
             const ConfigOverrides& overrides, std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig config = load_config(config_path, overrides);
    config.mode = mode;
    validate(config);
    run_mode(config, out_dir, log);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace frbm
