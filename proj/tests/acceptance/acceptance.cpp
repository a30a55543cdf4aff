// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero if
// any criterion fails. Path counts follow the acceptance table; FRBM_THREADS
// caps the worker count.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frbm/errors.hpp"
#include "frbm/measure.hpp"
#include "frbm/pde_oracle.hpp"
#include "frbm/rbm_sim.hpp"

using namespace frbm;

namespace {

constexpr double kAlpha = 0.4;
constexpr double kEll = 1.1;

GeometrySpec spec(double b, int n) {
  GeometrySpec g;
  g.alpha = kAlpha;
  g.b = b;
  g.ell = kEll;
  g.n_gen = n;
  g.relax_gap = true;
  return g;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void progress(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

struct Verdict {
  std::vector<std::string> details;
  void check(bool ok, const std::string& what) {
    details.push_back((ok ? "ok: " : "FAILED: ") + what);
    if (!ok) failed = true;
  }
  bool failed = false;
};

// Shared reflected run: b = 0.1, N = 2, start at the origin, root shell monitored.
struct MainRun {
  BatchResult res;
};

const MainRun& main_run() {
  static const MainRun run = [] {
    progress("main run: b=0.1 N=2, 200000 paths");
    const auto t0 = std::chrono::steady_clock::now();
    const GeometryModel base = GeometryModel::build(spec(0.1, 2));
    const GeometryModel model = base.with_shell_monitor(base.restricted_domain(Word{}));
    SimParams p;
    p.seed = 20260101;
    MainRun r{batch_simulate(model, p, 200000)};
    progress(fmt("main run done in %.0f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    return r;
  }();
  return run;
}

// Depth-2 words are mapped by the two mirror symmetries of the layout
// (x -> -x swaps digits 1,2 and 3,4; y -> -y swaps 1,3 and 2,4). The orbit of
// a word is its image under both flips applied to every digit.
int flip_x(int d) { return d == 1 ? 2 : d == 2 ? 1 : d == 3 ? 4 : 3; }
int flip_y(int d) { return d == 1 ? 3 : d == 3 ? 1 : d == 2 ? 4 : 2; }

std::vector<std::vector<std::size_t>> depth2_orbits() {
  std::vector<std::vector<std::size_t>> orbits;
  std::vector<bool> seen(16, false);
  for (std::size_t i = 0; i < 16; ++i) {
    if (seen[i]) continue;
    const Word w = Word::from_index(i, 2);
    std::vector<std::size_t> orbit;
    for (int fx = 0; fx < 2; ++fx) {
      for (int fy = 0; fy < 2; ++fy) {
        std::string s;
        for (std::size_t k = 0; k < w.size(); ++k) {
          int d = w[k];
          if (fx) d = flip_x(d);
          if (fy) d = flip_y(d);
          s += char('0' + d);
        }
        const std::size_t j = Word::parse(s).index();
        if (!seen[j]) {
          seen[j] = true;
          orbit.push_back(j);
        }
      }
    }
    orbits.push_back(orbit);
  }
  return orbits;
}

Verdict criterion_uniformity() {
  Verdict v;
  const EmpiricalMeasure& m = main_run().res.measure;
  const double n = double(m.absorbed());
  const auto p = m.probabilities();
  const auto orbits = depth2_orbits();
  v.check(orbits.size() == 4, fmt("%.0f symmetry orbits of depth-2 cells", double(orbits.size())));
  std::vector<double> orbit_mean;
  for (const auto& orbit : orbits) {
    double mean = 0.0;
    for (std::size_t i : orbit) mean += p[i] / double(orbit.size());
    orbit_mean.push_back(mean);
    const double sigma = std::sqrt(mean * (1.0 - mean) / n);
    double worst = 0.0;
    for (std::size_t i : orbit) worst = std::max(worst, std::abs(p[i] - mean) / sigma);
    v.check(worst <= 3.0, "orbit of " + Word::from_index(orbit.front(), 2).str() +
                              fmt(": mean %.5f, worst cell deviation %.2f sigma", mean, worst));
  }
  const UniformityStats u = uniformity_stats(m);
  const auto [lo, hi] = std::minmax_element(orbit_mean.begin(), orbit_mean.end());
  v.check(u.ratio <= 1.35, fmt("r_2 = %.4f over cells (orbit means %.5f..%.5f)", u.ratio, *lo, *hi));
  v.check(m.censored == 0 || double(m.censored) / double(m.paths) < 0.005,
          fmt("%.0f absorbed of %.0f paths", n, double(m.paths)));
  return v;
}

Verdict criterion_dimension() {
  Verdict v;
  const EmpiricalMeasure& m = main_run().res.measure;
  const DimensionReport d = entropy_dimension(m, kAlpha, 200, 7);
  const double target = 0.85 * std::log(4.0) / std::log(1.0 / kAlpha);
  v.check(d.slope >= target, fmt("entropy slope %.4f (target >= %.4f, reference %.4f)", d.slope, target, d.reference));

  std::vector<Band> bands;
  for (double b : {0.4, 0.2, 0.1}) {
    EmpiricalMeasure m1;
    if (b == 0.1) {
      m1 = coarsen(m, 1);
    } else {
      progress(fmt("sweep run: b=%.1f N=2, 50000 paths", b));
      SimParams p;
      p.seed = 20260102;
      m1 = coarsen(batch_simulate(GeometryModel::build(spec(b, 2)), p, 50000).measure, 1);
    }
    bands.push_back(ratio_band(m1, 1000, 11));
    v.check(true, fmt("b=%.1f: r_1 = %.4f, band [%.4f, %.4f]", b, bands.back().estimate, bands.back().lo,
                      bands.back().hi));
  }
  for (std::size_t i = 1; i < bands.size(); ++i) {
    v.check(bands[i].lo <= bands[i - 1].hi && bands[i].estimate <= bands[i - 1].hi,
            fmt("r_1 step %.0f: %.4f within the band of the larger gap (hi %.4f)", double(i), bands[i].estimate,
                bands[i - 1].hi));
  }
  return v;
}

Verdict criterion_tail() {
  Verdict v;
  const TauStats& t = main_run().res.tau;
  const TailFit f = tau_tail_fit(t, t.q50);
  v.check(f.r_squared > 0.95, fmt("tail R^2 = %.4f over %.0f points (s = q50 = %.4f)", f.r_squared, f.points, f.s));
  v.check(f.survival_factor < 1.0, fmt("per-s survival factor %.4f", f.survival_factor));
  v.check(t.censored_fraction < 0.005, fmt("censored fraction %.5f", t.censored_fraction));
  return v;
}

Verdict criterion_oracle() {
  Verdict v;
  OracleOptions opt;
  opt.pitch = 1.0 / 512.0;
  const std::vector<double> bs{0.4, 0.2, 0.1};
  for (auto [a, c] : {std::pair{1, 2}, std::pair{3, 4}}) {
    progress(fmt("oracle: pair U%.0f/U%.0f at pitch 1/512", a, c));
    const auto rows = lemma_hmD_check(spec(0.1, 2), Word{}, a, c, bs, opt);
    for (const auto& r : rows) {
      v.check(std::isfinite(r.sup_ratio), fmt("b=%.1f: sup U_a/U_b = %.4f", r.b, r.sup_ratio));
      v.check(std::abs(r.ratio_at_center - 1.0) <= 1e-6, fmt("b=%.1f: ratio at x_Q = %.12f", r.b, r.ratio_at_center));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      v.check(rows[i].sup_ratio < rows[i - 1].sup_ratio,
              fmt("sup ratio decreases from b=%.1f to b=%.1f", rows[i - 1].b, rows[i].b));
    }
  }
  // Every solve above asserts the discrete maximum principle and throws on a violation.
  v.check(true, "discrete maximum principle held on every solve");
  return v;
}

Verdict criterion_cross_validation() {
  Verdict v;
  const GeometrySpec g = spec(0.1, 2);
  OracleOptions opt;
  opt.pitch = 1.0 / 512.0;
  SimParams p;
  p.seed = 20260103;
  const auto probes = default_probes(g, Word{});
  v.check(probes.size() == 5, fmt("%.0f probes", double(probes.size())));
  progress("cross-validation: 5 probes, 20000 paths each");
  const CrossValidation cv = mc_cross_validate(g, Word{}, p, 20000, probes, opt);
  for (const auto& r : cv.rows) {
    v.check(r.pass, fmt("(%.3f,%.3f)", r.probe.x, r.probe.y) + " label " + std::to_string(r.label) +
                        fmt(": mc %.5f +- %.5f, pde %.5f, tol %.5f", r.mc, r.mc_sigma, r.pde, r.tolerance));
  }
  for (double s : cv.pde_sums) v.check(std::abs(s - 1.0) <= 1e-6, fmt("PDE outcome sum %.12f", s));
  return v;
}

Verdict criterion_contrast() {
  Verdict v;
  const GeometryModel model = GeometryModel::build(spec(0.1, 3));
  SimParams p;
  p.seed = 20260104;
  progress("contrast: absorbing barriers, N=3, 100000 paths");
  const BatchResult dead = batch_simulate(model.with_absorbing_barriers(), p, 100000);
  const double k_dead = double(dead.measure.absorbed()) / 100000.0;
  v.check(k_dead < 0.01, fmt("barriers absorbing: K fraction %.5f", k_dead));
  progress("contrast: reflecting barriers, N=3, 10000 paths");
  const std::uint64_t n = 10000;
  const BatchResult live = batch_simulate(model, p, n);
  const double k_live = double(live.measure.absorbed()) / double(n);
  const double censored = double(live.measure.censored) / double(n);
  v.check(live.measure.absorbed() + live.measure.censored == n,
          fmt("barriers reflecting: K fraction %.5f, censored %.5f, other %.0f", k_live, censored,
              double(live.measure.excluded)));
  v.check(censored < 0.005, fmt("reflecting run censoring %.5f", censored));
  return v;
}

double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = double(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max({d, double(i + 1) / n - u[i], u[i] - double(i) / n});
  return d;
}

Verdict criterion_calibration() {
  Verdict v;
  // Disk exit angle.
  const GeometryModel disk = GeometryModel::custom(
      {}, {ArcFeature{Arc{{0.0, 0.0}, 1.0, 0.0, 2.0 * std::numbers::pi}, FeatureKind::OuterCircle, Role::Absorbing, 0,
                      std::nullopt}});
  SimParams p;
  p.seed = 20260105;
  const std::uint64_t m = 100000;
  const BatchResult res = batch_simulate(disk, p, m);
  std::vector<double> u;
  for (const auto& r : res.records) {
    const double t = std::atan2(r.exit_point.y, r.exit_point.x) / (2.0 * std::numbers::pi);
    u.push_back(t < 0.0 ? t + 1.0 : t);
  }
  const double ks = ks_uniform(u);
  const double crit = 1.6276 / std::sqrt(double(m));
  v.check(res.diagnostics.absorbed_other == m && ks < crit, fmt("disk KS D = %.5f (1%% critical %.5f)", ks, crit));

  // Neumann strip: u = x + 1/2 between Dirichlet ends, zero flux on the walls.
  const double pitch = 1.0 / 64.0;
  const double h = 0.25 + pitch / 2.0;
  const GeometryModel strip = GeometryModel::custom(
      {SegmentFeature{{{-1.0, h}, {1.0, h}}, FeatureKind::BarrierSegment, Role::Reflecting, 0},
       SegmentFeature{{{-1.0, -h}, {1.0, -h}}, FeatureKind::BarrierSegment, Role::Reflecting, 0}},
      {});
  GridRecipe r;
  r.center = {0.0, 0.0};
  r.half_x = 0.5;
  r.half_y = 0.25 + 2.0 * pitch;
  r.pitch = pitch;
  r.region = [h](Vec2 q) { return std::abs(q.x) < 0.5 - 1e-12 && std::abs(q.y) < h; };
  r.absorbed_label = [](const Word&) { return -1; };
  r.outside_label = [h](Vec2 q) { return std::abs(q.y) > h ? -1 : q.x > 0.0 ? 1 : 2; };
  const Grid grid = build_grid(strip, r);
  for (SolverKind kind : {SolverKind::Direct, SolverKind::ConjugateGradient, SolverKind::Sor}) {
    SolveOptions opt;
    opt.solver = kind;
    const GridField f = solve_mixed(grid, {{1, 1.0}, {2, 0.0}}, opt);
    double err = 0.0;
    for (std::size_t n : grid.unknown_nodes) err = std::max(err, std::abs(f.values[n] - (grid.position(n).x + 0.5)));
    v.check(err < 1e-6 && grid.count(NodeKind::Neumann) > 0, fmt("strip solver %.0f: max error %.2e", double(kind), err));
  }

  // Reflection algebra over a lattice of displacements and unit normals.
  int bad = 0, cases = 0;
  for (int i = 0; i < 360; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 360.0;
    const Vec2 n{std::cos(th), std::sin(th)};
    const Vec2 t{-n.y, n.x};
    for (int j = 0; j < 72; ++j) {
      for (double len : {1e-6, 1.0, 1e3}) {
        const double ph = 2.0 * std::numbers::pi * j / 72.0;
        const Vec2 d{len * std::cos(ph), len * std::sin(ph)};
        const Vec2 rd = reflect(d, n);
        ++cases;
        const double tol = 1e-12 * len;
        if (norm(reflect(rd, n) - d) > tol || std::abs(norm(rd) - len) > tol ||
            std::abs(dot(rd, n) + dot(d, n)) > tol || std::abs(dot(rd, t) - dot(d, t)) > tol) {
          ++bad;
        }
      }
    }
  }
  v.check(bad == 0, fmt("reflection algebra: %.0f failures in %.0f cases", bad, cases));

  // Determinism: identical records for the same seed whatever the worker count.
  const GeometryModel model = GeometryModel::build(spec(0.1, 2));
  SimParams q;
  q.seed = 20260106;
  auto csv = [](const BatchResult& b) {
    std::ostringstream os;
    write_records_csv(os, b.records);
    return os.str();
  };
  const std::string one = csv(batch_simulate(model, q, 400, {.threads = 1}));
  const std::string four = csv(batch_simulate(model, q, 400, {.threads = 4}));
  const std::string again = csv(batch_simulate(model, q, 400, {.threads = 1}));
  v.check(one == four && one == again, "determinism: 1 and 4 workers give byte-identical records");
  return v;
}

Verdict criterion_renewal() {
  Verdict v;
  const GeometryModel model = GeometryModel::build(spec(0.1, 2));
  const RestrictedSimulator sim(model, Word{});
  SimParams p;
  p.seed = 20260107;
  progress("renewal: 50000 paths in D from x_Q");
  const auto counts = sim.batch(p, {0.0, 0.0}, 50000);
  double digits = 0.0;
  for (int d = 0; d < 4; ++d) digits += double(counts[d]);
  std::vector<double> law(4);
  for (int d = 0; d < 4; ++d) law[d] = double(counts[d]) / digits;
  v.check(digits > 0.0, fmt("digit law in D: %.4f %.4f %.4f %.4f", law[0], law[1], law[2], law[3]));
  const RenewalEstimate est = renewal_product_measure(law, 2, kAlpha);
  const double tv = tv_distance(est.measure.p, main_run().res.measure.probabilities());
  v.check(tv < 0.05, fmt("TV(product estimate, direct depth-2 measure) = %.5f", tv));

  const ShellStats s = shell_crossing_stats(main_run().res.records, 0);
  std::array<double, 4> pooled{};
  double total = 0.0;
  for (const auto& row : s.digit_by_n) {
    for (int d = 0; d < 4; ++d) pooled[d] += double(row[d]);
  }
  for (double x : pooled) total += x;
  for (double& x : pooled) x /= total;
  int groups = 0;
  for (std::size_t n = 0; n < s.digit_by_n.size(); ++n) {
    double m = 0.0;
    for (int d = 0; d < 4; ++d) m += double(s.digit_by_n[n][d]);
    if (m < 400.0) continue;
    ++groups;
    double worst = 0.0;
    for (int d = 0; d < 4; ++d) {
      const double f = double(s.digit_by_n[n][d]) / m;
      worst = std::max(worst, std::abs(f - pooled[d]) / std::sqrt(pooled[d] * (1.0 - pooled[d]) / m));
    }
    v.check(worst <= 3.0, fmt("n=%.0f shell crossings: %.0f paths, worst digit deviation %.2f sigma", double(n), m,
                              worst));
  }
  v.check(groups >= 2, fmt("%.0f shell-crossing groups with at least 400 paths", groups));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 symmetry and uniformity at depth 2", criterion_uniformity},
      {"2 entropy dimension and gap sweep", criterion_dimension},
      {"3 geometric tail of the absorption time", criterion_tail},
      {"4 harmonic-measure ratio oracle", criterion_oracle},
      {"5 Monte Carlo against the PDE oracle", criterion_cross_validation},
      {"6 absorbing-barrier contrast", criterion_contrast},
      {"7 calibration oracles", criterion_calibration},
      {"8 renewal consistency", criterion_renewal},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.failed ? "FAIL" : "PASS") << " criterion " << name << fmt(" (%.0f s)", secs) << "\n";
    for (const auto& d : v.details) std::cout << "    " << d << "\n";
    std::cout.flush();
    failures += v.failed;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
