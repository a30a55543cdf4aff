#include "frbm/rbm_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/bessel.hpp>

#include "frbm/rng.hpp"

namespace frbm {
namespace {

// Offset applied after a reflection so the next sub-step starts strictly on
// the incoming side of the feature.
constexpr double kNudge = 1e-12;

struct ShellMonitor {
  bool armed = false;
  std::uint32_t completed = 0;

  void feed(const std::vector<Crossing>& xs, double t_limit) {
    for (const auto& x : xs) {
      if (x.t > t_limit) break;
      if (x.kind == FeatureKind::ShellArc) {
        armed = true;
      } else if (x.kind == FeatureKind::CapArc && armed) {
        ++completed;
        armed = false;
      }
    }
  }
};

bool has_monitors(const GeometryModel& model) {
  for (const auto& a : model.arcs()) {
    if (a.role == Role::Monitor) return true;
  }
  return false;
}

enum class StepResult { Moved, Absorbed, TooManyBounces };

struct StepOutcome {
  StepResult result = StepResult::Moved;
  Vec2 end;
  Crossing hit;
  std::uint64_t reflections = 0;
};

StepOutcome trace_step(const GeometryModel& model, Vec2 from, Vec2 delta, int max_bounces,
                       ShellMonitor* monitor) {
  StepOutcome out;
  Vec2 cur = from;
  Vec2 q = from + delta;
  for (int bounce = 0; bounce <= max_bounces; ++bounce) {
    const auto hit = model.first_crossing(cur, q);
    if (monitor) monitor->feed(model.monitor_crossings(cur, q), hit ? hit->t : 1.0);
    if (!hit) {
      out.end = q;
      return out;
    }
    if (hit->role == Role::Absorbing) {
      out.result = StepResult::Absorbed;
      out.hit = *hit;
      out.end = hit->point;
      return out;
    }
    if (bounce == max_bounces) break;
    const Vec2 n = hit->normal;
    const Vec2 rem = reflect(q - hit->point, n);
    const double side = dot(cur - hit->point, n) >= 0.0 ? 1.0 : -1.0;
    cur = hit->point + n * (side * kNudge);
    q = hit->point + rem;
    ++out.reflections;
  }
  out.result = StepResult::TooManyBounces;
  return out;
}

// CDF of the unit-disk exit time on a uniform grid:
//   P(T > t) = sum_k 2 / (j_k J_1(j_k)) exp(-j_k^2 t / 2),  j_k zeros of J_0.
struct DiskExitTable {
  static constexpr double kTLo = 0.005;
  static constexpr double kTHi = 14.0;
  static constexpr int kPoints = 1 << 14;
  std::vector<double> cdf;

  DiskExitTable() {
    constexpr int kTerms = 200;
    std::vector<double> zeros(kTerms), coef(kTerms);
    for (int k = 0; k < kTerms; ++k) {
      zeros[k] = boost::math::cyl_bessel_j_zero(0.0, k + 1);
      coef[k] = 2.0 / (zeros[k] * boost::math::cyl_bessel_j(1, zeros[k]));
    }
    cdf.resize(kPoints);
    for (int i = 0; i < kPoints; ++i) {
      const double t = kTLo + (kTHi - kTLo) * i / (kPoints - 1);
      double surv = 0.0;
      for (int k = 0; k < kTerms; ++k) surv += coef[k] * std::exp(-0.5 * zeros[k] * zeros[k] * t);
      cdf[i] = std::clamp(1.0 - surv, 0.0, 1.0);
    }
    for (int i = 1; i < kPoints; ++i) cdf[i] = std::max(cdf[i], cdf[i - 1]);
  }

  double inverse(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.begin()) return kTLo;
    if (it == cdf.end()) return kTHi;
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    const double f0 = cdf[i - 1], f1 = cdf[i];
    const double w = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
    const double dt = (kTHi - kTLo) / (kPoints - 1);
    return kTLo + dt * (double(i - 1) + w);
  }
};

const DiskExitTable& disk_exit_table() {
  static const DiskExitTable table;
  return table;
}

}  // namespace

double sample_disk_exit_time(double u) { return disk_exit_table().inverse(u); }

void validate(const SimParams& p) {
  if (!(p.h0 > 0.0)) throw ValidationError("sim.h0 must be positive");
  if (!(p.c > 0.0 && p.c <= 1.0)) throw ValidationError("sim.c must lie in (0, 1]");
  if (!(p.c_edge <= 1.0)) throw ValidationError("sim.c_edge must not exceed 1");
  if (p.max_bounces < 2) throw ValidationError("sim.max_bounces must be at least 2");
  if (!(p.max_time > 0.0)) throw ValidationError("sim.max_time must be positive");
  if (!(p.h_min > 0.0 && p.h_min <= p.h0)) throw ValidationError("sim.h_min must lie in (0, h0]");
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Absorbed: return "absorbed";
    case Outcome::AbsorbedOther: return "other";
    case Outcome::Censored: return "censored";
    case Outcome::Aborted: return "aborted";
  }
  return "unknown";
}

namespace {

void absorb(ExitRecord& rec, Vec2 at, const Crossing& hit) {
  rec.exit_point = at;
  rec.hit_kind = hit.kind;
  rec.label = hit.label;
  if (hit.kind == FeatureKind::AbsorbingSquareEdge) {
    rec.outcome = Outcome::Absorbed;
    rec.cell = hit.cell;
  } else {
    rec.outcome = Outcome::AbsorbedOther;
  }
}

// Reflected Brownian motion near the apex of a wedge of opening theta, inside a
// sector of radius R free of other features. z -> z^(pi/theta) maps it to a
// half-disk with a reflecting diameter; unfolding gives a full disk, whose exit
// point follows the Poisson kernel. (R^2 - r^2)/2 is the mean exit time.
bool wedge_jump(const WedgePoint& w, double r, Vec2& pos, double& tau, double u) {
  if (!(r < 0.45 * w.clearance) || r <= 0.0) return false;
  const Vec2 d = pos - w.point;
  const Vec2 perp{-w.dir0.y, w.dir0.x};
  double phi = std::atan2(dot(d, perp), dot(d, w.dir0));
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  if (!(phi > 0.0 && phi < w.opening)) return false;
  const double R = 0.9 * w.clearance;
  const double k = std::numbers::pi / w.opening;
  const std::complex<double> c = std::polar(std::pow(r / R, k), k * phi);
  const std::complex<double> zeta = std::polar(1.0, 2.0 * std::numbers::pi * u);
  std::complex<double> xi = (zeta + c) / (1.0 + std::conj(c) * zeta);
  const double psi = std::abs(std::arg(xi)) / k;
  pos = w.point + (w.dir0 * std::cos(psi) + perp * std::sin(psi)) * R;
  tau += 0.5 * (R * R - r * r);
  return true;
}

}  // namespace

ExitRecord simulate_path(const GeometryModel& model, const SimParams& params, std::uint64_t path_seed) {
  ExitRecord rec;
  rec.path_seed = path_seed;
  rec.depth = model.depth();
  std::mt19937_64 gen(path_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ShellMonitor monitor;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const bool monitoring = has_monitors(model);
  const double jump_min = params.jump_factor * std::sqrt(params.h0);
  Vec2 pos = params.start;
  double tau = 0.0;
  double cached_dabs = -1.0;  // absorbing distance at pos when already known

  while (true) {
    if (tau >= params.max_time) {
      rec.outcome = Outcome::Censored;
      break;
    }
    GeometryModel::Nearest near;
    if (params.jump_factor > 0.0 || params.wedge_jumps) near = model.nearest_feature(pos, true);
    if (params.jump_factor > 0.0) {
      // Exit point of the largest feature-free disk is uniform on its circle and
      // independent of the exit time.
      const double free_radius = near.distance * (1.0 - 1e-9);
      if (free_radius > jump_min) {
        const double theta = 6.283185307179586 * uniform(gen);
        const double t = free_radius * free_radius * sample_disk_exit_time(uniform(gen));
        pos = pos + Vec2{std::cos(theta), std::sin(theta)} * free_radius;
        tau = std::min(tau + t, params.max_time);
        ++rec.jumps;
        cached_dabs = -1.0;
        continue;
      }
    }
    WedgeHit wedge;
    if (params.wedge_jumps || params.c_edge > 0.0) {
      wedge = model.nearest_wedge(pos, params.wedge_jumps || params.edge_corners);
      if (params.wedge_jumps && wedge.wedge && wedge_jump(*wedge.wedge, wedge.distance, pos, tau, uniform(gen))) {
        tau = std::min(tau, params.max_time);
        ++rec.wedge_jumps;
        cached_dabs = -1.0;
        continue;
      }
      if (params.wedge_jumps) {
        if (const auto wall = model.wall_hit(pos, near)) {
          // A straight wall is a wedge of opening pi.
          const WedgePoint flat{wall->foot, {wall->normal.y, -wall->normal.x}, std::numbers::pi, wall->radius / 0.9};
          if (wedge_jump(flat, wall->distance, pos, tau, uniform(gen))) {
            tau = std::min(tau, params.max_time);
            ++rec.wedge_jumps;
            cached_dabs = -1.0;
            continue;
          }
        }
      }
      if (params.wedge_jumps && !params.edge_corners) wedge = model.nearest_wedge(pos, false);
    }
    const double dabs = cached_dabs >= 0.0 ? cached_dabs : model.absorbing_distance(pos);
    cached_dabs = -1.0;
    double h = std::min(params.h0, (params.c * dabs) * (params.c * dabs));
    if (params.c_edge > 0.0) {
      const double dedge = params.c_edge * wedge.distance;
      h = std::min(h, dedge * dedge);
    }
    h = std::max(h, params.h_min);
    h = std::min(h, params.max_time - tau);

    StepOutcome step;
    ShellMonitor trial;
    bool aborted = false;
    while (true) {
      const double sd = std::sqrt(h);
      const Vec2 delta{sd * normal(gen), sd * normal(gen)};
      trial = monitor;
      step = trace_step(model, pos, delta, params.max_bounces, monitoring ? &trial : nullptr);
      if (step.result != StepResult::TooManyBounces) break;
      h *= 0.25;
      if (h < params.h_min) {
        aborted = true;
        break;
      }
    }
    ++rec.steps;
    if (aborted) {
      rec.outcome = Outcome::Aborted;
      rec.exit_point = pos;
      break;
    }
    monitor = trial;
    tau += h;
    rec.reflections += step.reflections;
    if (step.result == StepResult::Absorbed) {
      absorb(rec, step.end, step.hit);
      break;
    }
    pos = step.end;
    if (params.bridge_correction && std::isfinite(dabs)) {
      // Probability that the Brownian bridge between the two positions touched
      // the nearest absorbing boundary, treated locally as a straight line.
      const auto foot = model.nearest_absorbing_point(pos);
      const double d1 = foot ? norm(foot->point - pos) : std::numeric_limits<double>::infinity();
      cached_dabs = d1;
      if (foot && !foot->at_arc_end) {
        if (uniform(gen) < std::exp(-2.0 * dabs * d1 / h)) {
          const auto hit = model.first_crossing(pos, pos + (foot->point - pos) * (1.0 + 1e-6));
          if (hit && hit->role == Role::Absorbing) {
            absorb(rec, hit->point, *hit);
            ++rec.bridge_hits;
            break;
          }
        }
      }
    }
  }
  if (rec.outcome == Outcome::Censored) rec.exit_point = pos;
  rec.tau = tau;
  rec.shell_crossings = monitor.completed;
  return rec;
}

unsigned default_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FRBM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return std::min<unsigned>(static_cast<unsigned>(v), hw);
  }
  return hw;
}

namespace {

template <typename Fn>
void parallel_for(std::uint64_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t k = w; k < n; k += threads) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

BatchResult summarize_records(std::vector<ExitRecord> records, int depth, double censor_bound) {
  BatchResult out;
  out.records = std::move(records);
  const std::uint64_t n_paths = out.records.size();
  out.measure = EmpiricalMeasure::zeros(depth);
  out.measure.paths = n_paths;
  std::vector<double> taus;
  taus.reserve(n_paths);
  double refl = 0.0, steps = 0.0;
  for (const auto& r : out.records) {
    refl += double(r.reflections);
    steps += double(r.steps);
    switch (r.outcome) {
      case Outcome::Absorbed:
        if (r.depth != depth || r.cell >= out.measure.cells()) {
          throw ValidationError("exit record at depth " + std::to_string(r.depth) + " does not match depth " +
                                std::to_string(depth));
        }
        ++out.measure.counts[r.cell];
        taus.push_back(r.tau);
        break;
      case Outcome::AbsorbedOther:
        ++out.measure.excluded;
        ++out.diagnostics.absorbed_other;
        taus.push_back(r.tau);
        break;
      case Outcome::Censored:
        ++out.measure.censored;
        break;
      case Outcome::Aborted:
        ++out.measure.excluded;
        ++out.diagnostics.aborted;
        break;
    }
  }
  out.tau = TauStats::from_samples(std::move(taus), out.measure.censored);
  if (n_paths > 0) {
    out.diagnostics.mean_reflections = refl / double(n_paths);
    out.diagnostics.mean_steps = steps / double(n_paths);
    out.diagnostics.censoring_flagged = double(out.measure.censored) / double(n_paths) > censor_bound;
  }
  return out;
}

BatchResult batch_simulate(const GeometryModel& model, const SimParams& params, std::uint64_t n_paths,
                           const BatchOptions& options) {
  validate(params);
  if (model.has_cantor() && model.classify(params.start).tag != PointClass::Tag::Interior) {
    throw ValidationError("sim.start must be an interior point of the domain");
  }
  std::vector<ExitRecord> records(n_paths);
  parallel_for(n_paths, options.threads, [&](std::uint64_t k) {
    records[k] = simulate_path(model, params, split_seed(params.seed, options.first_path + k));
  });
  return summarize_records(std::move(records), model.depth(), options.censor_bound);
}

// ---------------------------------------------------------------------------

RestrictedSimulator::RestrictedSimulator(const GeometryModel& model, const Word& q)
    : domain_(model.restricted_domain(q)),
      capped_(model.with_caps(domain_)),
      depth_(static_cast<int>(q.size())) {}

DLabel RestrictedSimulator::label_of(const ExitRecord& r) const {
  if (r.outcome == Outcome::AbsorbedOther && r.hit_kind == FeatureKind::CapArc) return DLabel::ExitedCap;
  if (r.outcome != Outcome::Absorbed) return DLabel::Other;
  const Word w = Word::from_index(r.cell, r.depth);
  if (!w.has_prefix(domain_.owner)) return DLabel::Other;
  return static_cast<DLabel>(w[depth_] - 1);
}

DOutcome RestrictedSimulator::simulate(const SimParams& params, Vec2 start, std::uint64_t path_seed) const {
  if (!domain_.contains(start) || capped_.classify(start).tag != PointClass::Tag::Interior) {
    throw ValidationError("restricted-domain start must be an interior point of D");
  }
  SimParams p = params;
  p.start = start;
  DOutcome out;
  out.record = simulate_path(capped_, p, path_seed);
  out.label = label_of(out.record);
  return out;
}

std::array<std::uint64_t, 6> RestrictedSimulator::batch(const SimParams& params, Vec2 start,
                                                        std::uint64_t n_paths, unsigned threads) const {
  validate(params);
  if (!domain_.contains(start) || capped_.classify(start).tag != PointClass::Tag::Interior) {
    throw ValidationError("restricted-domain start must be an interior point of D");
  }
  SimParams p = params;
  p.start = start;
  std::vector<std::uint8_t> labels(n_paths);
  parallel_for(n_paths, threads, [&](std::uint64_t k) {
    labels[k] = static_cast<std::uint8_t>(label_of(simulate_path(capped_, p, split_seed(params.seed, k))));
  });
  std::array<std::uint64_t, 6> counts{};
  for (auto l : labels) ++counts[l];
  return counts;
}

Vec2 RestrictedSimulator::shell_midpoint(int which) const {
  const Arc& a = domain_.shells[which];
  return which == 0 ? a.center - Vec2{0.0, a.radius} : a.center + Vec2{0.0, a.radius};
}

// ---------------------------------------------------------------------------

ShellStats shell_crossing_stats(const std::vector<ExitRecord>& records, int q_depth) {
  ShellStats s;
  for (const auto& r : records) {
    const std::size_t n = r.shell_crossings;
    if (s.paths_by_n.size() <= n) {
      s.paths_by_n.resize(n + 1, 0);
      s.digit_by_n.resize(n + 1, {0, 0, 0, 0});
    }
    ++s.paths_by_n[n];
    if (r.outcome == Outcome::Absorbed && r.depth > q_depth) {
      const Word w = Word::from_index(r.cell, r.depth);
      ++s.digit_by_n[n][w[q_depth] - 1];
    }
  }
  if (s.paths_by_n.empty()) {
    s.paths_by_n.push_back(0);
    s.digit_by_n.push_back({0, 0, 0, 0});
  }
  return s;
}

namespace {

std::string outcome_token(const ExitRecord& r) {
  if (r.outcome != Outcome::AbsorbedOther) return to_string(r.outcome);
  switch (r.hit_kind) {
    case FeatureKind::CapArc: return "cap";
    case FeatureKind::BarrierSegment: return "barrier";
    case FeatureKind::OuterCircle: return "circle";
    default: return "other";
  }
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<ExitRecord>& records) {
  os << "outcome,word,tau,reflections,shell_crossings,path_seed\n";
  char buf[64];
  for (const auto& r : records) {
    os << outcome_token(r) << ',';
    if (r.outcome == Outcome::Absorbed) os << Word::from_index(r.cell, r.depth).str();
    std::snprintf(buf, sizeof buf, "%.17g", r.tau);
    os << ',' << buf << ',' << r.reflections << ',' << r.shell_crossings << ',' << r.path_seed << '\n';
  }
}

std::vector<ExitRecord> read_records_csv(std::istream& is) {
  std::vector<ExitRecord> out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("outcome,word,tau", 0) != 0) {
    throw ValidationError("records CSV: missing header");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() == 5 && !line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 6) throw ValidationError("records CSV line " + std::to_string(lineno) + ": expected 6 columns");
    ExitRecord r;
    const std::string& o = cols[0];
    if (o == "absorbed") {
      r.outcome = Outcome::Absorbed;
      const Word w = Word::parse(cols[1]);
      r.cell = w.index();
      r.depth = static_cast<int>(w.size());
    } else if (o == "censored") {
      r.outcome = Outcome::Censored;
    } else if (o == "aborted") {
      r.outcome = Outcome::Aborted;
    } else {
      r.outcome = Outcome::AbsorbedOther;
      r.hit_kind = o == "cap" ? FeatureKind::CapArc
                   : o == "barrier" ? FeatureKind::BarrierSegment
                   : FeatureKind::OuterCircle;
    }
    try {
      r.tau = std::stod(cols[2]);
      r.reflections = std::stoull(cols[3]);
      r.shell_crossings = static_cast<std::uint32_t>(std::stoul(cols[4]));
      r.path_seed = std::stoull(cols[5]);
    } catch (const std::exception&) {
      throw ValidationError("records CSV line " + std::to_string(lineno) + ": malformed number");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace frbm
