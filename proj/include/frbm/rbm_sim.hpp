#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frbm/geometry.hpp"
#include "frbm/measure.hpp"

namespace frbm {

struct SimParams {
  double h0 = 1e-3;         // base time step
  double c = 0.5;           // step stddev <= c * distance to the absorbing set
  bool bridge_correction = true;  // test for absorbing contact between steps
  double c_edge = 0.3;      // step stddev <= c_edge * distance to the nearest slit tip; <= 0 disables
  bool edge_corners = true; // the c_edge cap also counts convex box corners
  bool wedge_jumps = true;  // exact jumps around slit tips, box corners and along straight walls
  int max_bounces = 16;     // reflections per step before the step is shrunk
  double max_time = 1e4;    // censoring time
  double h_min = 1e-12;     // step floor
  double jump_factor = 2.0; // disk jump when the free radius exceeds jump_factor*sqrt(h0); <= 0 disables
  std::uint64_t seed = 1;   // master seed
  Vec2 start{0.0, 0.0};
};

// Throws ValidationError on out-of-range fields.
void validate(const SimParams& params);

enum class Outcome { Absorbed, AbsorbedOther, Censored, Aborted };

const char* to_string(Outcome o);

struct ExitRecord {
  Outcome outcome = Outcome::Censored;
  std::uint64_t cell = 0;  // depth-N cell index when Absorbed
  int depth = 0;
  FeatureKind hit_kind = FeatureKind::AbsorbingSquareEdge;
  int label = 0;
  Vec2 exit_point;
  double tau = 0.0;
  std::uint64_t reflections = 0;
  std::uint32_t shell_crossings = 0;
  std::uint64_t steps = 0;
  std::uint64_t jumps = 0;
  std::uint64_t bridge_hits = 0;  // absorptions detected by the bridge test
  std::uint64_t wedge_jumps = 0;
  std::uint64_t path_seed = 0;
};

// Mirror of a displacement across the line with unit normal n.
inline Vec2 reflect(Vec2 v, Vec2 n) { return v - n * (2.0 * dot(v, n)); }

// Exit time of standard planar Brownian motion from the unit disk started at
// its center, by inversion of the tabulated Bessel-series distribution.
double sample_disk_exit_time(double u);

// One path from params.start with its own generator seeded by `path_seed`.
// Shell crossings are counted when the model carries monitor arcs.
ExitRecord simulate_path(const GeometryModel& model, const SimParams& params, std::uint64_t path_seed);

struct SimDiagnostics {
  std::uint64_t aborted = 0;
  std::uint64_t absorbed_other = 0;
  double mean_reflections = 0.0;
  double mean_steps = 0.0;
  bool censoring_flagged = false;
};

struct BatchResult {
  EmpiricalMeasure measure;  // depth N
  TauStats tau;
  SimDiagnostics diagnostics;
  std::vector<ExitRecord> records;
};

struct BatchOptions {
  unsigned threads = 0;              // 0: FRBM_THREADS or hardware concurrency
  double censor_bound = 0.005;       // flag when the censored share exceeds this
  std::uint64_t first_path = 0;      // path indices first_path .. first_path + n - 1
};

// Worker count from FRBM_THREADS (if set) capped by the hardware.
unsigned default_threads();

// Measure, absorption times and diagnostics of a record set at depth `depth`.
BatchResult summarize_records(std::vector<ExitRecord> records, int depth, double censor_bound = 0.005);

// Path k uses split_seed(params.seed, k). Output is independent of the worker count.
BatchResult batch_simulate(const GeometryModel& model, const SimParams& params, std::uint64_t n_paths,
                           const BatchOptions& options = {});

// ---------------------------------------------------------------------------
// Restricted domain D(Q): caps absorb, K squares report the child digit of Q.

enum class DLabel { Digit1 = 0, Digit2, Digit3, Digit4, ExitedCap, Other };
inline constexpr int kDLabels = 5;

struct DOutcome {
  DLabel label = DLabel::Other;
  ExitRecord record;
};

class RestrictedSimulator {
 public:
  RestrictedSimulator(const GeometryModel& model, const Word& q);

  const RestrictedDomain& domain() const { return domain_; }
  const GeometryModel& capped_model() const { return capped_; }

  // Throws ValidationError when `start` is not an interior point of D.
  DOutcome simulate(const SimParams& params, Vec2 start, std::uint64_t path_seed) const;

  // Counts per label (digits 1..4, cap) over n paths from `start`; label 5 collects
  // aborted/censored/other paths.
  std::array<std::uint64_t, 6> batch(const SimParams& params, Vec2 start, std::uint64_t n_paths,
                                     unsigned threads = 0) const;

  // Lowest point of the top shell arc and highest point of the bottom one.
  Vec2 shell_midpoint(int which) const;

 private:
  DLabel label_of(const ExitRecord& r) const;

  RestrictedDomain domain_;
  GeometryModel capped_;
  int depth_ = 0;
};

// ---------------------------------------------------------------------------

struct ShellStats {
  std::vector<std::uint64_t> paths_by_n;                 // n = completed shell->cap excursions
  std::vector<std::array<std::uint64_t, 4>> digit_by_n;  // child digit of Q among absorbed paths
};

// `q_depth` selects which digit of the absorbed word is tallied (the child of Q).
ShellStats shell_crossing_stats(const std::vector<ExitRecord>& records, int q_depth);

// CSV with columns outcome,word,tau,reflections,shell_crossings,path_seed.
void write_records_csv(std::ostream& os, const std::vector<ExitRecord>& records);
std::vector<ExitRecord> read_records_csv(std::istream& is);

}  // namespace frbm
