#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "frbm/errors.hpp"
#include "frbm/vec2.hpp"
#include "frbm/word.hpp"

namespace frbm {

// Construction parameters of the truncated domain
//   B(0, r0) \ (K_N  u  barriers around every square of generation in barrier_gens).
// The gap parameter b is scale-free: a square of side rho carries a barrier
// box of half-side rho*ell/2 whose top and bottom edges are open over a
// centered slit of width b*rho*ell.
struct GeometrySpec {
  double alpha = 0.4;
  double b = 0.005;
  double ell = 1.1;
  int n_gen = 2;
  double r0 = 4.0;
  int barrier_gen_min = 0;
  int barrier_gen_max = -1;  // -1 means n_gen
  bool relax_gap = false;    // allow b up to kRelaxedGapMax

  int barrier_max() const { return barrier_gen_max < 0 ? n_gen : barrier_gen_max; }
  bool has_barrier(int generation) const {
    return generation >= barrier_gen_min && generation <= barrier_max();
  }
};

inline constexpr double kStrictGapMax = 1e-2;
inline constexpr double kRelaxedGapMax = 0.4;

// Throws ValidationError naming the offending field.
void validate(const GeometrySpec& spec);

struct Square {
  Word word;
  Vec2 center;
  double side = 1.0;
};

// Center of Q_w by the corner recurrence; throws InvalidWord for |w| > N.
Vec2 square_center(const Word& word, double alpha);
Square make_square(const Word& word, const GeometrySpec& spec);

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Circular arc: points center + radius*(cos t, sin t) for t in [start, start+sweep].
struct Arc {
  Vec2 center;
  double radius = 1.0;
  double start = 0.0;
  double sweep = 6.283185307179586;

  bool contains_angle(double theta) const;
  bool contains_direction(Vec2 from_center) const;
  bool full() const { return sweep >= 6.283185307179586; }
};

enum class FeatureKind { AbsorbingSquareEdge, BarrierSegment, OuterCircle, CapArc, ShellArc };
enum class Role { Absorbing, Reflecting, Monitor };

const char* to_string(FeatureKind kind);

// Flat description of one boundary piece, used for export and for brute-force checks.
struct Feature {
  FeatureKind kind = FeatureKind::BarrierSegment;
  Role role = Role::Reflecting;
  bool is_arc = false;
  Segment segment;
  Arc arc;
  std::optional<Word> owner;
};

struct PointClass {
  enum class Tag { Interior, Absorbed, OnBarrier, OutsideBall };
  Tag tag = Tag::Interior;
  Word word;  // set for Absorbed (depth N) and OnBarrier (owner)
};

struct Crossing {
  FeatureKind kind = FeatureKind::BarrierSegment;
  Role role = Role::Reflecting;
  double t = 0.0;
  Vec2 point;
  Vec2 normal;            // unit normal of the feature at the hit point
  std::uint64_t cell = 0; // depth-N cell index for absorbing squares, owner index otherwise
  int owner_depth = 0;
  int label = 0;          // arc label for arc features
};

struct AbsorbingFoot {
  Vec2 point;
  bool at_arc_end = false;  // end point of an absorbing arc
};

// Non-smooth point of the reflecting boundary: a slit tip (opening 2 pi) or a
// convex box corner (opening 3 pi / 2). Walls leave the point along dir0 and
// along dir0 turned counterclockwise by the opening; the free wedge lies between.
struct WedgePoint {
  Vec2 point;
  Vec2 dir0;
  double opening = 0.0;
  double clearance = 0.0;  // distance to the nearest feature other than its own walls
};

struct WedgeHit {
  const WedgePoint* wedge = nullptr;
  double distance = std::numeric_limits<double>::infinity();
};

// Nearest boundary piece when it is a straight reflecting barrier segment.
// The half-disk of radius `radius` around `foot` on the side of `normal` meets
// no other feature.
struct WallHit {
  Vec2 foot;
  Vec2 normal;  // unit, pointing toward the query point
  double distance = 0.0;
  double radius = 0.0;
};

// A barrier box around one square, split into six axis-aligned segments.
struct BarrierBox {
  int depth = 0;
  std::uint64_t index = 0;
  Vec2 center;
  double half_side = 0.0;
  double gap_half = 0.0;

  std::array<Segment, 6> segments() const;
};

struct ArcFeature {
  Arc arc;
  FeatureKind kind = FeatureKind::OuterCircle;
  Role role = Role::Reflecting;
  int label = 0;
  std::optional<Word> owner;
};

struct SegmentFeature {
  Segment segment;
  FeatureKind kind = FeatureKind::BarrierSegment;
  Role role = Role::Reflecting;
  int label = 0;
};

// Auxiliary region around one cell Q: the inside of Q's barrier box plus the
// two half-disks closing its gaps. The outer half-circles are the caps, the
// inner half-circles (inside the box) are the shell arcs.
struct RestrictedDomain {
  Word owner;
  Vec2 center;
  double side = 1.0;
  double half_side = 0.0;
  double gap_half = 0.0;
  double cap_radius = 0.0;
  Arc caps[2];    // top, bottom
  Arc shells[2];  // top, bottom

  bool contains(Vec2 p) const;
};

inline constexpr int kCapLabelTop = 1;
inline constexpr int kCapLabelBottom = 2;

// Immutable after construction; safe for concurrent readers.
class GeometryModel {
 public:
  // Validates, builds and verifies barrier disjointness.
  static GeometryModel build(const GeometrySpec& spec);
  // Skips field validation but still runs the constructive disjointness check.
  static GeometryModel build_unvalidated(const GeometrySpec& spec);
  // Free-form geometry without the Cantor layout (calibration runs, unit tests).
  static GeometryModel custom(std::vector<SegmentFeature> segments, std::vector<ArcFeature> arcs);

  const GeometrySpec& spec() const { return spec_; }
  bool has_cantor() const { return has_cantor_; }
  int depth() const { return has_cantor_ ? spec_.n_gen : 0; }
  double side(int depth) const { return sides_.at(depth); }
  Vec2 center(int depth, std::uint64_t index) const { return centers_.at(depth).at(index); }
  std::size_t square_count(int depth) const { return centers_.at(depth).size(); }
  const std::vector<BarrierBox>& barrier_boxes() const { return boxes_; }
  const std::vector<ArcFeature>& arcs() const { return arcs_; }
  const std::vector<SegmentFeature>& extra_segments() const { return segments_; }
  Role barrier_role() const { return barrier_role_; }

  // Every feature, in a fixed order (squares level by level, then segments, then arcs).
  std::vector<Feature> features() const;

  PointClass classify(Vec2 p) const;

  // Earliest hit of segment pq with any non-monitor feature. Ties: smaller t,
  // then absorbing before barrier before arcs.
  std::optional<Crossing> first_crossing(Vec2 p, Vec2 q) const;
  // Every crossing of pq with monitor arcs, sorted by t.
  std::vector<Crossing> monitor_crossings(Vec2 p, Vec2 q) const;

  // Distance from p to the nearest absorbing feature (K squares, absorbing
  // segments/arcs, and barriers when they are absorbing). +inf if none.
  double absorbing_distance(Vec2 p) const;
  // Closest point of the absorbing set to p; nullopt if there is none.
  std::optional<AbsorbingFoot> nearest_absorbing_point(Vec2 p) const;
  // Distance to the nearest reflecting or absorbing feature; monitor arcs
  // count only when include_monitors is set.
  double feature_distance(Vec2 p, bool include_monitors = false) const;

  // Nearest slit tip, or nearest slit tip or convex box corner when
  // include_corners is set. Empty hit without barriers.
  WedgeHit nearest_wedge(Vec2 p, bool include_corners) const;
  // Eight per barrier box: four slit tips, then four corners. Empty when the
  // barriers absorb.
  const std::vector<WedgePoint>& wedges() const { return wedges_; }

  struct Nearest {
    double distance = std::numeric_limits<double>::infinity();
    int box = -1;  // set when the nearest feature is a barrier segment
    int segment = -1;
  };
  // Nearest feature ignoring segment `skip_segment` of box `skip_box`.
  Nearest nearest_feature(Vec2 p, bool include_monitors, int skip_box = -1, int skip_segment = -1) const;
  // Free half-disk at p when `near` (from nearest_feature(p, true)) is a
  // reflecting barrier segment, its foot point is not an end point and p lies
  // within half the distance from the foot to the nearer end.
  std::optional<WallHit> wall_hit(Vec2 p, const Nearest& near) const;

  RestrictedDomain restricted_domain(const Word& q) const;
  // Copy with the caps of D(q) added as absorbing arcs.
  GeometryModel with_caps(const RestrictedDomain& d) const;
  // Copy with shell and cap arcs of D(q) added as monitors.
  GeometryModel with_shell_monitor(const RestrictedDomain& d) const;
  // Copy where every barrier and the outer circle absorb.
  GeometryModel with_absorbing_barriers() const;

 private:
  GeometryModel() = default;
  void construct(const GeometrySpec& spec);
  void check_disjointness() const;
  void build_wedges();

  template <typename Visit>
  void visit_boxes(double x0, double y0, double x1, double y1, Visit&& visit) const;

  GeometrySpec spec_;
  bool has_cantor_ = false;
  Role barrier_role_ = Role::Reflecting;
  std::vector<double> sides_;
  std::vector<double> box_half_;
  std::vector<double> gap_half_;
  std::vector<std::vector<Vec2>> centers_;
  std::vector<std::vector<int>> box_id_;  // barrier box index per square, -1 if none
  std::vector<BarrierBox> boxes_;
  std::vector<ArcFeature> arcs_;
  std::vector<SegmentFeature> segments_;
  std::vector<WedgePoint> wedges_;
};

// Constructive disjointness oracle over explicit boxes: returns the first
// offending pair (by index) whose closed boundaries touch or intersect.
std::optional<std::pair<std::size_t, std::size_t>> find_box_conflict(
    const std::vector<BarrierBox>& boxes);

// Exhaustive intersection of segment pq with one feature, independent of the
// spatial index (test oracle and export helper).
std::optional<double> intersect_feature(const Feature& f, Vec2 p, Vec2 q);

double distance_point_segment(Vec2 p, const Segment& s);
double distance_segments(const Segment& a, const Segment& b);

struct ConnectivityReport {
  bool connected = false;
  int reachable_absorbers = 0;
  int total_absorbers = 0;
  int reachable_gap_count = 0;      // barrier boxes with at least one traversed gap
  int reachable_gap_openings = 0;   // individual top/bottom openings traversed
  double pitch = 0.0;
};

// Pitch needed to resolve the narrowest opening and clearance of the model.
double required_connectivity_pitch(const GeometrySpec& spec);
// Flood fill of the pixelized free space from the origin. Throws
// ValidationError when the pitch does not resolve the gaps.
ConnectivityReport check_connectivity(const GeometryModel& model, double pitch);

// SVG drawing and JSON feature list; output is a pure function of the model.
std::string geometry_svg(const GeometryModel& model);
std::string geometry_json(const GeometryModel& model);
void export_geometry(const GeometryModel& model, const std::string& path_stem);

}  // namespace frbm
