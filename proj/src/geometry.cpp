#include "frbm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace frbm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Strict crossing of pq with the vertical line x = c restricted to y in [y0, y1].
// A start exactly on the line never counts; an end exactly on it does.
inline bool cross_vertical(Vec2 p, Vec2 q, double c, double y0, double y1, double& t, Vec2& hit) {
  const double d0 = p.x - c;
  const double d1 = q.x - c;
  if (d0 == 0.0 || d0 * d1 > 0.0) return false;
  t = d0 / (d0 - d1);
  const double y = p.y + t * (q.y - p.y);
  if (y < y0 || y > y1) return false;
  hit = {c, y};
  return true;
}

inline bool cross_horizontal(Vec2 p, Vec2 q, double c, double x0, double x1, double& t, Vec2& hit) {
  const double d0 = p.y - c;
  const double d1 = q.y - c;
  if (d0 == 0.0 || d0 * d1 > 0.0) return false;
  t = d0 / (d0 - d1);
  const double x = p.x + t * (q.x - p.x);
  if (x < x0 || x > x1) return false;
  hit = {x, c};
  return true;
}

// General segment/segment crossing with the same start convention.
bool cross_segment(Vec2 p, Vec2 q, const Segment& s, double& t, Vec2& hit, Vec2& normal) {
  const Vec2 d = q - p;
  const Vec2 e = s.b - s.a;
  const double den = cross(d, e);
  if (den == 0.0) return false;
  const Vec2 w = s.a - p;
  const double tt = cross(w, e) / den;
  const double uu = cross(w, d) / den;
  if (tt <= 0.0 || tt > 1.0 || uu < 0.0 || uu > 1.0) return false;
  t = tt;
  hit = p + d * tt;
  const double len = norm(e);
  normal = {-e.y / len, e.x / len};
  return true;
}

// Roots of |p + t(q-p) - c| = r inside (0, 1], ascending, restricted to the arc.
int cross_arc(Vec2 p, Vec2 q, const Arc& arc, std::array<double, 2>& ts) {
  const Vec2 d = q - p;
  const Vec2 f = p - arc.center;
  const double a = dot(d, d);
  if (a == 0.0) return 0;
  const double bb = dot(d, f);
  const double cc = dot(f, f) - arc.radius * arc.radius;
  const double disc = bb * bb - a * cc;
  if (disc <= 0.0) return 0;
  const double sq = std::sqrt(disc);
  // Stable root pair.
  const double qq = -(bb + std::copysign(sq, bb));
  double t1 = qq / a;
  double t2 = (qq != 0.0) ? cc / qq : t1;
  if (t1 > t2) std::swap(t1, t2);
  int n = 0;
  for (double t : {t1, t2}) {
    if (t <= 0.0 || t > 1.0) continue;
    const Vec2 hp = p + d * t;
    if (!arc.contains_direction(hp - arc.center)) continue;
    ts[n++] = t;
  }
  return n;
}

inline double box_distance(Vec2 p, Vec2 c, double h) {
  const double dx = std::max(std::abs(p.x - c.x) - h, 0.0);
  const double dy = std::max(std::abs(p.y - c.y) - h, 0.0);
  return std::hypot(dx, dy);
}

double distance_point_arc(Vec2 p, const Arc& arc) {
  const Vec2 v = p - arc.center;
  if (arc.contains_direction(v)) return std::abs(norm(v) - arc.radius);
  const Vec2 e0 = arc.center + Vec2{std::cos(arc.start), std::sin(arc.start)} * arc.radius;
  const double end = arc.start + arc.sweep;
  const Vec2 e1 = arc.center + Vec2{std::cos(end), std::sin(end)} * arc.radius;
  return std::min(norm(p - e0), norm(p - e1));
}

Vec2 closest_point_box(Vec2 p, Vec2 c, double half) {
  return {std::clamp(p.x, c.x - half, c.x + half), std::clamp(p.y, c.y - half, c.y + half)};
}

Vec2 closest_point_segment(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return s.a;
  return s.a + d * std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
}

Vec2 closest_point_arc(Vec2 p, const Arc& arc) {
  const Vec2 v = p - arc.center;
  const double r = norm(v);
  if (r > 0.0 && arc.contains_direction(v)) return arc.center + v * (arc.radius / r);
  const Vec2 e0 = arc.center + Vec2{std::cos(arc.start), std::sin(arc.start)} * arc.radius;
  const double end = arc.start + arc.sweep;
  const Vec2 e1 = arc.center + Vec2{std::cos(end), std::sin(end)} * arc.radius;
  return norm(p - e0) <= norm(p - e1) ? e0 : e1;
}

// Distance from p to the six segments of a barrier box.
double distance_to_box_segments(Vec2 p, const BarrierBox& box) {
  double best = kInf;
  for (const auto& s : box.segments()) best = std::min(best, distance_point_segment(p, s));
  return best;
}

}  // namespace

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::AbsorbingSquareEdge: return "absorbing_square_edge";
    case FeatureKind::BarrierSegment: return "barrier_segment";
    case FeatureKind::OuterCircle: return "outer_circle";
    case FeatureKind::CapArc: return "cap_arc";
    case FeatureKind::ShellArc: return "shell_arc";
  }
  return "unknown";
}

void validate(const GeometrySpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 0.5)) {
    throw ValidationError("geometry.alpha must lie in (0, 1/2), got " + fmt_double(spec.alpha));
  }
  if (!(spec.ell > 1.0)) {
    throw ValidationError("geometry.ell must exceed 1, got " + fmt_double(spec.ell));
  }
  if (!(spec.ell < 1.0 / (2.0 * spec.alpha))) {
    throw GeometryError("geometry.ell: barrier disjointness requires ell < 1/(2 alpha) = " +
                        fmt_double(1.0 / (2.0 * spec.alpha)) + ", got ell = " +
                        fmt_double(spec.ell));
  }
  const double bmax = spec.relax_gap ? kRelaxedGapMax : kStrictGapMax;
  const bool b_ok = spec.relax_gap ? (spec.b > 0.0 && spec.b <= bmax) : (spec.b > 0.0 && spec.b < bmax);
  if (!b_ok) {
    throw ValidationError("geometry.b must lie in (0, " + fmt_double(bmax) + (spec.relax_gap ? "]" : ")") +
                          ", got " + fmt_double(spec.b) +
                          (spec.relax_gap ? "" : " (use --relax-gap for desk-scale gaps)"));
  }
  if (spec.n_gen < 1 || spec.n_gen > 10) {
    throw ValidationError("geometry.n_gen must lie in [1, 10], got " + std::to_string(spec.n_gen));
  }
  if (!(spec.r0 > spec.ell + 1.0)) {
    throw ValidationError("geometry.r0 must exceed ell + 1 = " + fmt_double(spec.ell + 1.0) +
                          ", got " + fmt_double(spec.r0));
  }
  if (spec.barrier_gen_min < 0 || spec.barrier_gen_min > spec.barrier_max() ||
      spec.barrier_max() > spec.n_gen) {
    throw ValidationError("geometry.barrier_gens must be a sub-range of [0, n_gen]");
  }
}

Vec2 square_center(const Word& word, double alpha) {
  Vec2 c{0.0, 0.0};
  double rho = 1.0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const double off = rho * (1.0 - alpha) / 2.0;
    c.x += digit_sign_x(word[i]) * off;
    c.y += digit_sign_y(word[i]) * off;
    rho *= alpha;
  }
  return c;
}

Square make_square(const Word& word, const GeometrySpec& spec) {
  if (static_cast<int>(word.size()) > spec.n_gen) {
    throw InvalidWord("word '" + word.str() + "' deeper than generation " + std::to_string(spec.n_gen));
  }
  return Square{word, square_center(word, spec.alpha), std::pow(spec.alpha, double(word.size()))};
}

bool Arc::contains_angle(double theta) const {
  if (full()) return true;
  double d = std::fmod(theta - start, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d <= sweep;
}

bool Arc::contains_direction(Vec2 v) const {
  if (full()) return true;
  return contains_angle(std::atan2(v.y, v.x));
}

std::array<Segment, 6> BarrierBox::segments() const {
  const double x0 = center.x - half_side, x1 = center.x + half_side;
  const double y0 = center.y - half_side, y1 = center.y + half_side;
  const double g0 = center.x - gap_half, g1 = center.x + gap_half;
  return {{
      {{x0, y0}, {x0, y1}},  // left
      {{x1, y0}, {x1, y1}},  // right
      {{x0, y1}, {g0, y1}},  // top, left of gap
      {{g1, y1}, {x1, y1}},  // top, right of gap
      {{x0, y0}, {g0, y0}},  // bottom, left of gap
      {{g1, y0}, {x1, y0}},  // bottom, right of gap
  }};
}

bool RestrictedDomain::contains(Vec2 p) const {
  const Vec2 r = p - center;
  if (std::abs(r.x) < half_side && std::abs(r.y) < half_side) return true;
  if (r.y >= half_side && norm(p - caps[0].center) < cap_radius) return true;
  if (r.y <= -half_side && norm(p - caps[1].center) < cap_radius) return true;
  return false;
}

// ---------------------------------------------------------------------------

GeometryModel GeometryModel::build(const GeometrySpec& spec) {
  validate(spec);
  return build_unvalidated(spec);
}

GeometryModel GeometryModel::build_unvalidated(const GeometrySpec& spec) {
  GeometryModel m;
  m.construct(spec);
  m.check_disjointness();
  return m;
}

GeometryModel GeometryModel::custom(std::vector<SegmentFeature> segments, std::vector<ArcFeature> arcs) {
  GeometryModel m;
  m.spec_.n_gen = 0;
  m.has_cantor_ = false;
  m.segments_ = std::move(segments);
  m.arcs_ = std::move(arcs);
  return m;
}

void GeometryModel::construct(const GeometrySpec& spec) {
  spec_ = spec;
  has_cantor_ = true;
  const int n = spec.n_gen;
  sides_.resize(n + 1);
  box_half_.resize(n + 1);
  gap_half_.resize(n + 1);
  centers_.resize(n + 1);
  box_id_.resize(n + 1);
  for (int d = 0; d <= n; ++d) {
    sides_[d] = std::pow(spec.alpha, d);
    box_half_[d] = sides_[d] * spec.ell / 2.0;
    gap_half_[d] = spec.b * sides_[d] * spec.ell / 2.0;
  }
  centers_[0] = {Vec2{0.0, 0.0}};
  for (int d = 1; d <= n; ++d) {
    const double off = sides_[d - 1] * (1.0 - spec.alpha) / 2.0;
    centers_[d].resize(centers_[d - 1].size() * 4);
    for (std::size_t i = 0; i < centers_[d - 1].size(); ++i) {
      for (std::uint8_t digit = 1; digit <= 4; ++digit) {
        centers_[d][i * 4 + (digit - 1)] =
            centers_[d - 1][i] + Vec2{digit_sign_x(digit) * off, digit_sign_y(digit) * off};
      }
    }
  }
  for (int d = 0; d <= n; ++d) {
    box_id_[d].assign(centers_[d].size(), -1);
    if (!spec.has_barrier(d)) continue;
    for (std::size_t i = 0; i < centers_[d].size(); ++i) {
      box_id_[d][i] = static_cast<int>(boxes_.size());
      boxes_.push_back(BarrierBox{d, i, centers_[d][i], box_half_[d], gap_half_[d]});
    }
  }
  arcs_.push_back(ArcFeature{Arc{{0.0, 0.0}, spec.r0, 0.0, kTwoPi}, FeatureKind::OuterCircle,
                             Role::Reflecting, 0, std::nullopt});
  build_wedges();
}

template <typename Visit>
void GeometryModel::visit_boxes(double x0, double y0, double x1, double y1, Visit&& visit) const {
  // Subtree of a square lies inside its dilated box (child boxes nest when ell >= 1).
  const double scale = std::max(spec_.ell, 1.0) / 2.0;
  struct Node {
    int depth;
    std::uint64_t index;
  };
  std::array<Node, 64> stack;
  int top = 0;
  stack[top++] = {0, 0};
  while (top > 0) {
    const Node nd = stack[--top];
    const Vec2 c = centers_[nd.depth][nd.index];
    const double h = sides_[nd.depth] * scale;
    if (c.x + h < x0 || c.x - h > x1 || c.y + h < y0 || c.y - h > y1) continue;
    visit(nd.depth, nd.index);
    if (nd.depth < spec_.n_gen) {
      for (std::uint64_t k = 0; k < 4; ++k) stack[top++] = {nd.depth + 1, nd.index * 4 + k};
    }
  }
}

void GeometryModel::check_disjointness() const {
  // Boxes overlap-test against every box/absorbing square whose region meets theirs.
  const int n = spec_.n_gen;
  auto word_of = [](int depth, std::uint64_t idx) {
    const auto s = Word::from_index(idx, depth).str();
    return s.empty() ? std::string("root") : s;
  };
  for (const auto& box : boxes_) {
    const double h = box.half_side;
    const auto mine = box.segments();
    visit_boxes(box.center.x - h, box.center.y - h, box.center.x + h, box.center.y + h,
                [&](int d, std::uint64_t i) {
                  const int other = box_id_[d][i];
                  if (other >= 0 && (d != box.depth || i != box.index) &&
                      (d > box.depth || (d == box.depth && i > box.index))) {
                    const auto theirs = boxes_[other].segments();
                    for (const auto& a : mine) {
                      for (const auto& b : theirs) {
                        if (distance_segments(a, b) <= 0.0) {
                          throw GeometryError("barrier disjointness violated: barriers of words " +
                                              word_of(box.depth, box.index) + " and " + word_of(d, i) +
                                              " intersect (ell = " + fmt_double(spec_.ell) +
                                              ", alpha = " + fmt_double(spec_.alpha) + ")");
                        }
                      }
                    }
                  }
                  if (d == n) {
                    const Vec2 c = centers_[d][i];
                    const double s = sides_[d] / 2.0;
                    for (const auto& a : mine) {
                      // Segment meets the closed square iff its distance to the square is zero.
                      const Segment edges[4] = {{{c.x - s, c.y - s}, {c.x + s, c.y - s}},
                                                {{c.x + s, c.y - s}, {c.x + s, c.y + s}},
                                                {{c.x + s, c.y + s}, {c.x - s, c.y + s}},
                                                {{c.x - s, c.y + s}, {c.x - s, c.y - s}}};
                      const bool inside = std::abs(a.a.x - c.x) <= s && std::abs(a.a.y - c.y) <= s;
                      bool touch = inside;
                      for (const auto& e : edges) touch = touch || distance_segments(a, e) <= 0.0;
                      if (touch) {
                        throw GeometryError("barrier of word " + word_of(box.depth, box.index) +
                                            " touches absorbing square " + word_of(d, i));
                      }
                    }
                  }
                });
  }
}

std::vector<Feature> GeometryModel::features() const {
  std::vector<Feature> out;
  if (has_cantor_) {
    const int n = spec_.n_gen;
    const double s = sides_[n] / 2.0;
    for (std::size_t i = 0; i < centers_[n].size(); ++i) {
      const Vec2 c = centers_[n][i];
      const Word w = Word::from_index(i, n);
      const Vec2 v[4] = {{c.x - s, c.y - s}, {c.x + s, c.y - s}, {c.x + s, c.y + s}, {c.x - s, c.y + s}};
      for (int k = 0; k < 4; ++k) {
        Feature f;
        f.kind = FeatureKind::AbsorbingSquareEdge;
        f.role = Role::Absorbing;
        f.segment = {v[k], v[(k + 1) % 4]};
        f.owner = w;
        out.push_back(f);
      }
    }
    for (const auto& box : boxes_) {
      const Word w = Word::from_index(box.index, box.depth);
      for (const auto& seg : box.segments()) {
        Feature f;
        f.kind = FeatureKind::BarrierSegment;
        f.role = barrier_role_;
        f.segment = seg;
        f.owner = w;
        out.push_back(f);
      }
    }
  }
  for (const auto& s : segments_) {
    Feature f;
    f.kind = s.kind;
    f.role = s.role;
    f.segment = s.segment;
    out.push_back(f);
  }
  for (const auto& a : arcs_) {
    Feature f;
    f.kind = a.kind;
    f.role = a.role;
    f.is_arc = true;
    f.arc = a.arc;
    f.owner = a.owner;
    out.push_back(f);
  }
  return out;
}

PointClass GeometryModel::classify(Vec2 p) const {
  if (has_cantor_) {
    const int n = spec_.n_gen;
    // Descend through closed squares; depth-N squares are pairwise disjoint.
    std::uint64_t idx = 0;
    bool inside = std::abs(p.x) <= 0.5 && std::abs(p.y) <= 0.5;
    for (int d = 1; d <= n && inside; ++d) {
      inside = false;
      for (std::uint64_t k = 0; k < 4; ++k) {
        const Vec2 c = centers_[d][idx * 4 + k];
        const double s = sides_[d] / 2.0;
        if (std::abs(p.x - c.x) <= s && std::abs(p.y - c.y) <= s) {
          idx = idx * 4 + k;
          inside = true;
          break;
        }
      }
    }
    if (inside) return {PointClass::Tag::Absorbed, Word::from_index(idx, n)};

    int owner = -1;
    visit_boxes(p.x, p.y, p.x, p.y, [&](int d, std::uint64_t i) {
      const int id = box_id_[d][i];
      if (id < 0 || owner >= 0) return;
      const double tol = 1e-12 * sides_[d] * spec_.ell;
      if (distance_to_box_segments(p, boxes_[id]) <= tol) owner = id;
    });
    if (owner >= 0) {
      return {PointClass::Tag::OnBarrier, Word::from_index(boxes_[owner].index, boxes_[owner].depth)};
    }
    if (norm(p) > spec_.r0) return {PointClass::Tag::OutsideBall, {}};
  }
  for (const auto& s : segments_) {
    if (distance_point_segment(p, s.segment) <= 1e-12) return {PointClass::Tag::OnBarrier, {}};
  }
  return {PointClass::Tag::Interior, {}};
}

std::optional<Crossing> GeometryModel::first_crossing(Vec2 p, Vec2 q) const {
  if (p == q) return std::nullopt;
  Crossing best;
  best.t = kInf;
  int best_prio = 99;
  auto consider = [&](double t, int prio, const Crossing& c) {
    if (t < best.t || (t == best.t && prio < best_prio)) {
      best = c;
      best.t = t;
      best_prio = prio;
    }
  };

  if (has_cantor_) {
    const int n = spec_.n_gen;
    const int barrier_prio = barrier_role_ == Role::Absorbing ? 0 : 1;
    const double bx0 = std::min(p.x, q.x), bx1 = std::max(p.x, q.x);
    const double by0 = std::min(p.y, q.y), by1 = std::max(p.y, q.y);
    const Vec2 d = q - p;
    visit_boxes(bx0, by0, bx1, by1, [&](int depth, std::uint64_t idx) {
      const Vec2 c = centers_[depth][idx];
      if (depth == n) {
        // Slab clip against the closed absorbing square.
        const double s = sides_[n] / 2.0;
        double t0 = 0.0, t1 = 1.0;
        int axis = -1;
        bool ok = true;
        for (int ax = 0; ax < 2 && ok; ++ax) {
          const double pv = ax == 0 ? p.x : p.y;
          const double dv = ax == 0 ? d.x : d.y;
          const double lo = (ax == 0 ? c.x : c.y) - s;
          const double hi = (ax == 0 ? c.x : c.y) + s;
          if (dv == 0.0) {
            if (pv < lo || pv > hi) ok = false;
            continue;
          }
          double ta = (lo - pv) / dv, tb = (hi - pv) / dv;
          if (ta > tb) std::swap(ta, tb);
          if (ta > t0) {
            t0 = ta;
            axis = ax;
          }
          t1 = std::min(t1, tb);
          if (t0 > t1) ok = false;
        }
        if (ok && axis >= 0 && t0 > 0.0) {
          Crossing cr;
          cr.kind = FeatureKind::AbsorbingSquareEdge;
          cr.role = Role::Absorbing;
          cr.point = p + d * t0;
          cr.normal = axis == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
          cr.cell = idx;
          cr.owner_depth = n;
          consider(t0, 0, cr);
        }
      }
      const int id = box_id_[depth][idx];
      if (id < 0) return;
      const double h = box_half_[depth];
      const double g = gap_half_[depth];
      double t;
      Vec2 hit;
      Crossing cr;
      cr.kind = FeatureKind::BarrierSegment;
      cr.role = barrier_role_;
      cr.cell = idx;
      cr.owner_depth = depth;
      auto vert = [&](double x) {
        if (cross_vertical(p, q, x, c.y - h, c.y + h, t, hit)) {
          cr.point = hit;
          cr.normal = {1.0, 0.0};
          consider(t, barrier_prio, cr);
        }
      };
      auto horiz = [&](double y) {
        if (cross_horizontal(p, q, y, c.x - h, c.x + h, t, hit) &&
            (hit.x <= c.x - g || hit.x >= c.x + g)) {
          cr.point = hit;
          cr.normal = {0.0, 1.0};
          consider(t, barrier_prio, cr);
        }
      };
      vert(c.x - h);
      vert(c.x + h);
      horiz(c.y + h);
      horiz(c.y - h);
    });
  }

  for (const auto& s : segments_) {
    if (s.role == Role::Monitor) continue;
    double t;
    Vec2 hit, normal;
    if (cross_segment(p, q, s.segment, t, hit, normal)) {
      Crossing cr;
      cr.kind = s.kind;
      cr.role = s.role;
      cr.point = hit;
      cr.normal = normal;
      cr.label = s.label;
      consider(t, s.role == Role::Absorbing ? 0 : 1, cr);
    }
  }
  for (const auto& a : arcs_) {
    if (a.role == Role::Monitor) continue;
    std::array<double, 2> ts;
    const int k = cross_arc(p, q, a.arc, ts);
    if (k == 0) continue;
    Crossing cr;
    cr.kind = a.kind;
    cr.role = a.role;
    cr.point = p + (q - p) * ts[0];
    cr.normal = (cr.point - a.arc.center) * (1.0 / a.arc.radius);
    cr.label = a.label;
    consider(ts[0], a.role == Role::Absorbing ? 0 : 2, cr);
  }
  if (best.t == kInf) return std::nullopt;
  return best;
}

std::vector<Crossing> GeometryModel::monitor_crossings(Vec2 p, Vec2 q) const {
  std::vector<Crossing> out;
  for (const auto& a : arcs_) {
    if (a.role != Role::Monitor) continue;
    std::array<double, 2> ts;
    const int k = cross_arc(p, q, a.arc, ts);
    for (int i = 0; i < k; ++i) {
      Crossing cr;
      cr.kind = a.kind;
      cr.role = a.role;
      cr.t = ts[i];
      cr.point = p + (q - p) * ts[i];
      cr.normal = (cr.point - a.arc.center) * (1.0 / a.arc.radius);
      cr.label = a.label;
      out.push_back(cr);
    }
  }
  std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
  return out;
}

std::optional<AbsorbingFoot> GeometryModel::nearest_absorbing_point(Vec2 p) const {
  double best = kInf;
  AbsorbingFoot foot;
  auto consider = [&](Vec2 q, bool arc_end = false) {
    const double d = norm(p - q);
    if (d < best) {
      best = d;
      foot = {q, arc_end};
    }
  };
  if (has_cantor_) {
    const int n = spec_.n_gen;
    // Branch and bound: the subtree of Q_w lies inside the closed square Q_w.
    struct Node {
      int depth;
      std::uint64_t index;
      double lb;
    };
    std::array<Node, 64> stack;
    int top = 0;
    stack[top++] = {0, 0, box_distance(p, centers_[0][0], 0.5)};
    while (top > 0) {
      const Node nd = stack[--top];
      if (nd.lb >= best) continue;
      if (nd.depth == n) {
        consider(closest_point_box(p, centers_[n][nd.index], sides_[n] / 2.0));
        continue;
      }
      std::array<Node, 4> kids;
      for (std::uint64_t k = 0; k < 4; ++k) {
        const std::uint64_t ci = nd.index * 4 + k;
        kids[k] = {nd.depth + 1, ci, box_distance(p, centers_[nd.depth + 1][ci], sides_[nd.depth + 1] / 2.0)};
      }
      // Push farthest first so the nearest child is explored first.
      std::sort(kids.begin(), kids.end(), [](const Node& a, const Node& b) { return a.lb > b.lb; });
      for (const auto& k : kids) {
        if (k.lb < best) stack[top++] = k;
      }
    }
    if (barrier_role_ == Role::Absorbing) {
      const double scale = std::max(spec_.ell, 1.0) / 2.0;
      struct BNode {
        int depth;
        std::uint64_t index;
      };
      std::array<BNode, 64> bstack;
      int btop = 0;
      bstack[btop++] = {0, 0};
      while (btop > 0) {
        const BNode nd = bstack[--btop];
        const Vec2 c = centers_[nd.depth][nd.index];
        if (box_distance(p, c, sides_[nd.depth] * scale) >= best) continue;
        const int id = box_id_[nd.depth][nd.index];
        if (id >= 0) {
          for (const auto& seg : boxes_[id].segments()) consider(closest_point_segment(p, seg));
        }
        if (nd.depth < n) {
          for (std::uint64_t k = 0; k < 4; ++k) bstack[btop++] = {nd.depth + 1, nd.index * 4 + k};
        }
      }
    }
  }
  for (const auto& s : segments_) {
    if (s.role == Role::Absorbing) consider(closest_point_segment(p, s.segment));
  }
  for (const auto& a : arcs_) {
    if (a.role == Role::Absorbing) {
      const Vec2 v = p - a.arc.center;
      consider(closest_point_arc(p, a.arc), !(norm(v) > 0.0 && a.arc.contains_direction(v)));
    }
  }
  if (best == kInf) return std::nullopt;
  return foot;
}

double GeometryModel::absorbing_distance(Vec2 p) const {
  const auto f = nearest_absorbing_point(p);
  return f ? norm(p - f->point) : kInf;
}

GeometryModel::Nearest GeometryModel::nearest_feature(Vec2 p, bool include_monitors, int skip_box,
                                                      int skip_segment) const {
  Nearest best;
  if (has_cantor_) {
    const int n = spec_.n_gen;
    const double scale = std::max(spec_.ell, 1.0) / 2.0;
    struct BNode {
      int depth;
      std::uint64_t index;
    };
    std::array<BNode, 64> stack;
    int top = 0;
    stack[top++] = {0, 0};
    while (top > 0) {
      const BNode nd = stack[--top];
      const Vec2 c = centers_[nd.depth][nd.index];
      if (box_distance(p, c, sides_[nd.depth] * scale) >= best.distance) continue;
      const int id = box_id_[nd.depth][nd.index];
      if (id >= 0) {
        const auto segs = boxes_[id].segments();
        for (int k = 0; k < 6; ++k) {
          if (id == skip_box && k == skip_segment) continue;
          const double d = distance_point_segment(p, segs[std::size_t(k)]);
          if (d < best.distance) best = {d, id, k};
        }
      }
      if (nd.depth == n) {
        const double d = box_distance(p, c, sides_[n] / 2.0);
        if (d < best.distance) best = {d};
      }
      if (nd.depth < n) {
        for (std::uint64_t k = 0; k < 4; ++k) stack[top++] = {nd.depth + 1, nd.index * 4 + k};
      }
    }
  }
  for (const auto& s : segments_) {
    const double d = distance_point_segment(p, s.segment);
    if (d < best.distance) best = {d};
  }
  for (const auto& a : arcs_) {
    if (!include_monitors && a.role == Role::Monitor) continue;
    const double d = distance_point_arc(p, a.arc);
    if (d < best.distance) best = {d};
  }
  return best;
}

double GeometryModel::feature_distance(Vec2 p, bool include_monitors) const {
  return nearest_feature(p, include_monitors, -1, -1).distance;
}

std::optional<WallHit> GeometryModel::wall_hit(Vec2 p, const Nearest& near) const {
  if (!has_cantor_ || barrier_role_ != Role::Reflecting) return std::nullopt;
  if (near.box < 0 || !(near.distance > 0.0)) return std::nullopt;
  const Segment s = boxes_[std::size_t(near.box)].segments()[std::size_t(near.segment)];
  const Vec2 foot = closest_point_segment(p, s);
  const double ends = std::min(norm(foot - s.a), norm(foot - s.b));
  if (!(ends > 0.0)) return std::nullopt;
  if (near.distance >= 0.5 * ends) return std::nullopt;
  const double clear = nearest_feature(foot, true, near.box, near.segment).distance;
  WallHit hit;
  hit.foot = foot;
  hit.distance = near.distance;
  hit.normal = (p - foot) * (1.0 / near.distance);
  hit.radius = std::min(ends, clear) * (1.0 - 1e-9);
  return hit;
}

WedgeHit GeometryModel::nearest_wedge(Vec2 p, bool include_corners) const {
  WedgeHit hit;
  if (!has_cantor_ || wedges_.empty()) return hit;
  const int n = spec_.n_gen;
  const double scale = std::max(spec_.ell, 1.0) / 2.0;
  const std::size_t per_box = include_corners ? 8 : 4;
  struct BNode {
    int depth;
    std::uint64_t index;
  };
  std::array<BNode, 64> stack;
  int top = 0;
  stack[top++] = {0, 0};
  while (top > 0) {
    const BNode nd = stack[--top];
    const Vec2 c = centers_[nd.depth][nd.index];
    if (box_distance(p, c, sides_[nd.depth] * scale) >= hit.distance) continue;
    const int id = box_id_[nd.depth][nd.index];
    if (id >= 0) {
      for (std::size_t k = 0; k < per_box; ++k) {
        const WedgePoint& w = wedges_[std::size_t(id) * 8 + k];
        const double d = norm(p - w.point);
        if (d < hit.distance) hit = {&w, d};
      }
    }
    if (nd.depth < n) {
      for (std::uint64_t k = 0; k < 4; ++k) stack[top++] = {nd.depth + 1, nd.index * 4 + k};
    }
  }
  return hit;
}

void GeometryModel::build_wedges() {
  wedges_.clear();
  if (!has_cantor_ || barrier_role_ == Role::Absorbing) return;
  std::vector<std::array<Segment, 6>> segs;
  segs.reserve(boxes_.size());
  for (const auto& b : boxes_) segs.push_back(b.segments());
  const double n_side = sides_[spec_.n_gen] / 2.0;
  const auto& squares = centers_[spec_.n_gen];

  // Distance from q to every feature except the walls of box `own` listed in skip.
  auto clearance = [&](Vec2 q, std::size_t own, std::initializer_list<int> skip) {
    double best = kInf;
    for (std::size_t bi = 0; bi < boxes_.size(); ++bi) {
      for (int k = 0; k < 6; ++k) {
        if (bi == own && std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        best = std::min(best, distance_point_segment(q, segs[bi][std::size_t(k)]));
      }
    }
    for (const Vec2& c : squares) best = std::min(best, box_distance(q, c, n_side));
    for (const auto& s : segments_) best = std::min(best, distance_point_segment(q, s.segment));
    for (const auto& a : arcs_) best = std::min(best, distance_point_arc(q, a.arc));
    return best;
  };

  constexpr double kSlit = kTwoPi;
  constexpr double kCorner = 1.5 * std::numbers::pi;
  for (std::size_t bi = 0; bi < boxes_.size(); ++bi) {
    const BarrierBox& b = boxes_[bi];
    const double x0 = b.center.x - b.half_side, x1 = b.center.x + b.half_side;
    const double y0 = b.center.y - b.half_side, y1 = b.center.y + b.half_side;
    const double g0 = b.center.x - b.gap_half, g1 = b.center.x + b.gap_half;
    // Slit tips; segment indices as in BarrierBox::segments().
    const WedgePoint tips[4] = {{{g0, y1}, {-1, 0}, kSlit, 0.0},
                                {{g1, y1}, {1, 0}, kSlit, 0.0},
                                {{g0, y0}, {-1, 0}, kSlit, 0.0},
                                {{g1, y0}, {1, 0}, kSlit, 0.0}};
    const int tip_segment[4] = {2, 3, 4, 5};
    for (int k = 0; k < 4; ++k) {
      WedgePoint w = tips[k];
      const Segment& own = segs[bi][std::size_t(tip_segment[k])];
      w.clearance = std::min(clearance(w.point, bi, {tip_segment[k]}), norm(own.b - own.a));
      wedges_.push_back(w);
    }
    // Convex corners: the free wedge runs counterclockwise from dir0 by 3 pi / 2.
    const WedgePoint corners[4] = {{{x1, y1}, {0, -1}, kCorner, 0.0},
                                   {{x0, y1}, {1, 0}, kCorner, 0.0},
                                   {{x0, y0}, {0, 1}, kCorner, 0.0},
                                   {{x1, y0}, {-1, 0}, kCorner, 0.0}};
    const int corner_walls[4][2] = {{1, 3}, {0, 2}, {0, 4}, {1, 5}};
    for (int k = 0; k < 4; ++k) {
      WedgePoint w = corners[k];
      const Segment& s0 = segs[bi][std::size_t(corner_walls[k][0])];
      const Segment& s1 = segs[bi][std::size_t(corner_walls[k][1])];
      w.clearance = std::min({clearance(w.point, bi, {corner_walls[k][0], corner_walls[k][1]}),
                              norm(s0.b - s0.a), norm(s1.b - s1.a)});
      wedges_.push_back(w);
    }
  }
}

RestrictedDomain GeometryModel::restricted_domain(const Word& q) const {
  if (!has_cantor_) throw GeometryError("restricted domain needs the Cantor layout");
  if (static_cast<int>(q.size()) >= spec_.n_gen) {
    throw InvalidWord("restricted domain word '" + q.str() + "' must be shallower than generation " +
                      std::to_string(spec_.n_gen));
  }
  if (!spec_.has_barrier(static_cast<int>(q.size()))) {
    throw GeometryError("restricted domain needs a barrier around word '" + q.str() + "'");
  }
  RestrictedDomain d;
  d.owner = q;
  const int depth = static_cast<int>(q.size());
  d.center = centers_[depth][q.index()];
  d.side = sides_[depth];
  d.half_side = box_half_[depth];
  d.gap_half = gap_half_[depth];
  d.cap_radius = d.half_side / 2.0;
  if (!(d.cap_radius > d.gap_half)) {
    throw GeometryError("cap radius does not cover the gap (b must be < 0.5)");
  }
  const Vec2 top = d.center + Vec2{0.0, d.half_side};
  const Vec2 bot = d.center - Vec2{0.0, d.half_side};
  constexpr double pi = std::numbers::pi;
  d.caps[0] = Arc{top, d.cap_radius, 0.0, pi};
  d.caps[1] = Arc{bot, d.cap_radius, pi, pi};
  d.shells[0] = Arc{top, d.cap_radius, pi, pi};
  d.shells[1] = Arc{bot, d.cap_radius, 0.0, pi};
  return d;
}

GeometryModel GeometryModel::with_caps(const RestrictedDomain& d) const {
  GeometryModel m = *this;
  m.arcs_.push_back(ArcFeature{d.caps[0], FeatureKind::CapArc, Role::Absorbing, kCapLabelTop, d.owner});
  m.arcs_.push_back(ArcFeature{d.caps[1], FeatureKind::CapArc, Role::Absorbing, kCapLabelBottom, d.owner});
  m.build_wedges();
  return m;
}

GeometryModel GeometryModel::with_shell_monitor(const RestrictedDomain& d) const {
  GeometryModel m = *this;
  m.arcs_.push_back(ArcFeature{d.shells[0], FeatureKind::ShellArc, Role::Monitor, kCapLabelTop, d.owner});
  m.arcs_.push_back(ArcFeature{d.shells[1], FeatureKind::ShellArc, Role::Monitor, kCapLabelBottom, d.owner});
  m.arcs_.push_back(ArcFeature{d.caps[0], FeatureKind::CapArc, Role::Monitor, kCapLabelTop, d.owner});
  m.arcs_.push_back(ArcFeature{d.caps[1], FeatureKind::CapArc, Role::Monitor, kCapLabelBottom, d.owner});
  m.build_wedges();
  return m;
}

GeometryModel GeometryModel::with_absorbing_barriers() const {
  GeometryModel m = *this;
  m.barrier_role_ = Role::Absorbing;
  for (auto& s : m.segments_) {
    if (s.role == Role::Reflecting) s.role = Role::Absorbing;
  }
  for (auto& a : m.arcs_) {
    if (a.role == Role::Reflecting) a.role = Role::Absorbing;
  }
  m.build_wedges();
  return m;
}

// ---------------------------------------------------------------------------

std::optional<std::pair<std::size_t, std::size_t>> find_box_conflict(const std::vector<BarrierBox>& boxes) {
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto si = boxes[i].segments();
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const auto sj = boxes[j].segments();
      for (const auto& a : si) {
        for (const auto& b : sj) {
          if (distance_segments(a, b) <= 0.0) return std::make_pair(i, j);
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<double> intersect_feature(const Feature& f, Vec2 p, Vec2 q) {
  if (f.is_arc) {
    std::array<double, 2> ts;
    if (cross_arc(p, q, f.arc, ts) > 0) return ts[0];
    return std::nullopt;
  }
  double t;
  Vec2 hit, normal;
  if (cross_segment(p, q, f.segment, t, hit, normal)) return t;
  return std::nullopt;
}

double distance_point_segment(Vec2 p, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double len2 = norm2(e);
  double t = len2 > 0.0 ? dot(p - s.a, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (s.a + e * t));
}

double distance_segments(const Segment& a, const Segment& b) {
  const Vec2 d1 = a.b - a.a, d2 = b.b - b.a;
  const double o1 = cross(d1, b.a - a.a), o2 = cross(d1, b.b - a.a);
  const double o3 = cross(d2, a.a - b.a), o4 = cross(d2, a.b - b.a);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  return std::min({distance_point_segment(a.a, b), distance_point_segment(a.b, b),
                   distance_point_segment(b.a, a), distance_point_segment(b.b, a)});
}

}  // namespace frbm
