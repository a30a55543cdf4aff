#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <unordered_map>

#include "frbm/geometry.hpp"

namespace frbm {
namespace {

struct Opening {
  double y;
  double x0, x1;
  int box;
};

// Half-extent of the obstacle attached to a depth-j square: the barrier box
// when present, else the square itself.
double obstacle_half(const GeometrySpec& spec, int j) {
  const double rho = std::pow(spec.alpha, j);
  return spec.has_barrier(j) ? rho * spec.ell / 2.0 : rho / 2.0;
}

}  // namespace

double required_connectivity_pitch(const GeometrySpec& spec) {
  const int n = spec.n_gen;
  const double a = spec.alpha;
  double need = std::numeric_limits<double>::infinity();
  std::vector<int> levels;
  for (int j = 0; j <= n; ++j) {
    if (spec.has_barrier(j)) {
      levels.push_back(j);
      if (spec.b > 0.0) need = std::min(need, spec.b * std::pow(a, j) * spec.ell);
    }
  }
  // Sibling spacing at every depth.
  for (int j = 1; j <= n; ++j) {
    need = std::min(need, std::pow(a, j - 1) * (1.0 - a) - 2.0 * obstacle_half(spec, j));
  }
  // Clearance between a barrier box and the next obstacle nested inside it.
  for (int k : levels) {
    int j = k + 1;
    while (j < n && !spec.has_barrier(j)) ++j;
    if (k == n) {
      need = std::min(need, std::pow(a, n) * (spec.ell - 1.0) / 2.0);
      continue;
    }
    double reach = 0.0;
    for (int i = k; i < j; ++i) reach += std::pow(a, i) * (1.0 - a) / 2.0;
    need = std::min(need, std::pow(a, k) * spec.ell / 2.0 - reach - obstacle_half(spec, j));
  }
  return need;
}

ConnectivityReport check_connectivity(const GeometryModel& model, double pitch) {
  if (!model.has_cantor()) throw ValidationError("connectivity check needs the Cantor layout");
  const GeometrySpec& spec = model.spec();
  const double need = required_connectivity_pitch(spec);
  if (!(pitch > 0.0) || !(pitch < need)) {
    throw ValidationError("connectivity pitch " + std::to_string(pitch) + " does not resolve the geometry; required pitch < " +
                          std::to_string(need));
  }
  ConnectivityReport rep;
  rep.pitch = pitch;
  rep.total_absorbers = static_cast<int>(model.square_count(model.depth()));

  const double outer = std::max(spec.ell, 1.0) / 2.0 + 8.0 * pitch;
  const double reach = std::min(outer, spec.r0);
  // Nodes at (i + 1/2 + s) * pitch; the small shift keeps nodes off symmetric lines.
  const double shift = 0.5 + 1.0 / 7919.0;
  const int lo = static_cast<int>(std::floor(-reach / pitch - shift));
  const int hi = static_cast<int>(std::ceil(reach / pitch - shift));
  const int width = hi - lo + 1;
  auto coord = [&](int i) { return (double(i) + shift) * pitch; };
  auto inside = [&](Vec2 p) {
    return std::abs(p.x) <= reach && std::abs(p.y) <= reach && norm(p) < spec.r0 &&
           model.classify(p).tag == PointClass::Tag::Interior;
  };

  std::unordered_map<long long, std::vector<Opening>> openings_by_row;
  for (std::size_t bi = 0; bi < model.barrier_boxes().size(); ++bi) {
    const BarrierBox& b = model.barrier_boxes()[bi];
    for (double y : {b.center.y + b.half_side, b.center.y - b.half_side}) {
      const auto row = static_cast<long long>(std::floor(y / pitch - shift));
      openings_by_row[row].push_back({y, b.center.x - b.gap_half, b.center.x + b.gap_half, int(bi)});
    }
  }

  std::vector<std::int8_t> state(std::size_t(width) * std::size_t(width), -1);  // -1 unknown, 0 blocked, 1 free, 2 seen
  auto idx = [&](int i, int j) { return std::size_t(i - lo) * std::size_t(width) + std::size_t(j - lo); };
  auto free_node = [&](int i, int j) {
    auto& s = state[idx(i, j)];
    if (s < 0) s = inside({coord(i), coord(j)}) ? 1 : 0;
    return s >= 1;
  };

  int si = static_cast<int>(std::lround(-shift)), sj = si;
  if (!free_node(si, sj)) throw ValidationError("connectivity: start node near the origin is not free");
  std::set<std::uint64_t> absorbers;
  std::set<int> boxes_seen;
  std::set<std::pair<int, double>> openings_seen;
  std::deque<std::pair<int, int>> queue{{si, sj}};
  state[idx(si, sj)] = 2;
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const Vec2 p{coord(i), coord(j)};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k], nj = j + dj[k];
      if (ni < lo || ni > hi || nj < lo || nj > hi) continue;
      const Vec2 q{coord(ni), coord(nj)};
      const auto hit = model.first_crossing(p, q);
      if (hit) {
        if (hit->kind == FeatureKind::AbsorbingSquareEdge) absorbers.insert(hit->cell);
        continue;
      }
      if (!free_node(ni, nj)) continue;
      if (dj[k] != 0) {
        const auto row = static_cast<long long>(std::min(j, nj));
        if (auto it = openings_by_row.find(row); it != openings_by_row.end()) {
          for (const auto& o : it->second) {
            if (p.x > o.x0 && p.x < o.x1 && std::min(p.y, q.y) < o.y && std::max(p.y, q.y) > o.y) {
              boxes_seen.insert(o.box);
              openings_seen.emplace(o.box, o.y);
            }
          }
        }
      }
      if (state[idx(ni, nj)] == 2) continue;
      state[idx(ni, nj)] = 2;
      queue.emplace_back(ni, nj);
    }
  }
  rep.reachable_absorbers = static_cast<int>(absorbers.size());
  rep.reachable_gap_count = static_cast<int>(boxes_seen.size());
  rep.reachable_gap_openings = static_cast<int>(openings_seen.size());
  rep.connected = rep.reachable_absorbers == rep.total_absorbers;
  return rep;
}

}  // namespace frbm
