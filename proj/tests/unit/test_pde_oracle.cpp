#include "doctest.h"

#include <cmath>
#include <numeric>

#include "frbm/pde_oracle.hpp"

using namespace frbm;

namespace {

GeometrySpec acceptance_spec(double b) {
  GeometrySpec g;
  g.alpha = 0.4;
  g.b = b;
  g.ell = 1.1;
  g.n_gen = 2;
  g.relax_gap = true;
  return g;
}

const GeometryModel& empty_model() {
  static const GeometryModel m = GeometryModel::custom({}, {});
  return m;
}

// Unit square [-1/2, 1/2]^2, every side Dirichlet: label 1 on the right side,
// 2 left, 3 top, 4 bottom.
Grid unit_square(double pitch) {
  GridRecipe r;
  r.center = {0.0, 0.0};
  r.half_x = r.half_y = 0.5;
  r.pitch = pitch;
  r.region = [](Vec2 p) { return std::abs(p.x) < 0.5 - 1e-12 && std::abs(p.y) < 0.5 - 1e-12; };
  r.absorbed_label = [](const Word&) { return -1; };
  r.outside_label = [](Vec2 p) {
    if (p.x > 0.49) return 1;
    if (p.x < -0.49) return 2;
    if (p.y > 0.49) return 3;
    return 4;
  };
  return build_grid(empty_model(), r);
}

// Strip of width 1: Dirichlet 0 at x = -1/2, 1 at x = 1/2, reflecting walls
// half a pitch beyond the top and bottom node rows.
struct Strip {
  GeometryModel model;
  Grid grid;
};

Strip neumann_strip(double pitch) {
  const double h = 0.25 + pitch / 2.0;
  Strip s{GeometryModel::custom({SegmentFeature{{{-1.0, h}, {1.0, h}}, FeatureKind::BarrierSegment, Role::Reflecting, 0},
                                 SegmentFeature{{{-1.0, -h}, {1.0, -h}}, FeatureKind::BarrierSegment, Role::Reflecting, 0}},
                                {}),
          {}};
  GridRecipe r;
  r.center = {0.0, 0.0};
  r.half_x = 0.5;
  r.half_y = 0.25 + 2.0 * pitch;
  r.pitch = pitch;
  r.region = [h](Vec2 p) { return std::abs(p.x) < 0.5 - 1e-12 && std::abs(p.y) < h; };
  r.absorbed_label = [](const Word&) { return -1; };
  r.outside_label = [h](Vec2 p) { return std::abs(p.y) > h ? -1 : p.x > 0.0 ? 1 : 2; };
  s.grid = build_grid(s.model, r);
  return s;
}

}  // namespace

TEST_CASE("unit square with one hot side") {
  const Grid g = unit_square(1.0 / 256.0);
  CHECK(g.count(NodeKind::Neumann) == 0);
  const GridField u = solve_mixed(g, {{1, 1.0}});
  // By rotation symmetry the four one-hot solutions sum to 1.
  CHECK(sample(g, u, {0.0, 0.0}) == doctest::Approx(0.25).epsilon(4e-3));

  GridField total;
  total.values.assign(g.size(), 0.0);
  for (int l = 1; l <= 4; ++l) {
    const GridField f = solve_mixed(g, {{l, 1.0}});
    for (std::size_t n = 0; n < g.size(); ++n) total.values[n] += f.values[n];
  }
  for (std::size_t n : g.unknown_nodes) CHECK(total.values[n] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Neumann strip reproduces the linear solution") {
  for (SolverKind kind : {SolverKind::Direct, SolverKind::ConjugateGradient, SolverKind::Sor}) {
    const Strip s = neumann_strip(1.0 / 64.0);
    CHECK(s.grid.count(NodeKind::Neumann) > 0);
    SolveOptions opt;
    opt.solver = kind;
    const GridField u = solve_mixed(s.grid, {{1, 1.0}, {2, 0.0}}, opt);
    double err = 0.0;
    for (std::size_t n : s.grid.unknown_nodes) err = std::max(err, std::abs(u.values[n] - (s.grid.position(n).x + 0.5)));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("superposition, constant data and maximum principle") {
  const Strip s = neumann_strip(1.0 / 32.0);
  const GridField f = solve_mixed(s.grid, {{1, 0.7}, {2, 0.0}});
  const GridField g = solve_mixed(s.grid, {{1, 0.0}, {2, -0.3}});
  const GridField fg = solve_mixed(s.grid, {{1, 0.7}, {2, -0.3}});
  const GridField one = solve_mixed(s.grid, {{1, 1.0}, {2, 1.0}});
  for (std::size_t n : s.grid.unknown_nodes) {
    CHECK(fg.values[n] == doctest::Approx(f.values[n] + g.values[n]).epsilon(1e-9));
    CHECK(one.values[n] == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(fg.min_value >= fg.min_dirichlet - 1e-12);
  CHECK(fg.max_value <= fg.max_dirichlet + 1e-12);

  CHECK_THROWS_AS(solve_mixed(s.grid, {{1, 1.0}}, SolveOptions{SolverKind::Sor, 1e-11, 3, 1.9}), NumericalError);
}

TEST_CASE("restricted-domain grid") {
  const GeometrySpec g = acceptance_spec(0.2);
  OracleOptions opt;
  opt.pitch = 1.0 / 512.0;
  const Grid grid = build_grid_domain(Word{}, g, opt);
  bool cap_top = false, cap_bottom = false;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (grid.kind[n] == NodeKind::Dirichlet && grid.label[n] == kLabelCap) {
      (grid.position(n).y > 0.0 ? cap_top : cap_bottom) = true;
    }
  }
  CHECK(cap_top);
  CHECK(cap_bottom);
  for (int l = 1; l <= 4; ++l) CHECK(grid.has_label(l));
  for (int j = -grid.half_j; j <= grid.half_j; j += 7) {
    for (int i = -grid.half_i; i <= grid.half_i; ++i) {
      REQUIRE(grid.kind[grid.node(i, j)] == grid.kind[grid.node(-i, j)]);
    }
  }

  opt.pitch = 0.06;  // b * ell / 4 = 0.055
  CHECK_THROWS_WITH_AS(build_grid_domain(Word{}, g, opt), doctest::Contains("pitch"), ValidationError);
}

TEST_CASE("restricted-domain solutions") {
  const GeometrySpec g = acceptance_spec(0.2);
  OracleOptions opt;
  opt.pitch = 1.0 / 256.0;
  const RestrictedSolution sol = solve_restricted(g, Word{}, opt);
  for (Vec2 p : default_probes(g, Word{})) {
    const PdeExitLaw law = sol.at(p);
    CHECK(law.sum() == doctest::Approx(1.0).epsilon(1e-6));
    for (double v : law.p) CHECK(v >= 0.0);
  }
  const PdeExitLaw c = sol.at({0.0, 0.0});
  for (int k = 1; k < 4; ++k) CHECK(c.p[k] == doctest::Approx(c.p[0]).epsilon(1e-6));
  // Mirror symmetry x -> -x swaps digits 1 and 2.
  const PdeExitLaw r = sol.at({0.3, 0.1}), l = sol.at({-0.3, 0.1});
  CHECK(r.p[0] == doctest::Approx(l.p[1]).epsilon(1e-6));
  CHECK(r.p[2] == doctest::Approx(l.p[3]).epsilon(1e-6));
  CHECK(r.p[4] == doctest::Approx(l.p[4]).epsilon(1e-6));

  SolveOptions cg;
  cg.solver = SolverKind::ConjugateGradient;
  const RestrictedSolution alt = solve_restricted(g, Word{}, opt, cg);
  const PdeExitLaw a = alt.at({0.3, 0.1});
  for (int k = 0; k < 5; ++k) CHECK(a.p[k] == doctest::Approx(r.p[k]).epsilon(1e-6));
}

TEST_CASE("ratio check") {
  const GeometrySpec g = acceptance_spec(0.2);
  OracleOptions opt;
  opt.pitch = 1.0 / 256.0;
  const auto same = lemma_hmD_check(g, Word{}, 1, 1, {0.2}, opt);
  REQUIRE(same.size() == 1);
  CHECK(same[0].sup_ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto mirror = lemma_hmD_check(g, Word{}, 1, 2, {0.4, 0.2}, opt);
  REQUIRE(mirror.size() == 2);
  for (const auto& row : mirror) {
    CHECK(row.ratio_at_center == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::isfinite(row.sup_ratio));
    CHECK(row.sup_ratio >= 1.0);
  }
}

TEST_CASE("zeta field") {
  const GeometrySpec g = acceptance_spec(0.2);
  OracleOptions opt;
  opt.pitch = 1.0 / 256.0;
  const ZetaResult small = zeta_field(g, Word{}, 0.03, opt);
  const ZetaResult large = zeta_field(g, Word{}, 0.1, opt);
  for (const ZetaResult* z : {&small, &large}) {
    CHECK(z->min_value >= 0.0);
    CHECK(z->max_value <= 1.0);
  }
  // A larger zero set lowers the field everywhere.
  CHECK(large.sup_d_prime < small.sup_d_prime);
  CHECK(large.field.min_dirichlet == 0.0);
  CHECK(sample(large.grid, large.field, {0.0, 0.105}) < sample(small.grid, small.field, {0.0, 0.105}));
  CHECK_THROWS_AS(zeta_field(g, Word{}, 0.3, opt), ValidationError);
}

TEST_CASE("global exit measure smoke test") {
  GeometrySpec g = acceptance_spec(0.2);
  g.n_gen = 1;
  const GeometryModel m = GeometryModel::build(g);
  const auto p = global_exit_measure(m, 1.0 / 64.0, 1, {0.0, 0.0});
  REQUIRE(p.size() == 4);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
}
