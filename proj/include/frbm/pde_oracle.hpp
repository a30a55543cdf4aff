#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frbm/geometry.hpp"
#include "frbm/rbm_sim.hpp"

namespace frbm {

enum class NodeKind : std::uint8_t { Interior, Neumann, Dirichlet, Excluded };

// Dirichlet labels used by the restricted-domain grids. Digits 1..4 are the
// children of Q.
inline constexpr int kLabelCap = 5;
inline constexpr int kLabelBall = 6;

// Regular node lattice center + (i, j) * pitch, i in [-half_i, half_i],
// j in [-half_j, half_j]. Interior and Neumann nodes are unknowns; a Neumann
// node has at least one link cut by a reflecting feature (zero flux across it).
struct Grid {
  double pitch = 0.0;
  Vec2 center;
  int half_i = 0;
  int half_j = 0;
  std::vector<NodeKind> kind;
  std::vector<int> label;             // Dirichlet label, 0 otherwise
  std::vector<std::uint8_t> links;    // bit d set: link toward direction d kept (E, W, N, S)
  std::vector<Vec2> neumann_normal;   // unit normal of the first cut link, zero otherwise
  std::vector<std::int32_t> unknown;  // unknown number or -1
  std::vector<std::size_t> unknown_nodes;

  int width() const { return 2 * half_i + 1; }
  int height() const { return 2 * half_j + 1; }
  std::size_t size() const { return kind.size(); }
  std::size_t node(int i, int j) const {
    return std::size_t(j + half_j) * std::size_t(width()) + std::size_t(i + half_i);
  }
  Vec2 position(std::size_t n) const;
  std::optional<std::size_t> neighbor(std::size_t n, int dir) const;
  std::size_t count(NodeKind k) const;
  bool has_label(int label) const;
};

struct GridField {
  std::vector<double> values;  // NaN on excluded nodes
  double residual = 0.0;       // relative residual of the linear solve
  int iterations = 0;
  double min_dirichlet = 0.0, max_dirichlet = 0.0;
  double min_value = 0.0, max_value = 0.0;  // over unknown nodes
};

// Direct: sparse Cholesky factorization, reused across boundary assignments.
enum class SolverKind { Direct, ConjugateGradient, Sor };

struct SolveOptions {
  SolverKind solver = SolverKind::Direct;
  double tolerance = 1e-11;  // relative residual
  int max_iterations = 200000;
  double omega = 1.9;        // SOR relaxation
};

// Maps Dirichlet labels to values; unlisted labels get 0.
using BoundaryAssignment = std::map<int, double>;

// Restricted-domain grid options.
struct OracleOptions {
  double pitch = 1.0 / 512.0;
  int depth_offset = 2;        // absorbing squares at depth |Q| + depth_offset
  double ball_radius = 0.0;    // > 0 adds a Dirichlet ball B(x_Q, r) with label kLabelBall
};

// Rasterizes D(Q) for the geometry `spec` (generation forced to |Q| + depth_offset).
// Throws ValidationError when pitch > b*ell*rho/4 or the interior is disconnected.
Grid build_grid_domain(const Word& q, const GeometrySpec& spec, const OracleOptions& options);

// Builds a grid over an arbitrary model within the rectangle |x - cx| <= hx,
// |y - cy| <= hy. `dirichlet` labels absorbed points (by word) and nodes that
// lie outside `region` but are reached without crossing a reflecting feature;
// a negative label excludes the node.
struct GridRecipe {
  Vec2 center;
  double half_x = 1.0, half_y = 1.0;
  double pitch = 0.01;
  std::function<bool(Vec2)> region;
  std::function<int(const Word&)> absorbed_label;
  std::function<int(Vec2)> outside_label;
};
Grid build_grid(const GeometryModel& model, const GridRecipe& recipe);

// Solves the discrete mixed problem. Throws NumericalError on non-convergence
// (message carries the residual) or on a discrete maximum-principle violation.
GridField solve_mixed(const Grid& grid, const BoundaryAssignment& values, const SolveOptions& options = {});

// Bilinear interpolation from the four surrounding nodes, falling back to the
// nearest usable node. Throws ValidationError if none is usable.
double sample(const Grid& grid, const GridField& field, Vec2 p);

// Auxiliary subdomain D' = D minus the two cap balls minus the child barrier boxes.
bool in_d_prime(const RestrictedDomain& d, double alpha, double ell, Vec2 p);

struct RatioRow {
  double b = 0.0;
  double sup_ratio = 0.0;     // sup over D' of U_a / U_b
  Vec2 argmax;
  double ratio_at_center = 0.0;
  double center_a = 0.0, center_b = 0.0;
  std::size_t d_prime_nodes = 0;
  double max_residual = 0.0;
};

// sup_{D'} U_a / U_b for each gap value; U_a is 1 on the depth-m squares
// below child a and 0 on the other squares and on the caps.
std::vector<RatioRow> lemma_hmD_check(const GeometrySpec& spec, const Word& q, int a, int b,
                                      const std::vector<double>& b_values, const OracleOptions& options,
                                      const SolveOptions& solve = {});

struct ZetaResult {
  double b = 0.0;
  double radius = 0.0;
  double sup_d_prime = 0.0;
  double min_value = 0.0, max_value = 0.0;
  Grid grid;
  GridField field;
};

// zeta = 0 on B(x_Q, r), 1 on K and on the caps, zero flux elsewhere.
ZetaResult zeta_field(const GeometrySpec& spec, const Word& q, double radius, const OracleOptions& options,
                      const SolveOptions& solve = {});

// Exit probabilities of D(Q) at a point from the PDE side: digits 1..4 and the cap.
struct PdeExitLaw {
  std::array<double, 5> p{};
  double sum() const { return p[0] + p[1] + p[2] + p[3] + p[4]; }
};

struct RestrictedSolution {
  Grid grid;
  std::array<GridField, 5> fields;  // U_1..U_4, cap
  PdeExitLaw at(Vec2 p) const;
};

RestrictedSolution solve_restricted(const GeometrySpec& spec, const Word& q, const OracleOptions& options,
                                    const SolveOptions& solve = {});

struct CrossRow {
  Vec2 probe;
  int label = 0;  // 1..4 digits, 5 cap
  double mc = 0.0;
  double mc_sigma = 0.0;
  double pde = 0.0;
  double tolerance = 0.0;  // 3 sigma + 5% of the PDE value
  bool pass = false;
};

struct CrossValidation {
  std::vector<CrossRow> rows;
  std::vector<double> pde_sums;  // per probe
  std::vector<std::uint64_t> mc_other;
  bool pass = false;
};

// Default probes: x_Q, both shell midpoints, and two asymmetric points.
std::vector<Vec2> default_probes(const GeometrySpec& spec, const Word& q);

CrossValidation mc_cross_validate(const GeometrySpec& spec, const Word& q, const SimParams& params,
                                  std::uint64_t paths_per_probe, const std::vector<Vec2>& probes,
                                  const OracleOptions& options, const SolveOptions& solve = {});

// Global exit measure over depth-k cells on Omega itself (outer circle and
// barriers reflecting), evaluated at `at`. Coarse-grid smoke test for small N.
std::vector<double> global_exit_measure(const GeometryModel& model, double pitch, int k, Vec2 at,
                                        const SolveOptions& solve = {});

// CSV dump: x,y,value for every non-excluded node.
void write_field_csv(std::ostream& os, const Grid& grid, const GridField& field);

}  // namespace frbm
