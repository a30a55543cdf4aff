#include "frbm/pde_oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <set>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/Sparse>

#include "frbm/errors.hpp"
#include "frbm/rng.hpp"

namespace frbm {
namespace {

constexpr int kDi[4] = {1, -1, 0, 0};
constexpr int kDj[4] = {0, 0, 1, -1};
constexpr int kOpposite[4] = {1, 0, 3, 2};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using SpMat = Eigen::SparseMatrix<double>;
using Preconditioned = Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;

// The linear system of one grid; the preconditioner is built once and reused
// for every boundary assignment.
class LinearSystem {
 public:
  explicit LinearSystem(const Grid& grid) : grid_(grid) {
    const std::size_t n = grid.unknown_nodes.size();
    if (n == 0) throw NumericalError("pde: grid has no unknown nodes");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * 5);
    diag_.assign(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      const std::size_t node = grid.unknown_nodes[u];
      for (int d = 0; d < 4; ++d) {
        if (!(grid.links[node] & (1u << d))) continue;
        diag_[u] += 1.0;
        const std::size_t nb = *grid.neighbor(node, d);
        if (grid.unknown[nb] >= 0) trip.emplace_back(int(u), grid.unknown[nb], -1.0);
      }
      trip.emplace_back(int(u), int(u), diag_[u]);
    }
    a_.resize(int(n), int(n));
    a_.setFromTriplets(trip.begin(), trip.end());
    a_.makeCompressed();
  }

  Eigen::VectorXd rhs(const BoundaryAssignment& values) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(grid_.unknown_nodes.size()));
    for (std::size_t u = 0; u < grid_.unknown_nodes.size(); ++u) {
      const std::size_t node = grid_.unknown_nodes[u];
      for (int d = 0; d < 4; ++d) {
        if (!(grid_.links[node] & (1u << d))) continue;
        const std::size_t nb = *grid_.neighbor(node, d);
        if (grid_.kind[nb] == NodeKind::Dirichlet) b[Eigen::Index(u)] += value_of(values, grid_.label[nb]);
      }
    }
    return b;
  }

  GridField solve(const BoundaryAssignment& values, const SolveOptions& opt) {
    const Eigen::VectorXd b = rhs(values);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    int iterations = 0;
    const double bnorm = b.norm();
    if (bnorm > 0.0) {
      if (opt.solver == SolverKind::Direct) {
        if (!llt_) {
          llt_ = std::make_unique<Eigen::SimplicialLLT<SpMat>>();
          llt_->compute(a_);
          if (llt_->info() != Eigen::Success) throw NumericalError("pde: Cholesky factorization failed");
        }
        x = llt_->solve(b);
        iterations = 1;
      } else if (opt.solver == SolverKind::ConjugateGradient) {
        if (!cg_) {
          cg_ = std::make_unique<Preconditioned>();
          cg_->compute(a_);
          if (cg_->info() != Eigen::Success) throw NumericalError("pde: preconditioner construction failed");
        }
        cg_->setTolerance(opt.tolerance);
        cg_->setMaxIterations(opt.max_iterations);
        x = cg_->solve(b);
        iterations = int(cg_->iterations());
      } else {
        iterations = sor(b, x, opt);
      }
    }
    const double residual = bnorm > 0.0 ? (b - a_ * x).norm() / bnorm : 0.0;
    if (!(residual <= opt.tolerance * 10.0)) {
      throw NumericalError("pde: solver did not converge, relative residual " + std::to_string(residual) + " after " +
                           std::to_string(iterations) + " iterations");
    }
    return assemble(values, x, residual, iterations);
  }

 private:
  static double value_of(const BoundaryAssignment& values, int label) {
    const auto it = values.find(label);
    return it == values.end() ? 0.0 : it->second;
  }

  int sor(const Eigen::VectorXd& b, Eigen::VectorXd& x, const SolveOptions& opt) const {
    const double bnorm = b.norm();
    for (int it = 1; it <= opt.max_iterations; ++it) {
      for (int u = 0; u < a_.outerSize(); ++u) {
        double off = 0.0;
        for (SpMat::InnerIterator e(a_, u); e; ++e) {
          if (e.index() != u) off += e.value() * x[e.index()];
        }
        const double gs = (b[u] - off) / diag_[std::size_t(u)];
        x[u] += opt.omega * (gs - x[u]);
      }
      if (it % 25 == 0 && (b - a_ * x).norm() / bnorm <= opt.tolerance) return it;
    }
    throw NumericalError("pde: SOR did not converge, relative residual " +
                         std::to_string((b - a_ * x).norm() / bnorm) + " after " +
                         std::to_string(opt.max_iterations) + " sweeps");
  }

  GridField assemble(const BoundaryAssignment& values, const Eigen::VectorXd& x, double residual, int iterations) const {
    GridField f;
    f.values.assign(grid_.size(), kNaN);
    f.residual = residual;
    f.iterations = iterations;
    double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (grid_.kind[n] == NodeKind::Dirichlet) {
        f.values[n] = value_of(values, grid_.label[n]);
      } else if (grid_.unknown[n] >= 0) {
        f.values[n] = x[grid_.unknown[n]];
      }
    }
    // Extremes over the Dirichlet nodes that carry a link into the unknowns.
    for (std::size_t node : grid_.unknown_nodes) {
      for (int d = 0; d < 4; ++d) {
        if (!(grid_.links[node] & (1u << d))) continue;
        const std::size_t nb = *grid_.neighbor(node, d);
        if (grid_.kind[nb] == NodeKind::Dirichlet) {
          dmin = std::min(dmin, f.values[nb]);
          dmax = std::max(dmax, f.values[nb]);
        }
      }
    }
    if (!std::isfinite(dmin)) throw NumericalError("pde: no Dirichlet node is linked to the unknowns");
    f.min_dirichlet = dmin;
    f.max_dirichlet = dmax;
    f.min_value = x.minCoeff();
    f.max_value = x.maxCoeff();
    const double slack = 1e-8 * std::max(1.0, dmax - dmin);
    if (f.min_value < dmin - slack || f.max_value > dmax + slack) {
      throw NumericalError("pde: discrete maximum principle violated (unknowns in [" + std::to_string(f.min_value) +
                           ", " + std::to_string(f.max_value) + "], Dirichlet data in [" + std::to_string(dmin) +
                           ", " + std::to_string(dmax) + "])");
    }
    return f;
  }

  const Grid& grid_;
  SpMat a_;
  std::vector<double> diag_;
  std::unique_ptr<Preconditioned> cg_;
  std::unique_ptr<Eigen::SimplicialLLT<SpMat>> llt_;
};

GeometrySpec oracle_spec(const GeometrySpec& spec, const Word& q, int depth_offset) {
  if (depth_offset < 1) throw ValidationError("oracle.depth_offset must be at least 1");
  GeometrySpec s = spec;
  s.n_gen = static_cast<int>(q.size()) + depth_offset;
  if (spec.barrier_gen_max >= 0) s.barrier_gen_max = std::min(spec.barrier_gen_max, s.n_gen);
  return s;
}

struct OracleSetup {
  GeometryModel model;
  RestrictedDomain domain;
  Grid grid;
};

OracleSetup setup_oracle(const Word& q, const GeometrySpec& spec, const OracleOptions& opt) {
  const GeometrySpec s = oracle_spec(spec, q, opt.depth_offset);
  GeometryModel model = GeometryModel::build(s);
  const double rho = std::pow(s.alpha, double(q.size()));
  const double need = s.b * s.ell * rho / 4.0;
  if (!(opt.pitch > 0.0) || opt.pitch > need) {
    throw ValidationError("oracle.pitch " + std::to_string(opt.pitch) +
                          " does not resolve the gap; required pitch <= " + std::to_string(need));
  }
  RestrictedDomain dom = model.restricted_domain(q);
  const double r = opt.ball_radius;
  if (r > 0.0) {
    if (!(model.feature_distance(dom.center) > r + opt.pitch)) {
      throw ValidationError("oracle.ball_radius " + std::to_string(r) + " overlaps the boundary of D");
    }
  }
  GridRecipe recipe;
  recipe.center = dom.center;
  recipe.pitch = opt.pitch;
  recipe.half_x = dom.half_side + 2.0 * opt.pitch;
  recipe.half_y = dom.half_side + dom.cap_radius + 2.0 * opt.pitch;
  recipe.region = [dom, r](Vec2 p) { return dom.contains(p) && !(r > 0.0 && norm(p - dom.center) < r); };
  const int qd = static_cast<int>(q.size());
  recipe.absorbed_label = [q, qd](const Word& w) { return w.has_prefix(q) ? int(w[qd]) : -1; };
  recipe.outside_label = [dom, r](Vec2 p) {
    if (r > 0.0 && norm(p - dom.center) < r) return kLabelBall;
    const Vec2 d = p - dom.center;
    if (std::abs(d.x) >= dom.half_side || std::abs(d.y) >= dom.half_side) return kLabelCap;
    return -1;
  };
  Grid grid = build_grid(model, recipe);
  return {std::move(model), dom, std::move(grid)};
}

std::size_t nearest_node(const Grid& g, Vec2 p) {
  const int i = static_cast<int>(std::lround((p.x - g.center.x) / g.pitch));
  const int j = static_cast<int>(std::lround((p.y - g.center.y) / g.pitch));
  if (std::abs(i) > g.half_i || std::abs(j) > g.half_j) throw ValidationError("point outside the grid");
  return g.node(i, j);
}

}  // namespace

Vec2 Grid::position(std::size_t n) const {
  const int i = static_cast<int>(n % std::size_t(width())) - half_i;
  const int j = static_cast<int>(n / std::size_t(width())) - half_j;
  return {center.x + i * pitch, center.y + j * pitch};
}

std::optional<std::size_t> Grid::neighbor(std::size_t n, int dir) const {
  const int i = static_cast<int>(n % std::size_t(width())) - half_i + kDi[dir];
  const int j = static_cast<int>(n / std::size_t(width())) - half_j + kDj[dir];
  if (std::abs(i) > half_i || std::abs(j) > half_j) return std::nullopt;
  return node(i, j);
}

std::size_t Grid::count(NodeKind k) const { return std::size_t(std::count(kind.begin(), kind.end(), k)); }

bool Grid::has_label(int l) const {
  for (std::size_t n = 0; n < size(); ++n) {
    if (kind[n] == NodeKind::Dirichlet && label[n] == l) return true;
  }
  return false;
}

Grid build_grid(const GeometryModel& model, const GridRecipe& recipe) {
  if (!(recipe.pitch > 0.0)) throw ValidationError("grid pitch must be positive");
  Grid g;
  g.pitch = recipe.pitch;
  g.center = recipe.center;
  g.half_i = static_cast<int>(std::ceil(recipe.half_x / recipe.pitch));
  g.half_j = static_cast<int>(std::ceil(recipe.half_y / recipe.pitch));
  const std::size_t total = std::size_t(g.width()) * std::size_t(g.height());
  g.kind.assign(total, NodeKind::Excluded);
  g.label.assign(total, 0);
  g.links.assign(total, 0);
  g.neumann_normal.assign(total, Vec2{});
  g.unknown.assign(total, -1);

  std::vector<std::uint8_t> outside(total, 0);
  for (std::size_t n = 0; n < total; ++n) {
    const Vec2 p = g.position(n);
    if (!recipe.region(p)) {
      outside[n] = 1;
      continue;
    }
    const PointClass c = model.classify(p);
    if (c.tag == PointClass::Tag::Interior) {
      g.kind[n] = NodeKind::Interior;
    } else if (c.tag == PointClass::Tag::Absorbed) {
      const int l = recipe.absorbed_label(c.word);
      if (l >= 0) {
        g.kind[n] = NodeKind::Dirichlet;
        g.label[n] = l;
      }
    }
  }

  for (std::size_t n = 0; n < total; ++n) {
    if (g.kind[n] != NodeKind::Interior) continue;
    const Vec2 p = g.position(n);
    bool cut = false;
    for (int d = 0; d < 4; ++d) {
      const auto nb = g.neighbor(n, d);
      bool keep = false;
      if (nb) {
        const Vec2 q = g.position(*nb);
        const auto hit = model.first_crossing(p, q);
        if (hit && hit->role != Role::Absorbing) {
          keep = false;
        } else if (hit) {
          if (g.kind[*nb] != NodeKind::Dirichlet) {
            throw ValidationError("grid pitch does not resolve an absorbing square near " + std::to_string(p.x) +
                                  ", " + std::to_string(p.y));
          }
          keep = true;
        } else if (g.kind[*nb] != NodeKind::Excluded) {
          keep = true;
        } else if (outside[*nb]) {
          const int l = recipe.outside_label(q);
          if (l >= 0) {
            g.kind[*nb] = NodeKind::Dirichlet;
            g.label[*nb] = l;
            keep = true;
          }
        }
      }
      if (keep) {
        g.links[n] |= std::uint8_t(1u << d);
      } else if (!cut) {
        cut = true;
        g.neumann_normal[n] = Vec2{-double(kDi[d]), -double(kDj[d])};
      }
    }
    if (cut) g.kind[n] = NodeKind::Neumann;
  }

  // Components of the unknown nodes; each must be one piece touching Dirichlet data.
  std::vector<std::int32_t> comp(total, -1);
  int components = 0;
  bool touches = true;
  for (std::size_t s = 0; s < total; ++s) {
    if ((g.kind[s] != NodeKind::Interior && g.kind[s] != NodeKind::Neumann) || comp[s] >= 0) continue;
    bool dirichlet = false;
    std::vector<std::size_t> stack{s};
    comp[s] = components;
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      for (int d = 0; d < 4; ++d) {
        if (!(g.links[n] & (1u << d))) continue;
        const std::size_t nb = *g.neighbor(n, d);
        if (g.kind[nb] == NodeKind::Dirichlet) {
          dirichlet = true;
        } else if (comp[nb] < 0) {
          comp[nb] = components;
          stack.push_back(nb);
        }
      }
    }
    touches = touches && dirichlet;
    ++components;
  }
  if (components == 0) throw ValidationError("grid has no interior nodes");
  if (components > 1) {
    throw ValidationError("grid interior is disconnected (" + std::to_string(components) +
                          " components); refine the pitch");
  }
  if (!touches) throw ValidationError("grid interior carries no Dirichlet data");

  for (std::size_t n = 0; n < total; ++n) {
    if (g.kind[n] == NodeKind::Interior || g.kind[n] == NodeKind::Neumann) {
      g.unknown[n] = static_cast<std::int32_t>(g.unknown_nodes.size());
      g.unknown_nodes.push_back(n);
    }
  }
  return g;
}

Grid build_grid_domain(const Word& q, const GeometrySpec& spec, const OracleOptions& options) {
  return setup_oracle(q, spec, options).grid;
}

GridField solve_mixed(const Grid& grid, const BoundaryAssignment& values, const SolveOptions& options) {
  LinearSystem sys(grid);
  return sys.solve(values, options);
}

double sample(const Grid& g, const GridField& f, Vec2 p) {
  const double fi = (p.x - g.center.x) / g.pitch;
  const double fj = (p.y - g.center.y) / g.pitch;
  const int i0 = static_cast<int>(std::floor(fi));
  const int j0 = static_cast<int>(std::floor(fj));
  if (i0 < -g.half_i || i0 + 1 > g.half_i || j0 < -g.half_j || j0 + 1 > g.half_j) {
    throw ValidationError("sample point outside the grid");
  }
  const std::size_t n00 = g.node(i0, j0), n10 = g.node(i0 + 1, j0);
  const std::size_t n01 = g.node(i0, j0 + 1), n11 = g.node(i0 + 1, j0 + 1);
  auto usable = [&](std::size_t n) { return g.kind[n] != NodeKind::Excluded; };
  // An edge of the cell is usable when the link between its ends is kept.
  auto joined = [&](std::size_t a, std::size_t b, int dir) {
    if (g.unknown[a] >= 0) return bool(g.links[a] & (1u << dir));
    if (g.unknown[b] >= 0) return bool(g.links[b] & (1u << kOpposite[dir]));
    return true;
  };
  if (usable(n00) && usable(n10) && usable(n01) && usable(n11) && joined(n00, n10, 0) && joined(n01, n11, 0) &&
      joined(n00, n01, 2) && joined(n10, n11, 2)) {
    const double tx = fi - i0, ty = fj - j0;
    return (1 - tx) * (1 - ty) * f.values[n00] + tx * (1 - ty) * f.values[n10] + (1 - tx) * ty * f.values[n01] +
           tx * ty * f.values[n11];
  }
  const std::size_t n = nearest_node(g, p);
  if (!usable(n)) throw ValidationError("sample point has no usable grid node");
  return f.values[n];
}

bool in_d_prime(const RestrictedDomain& d, double alpha, double ell, Vec2 p) {
  if (!d.contains(p)) return false;
  for (const auto& cap : d.caps) {
    if (norm(p - cap.center) < d.cap_radius) return false;
  }
  const double off = d.side * (1.0 - alpha) / 2.0;
  const double child_half = alpha * d.side * ell / 2.0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Vec2 c = d.center + Vec2{sx * off, sy * off};
      if (std::abs(p.x - c.x) < child_half && std::abs(p.y - c.y) < child_half) return false;
    }
  }
  return true;
}

std::vector<RatioRow> lemma_hmD_check(const GeometrySpec& spec, const Word& q, int a, int b,
                                      const std::vector<double>& b_values, const OracleOptions& options,
                                      const SolveOptions& solve) {
  if (a < 1 || a > 4 || b < 1 || b > 4) throw ValidationError("ratio check: child digits must lie in 1..4");
  std::vector<RatioRow> rows;
  for (double bv : b_values) {
    GeometrySpec s = spec;
    s.b = bv;
    OracleSetup setup = setup_oracle(q, s, options);
    LinearSystem sys(setup.grid);
    const GridField ua = sys.solve({{a, 1.0}}, solve);
    const GridField ub = a == b ? ua : sys.solve({{b, 1.0}}, solve);
    RatioRow row;
    row.b = bv;
    row.max_residual = std::max(ua.residual, ub.residual);
    for (std::size_t n : setup.grid.unknown_nodes) {
      const Vec2 p = setup.grid.position(n);
      if (!in_d_prime(setup.domain, s.alpha, s.ell, p)) continue;
      ++row.d_prime_nodes;
      const double r = ua.values[n] / ub.values[n];
      if (r > row.sup_ratio) {
        row.sup_ratio = r;
        row.argmax = p;
      }
    }
    if (row.d_prime_nodes == 0) throw ValidationError("ratio check: D' contains no grid node at this pitch");
    const std::size_t c = nearest_node(setup.grid, setup.domain.center);
    row.center_a = ua.values[c];
    row.center_b = ub.values[c];
    row.ratio_at_center = row.center_a / row.center_b;
    rows.push_back(row);
  }
  return rows;
}

ZetaResult zeta_field(const GeometrySpec& spec, const Word& q, double radius, const OracleOptions& options,
                      const SolveOptions& solve) {
  if (!(radius > 0.0)) throw ValidationError("oracle.zeta_radius must be positive");
  OracleOptions opt = options;
  opt.ball_radius = radius;
  OracleSetup setup = setup_oracle(q, spec, opt);
  ZetaResult z;
  z.b = spec.b;
  z.radius = radius;
  z.field = solve_mixed(setup.grid, {{1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}, {kLabelCap, 1.0}, {kLabelBall, 0.0}},
                        solve);
  z.min_value = z.field.min_value;
  z.max_value = z.field.max_value;
  for (std::size_t n : setup.grid.unknown_nodes) {
    if (in_d_prime(setup.domain, spec.alpha, spec.ell, setup.grid.position(n))) {
      z.sup_d_prime = std::max(z.sup_d_prime, z.field.values[n]);
    }
  }
  z.grid = std::move(setup.grid);
  return z;
}

PdeExitLaw RestrictedSolution::at(Vec2 p) const {
  PdeExitLaw law;
  for (int k = 0; k < 5; ++k) law.p[std::size_t(k)] = sample(grid, fields[std::size_t(k)], p);
  return law;
}

RestrictedSolution solve_restricted(const GeometrySpec& spec, const Word& q, const OracleOptions& options,
                                    const SolveOptions& solve) {
  OracleSetup setup = setup_oracle(q, spec, options);
  RestrictedSolution out;
  out.grid = std::move(setup.grid);
  LinearSystem sys(out.grid);
  for (int k = 0; k < 5; ++k) out.fields[std::size_t(k)] = sys.solve({{k + 1, 1.0}}, solve);
  return out;
}

std::vector<Vec2> default_probes(const GeometrySpec& spec, const Word& q) {
  const Vec2 c = square_center(q, spec.alpha);
  const double rho = std::pow(spec.alpha, double(q.size()));
  const double half = rho * spec.ell / 2.0;
  const double cap = half / 2.0;
  const double off = rho * (1.0 - spec.alpha) / 2.0;
  return {c, c + Vec2{0.0, half - cap}, c - Vec2{0.0, half - cap}, c + Vec2{off, 0.0}, c + Vec2{off, off}};
}

CrossValidation mc_cross_validate(const GeometrySpec& spec, const Word& q, const SimParams& params,
                                  std::uint64_t paths_per_probe, const std::vector<Vec2>& probes,
                                  const OracleOptions& options, const SolveOptions& solve) {
  if (probes.empty()) throw ValidationError("cross-validation needs at least one probe");
  if (paths_per_probe == 0) throw ValidationError("cross-validation needs at least one path per probe");
  const RestrictedSolution pde = solve_restricted(spec, q, options, solve);
  const GeometryModel model = GeometryModel::build(oracle_spec(spec, q, options.depth_offset));
  const RestrictedSimulator sim(model, q);
  CrossValidation cv;
  cv.pass = true;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Vec2 probe = probes[k];
    if (!sim.domain().contains(probe)) throw ValidationError("probe lies outside D");
    const PdeExitLaw law = pde.at(probe);
    cv.pde_sums.push_back(law.sum());
    SimParams p = params;
    p.seed = split_seed(params.seed, 0x9e3779b97f4a7c15ULL + k);
    const auto counts = sim.batch(p, probe, paths_per_probe);
    cv.mc_other.push_back(counts[5]);
    const double n = double(paths_per_probe);
    for (int l = 0; l < 5; ++l) {
      CrossRow row;
      row.probe = probe;
      row.label = l + 1;
      row.mc = double(counts[std::size_t(l)]) / n;
      row.mc_sigma = std::sqrt(row.mc * (1.0 - row.mc) / n);
      row.pde = law.p[std::size_t(l)];
      row.tolerance = 3.0 * row.mc_sigma + 0.05 * row.pde;
      row.pass = std::abs(row.mc - row.pde) <= row.tolerance;
      cv.pass = cv.pass && row.pass;
      cv.rows.push_back(row);
    }
  }
  return cv;
}

std::vector<double> global_exit_measure(const GeometryModel& model, double pitch, int k, Vec2 at,
                                        const SolveOptions& solve) {
  if (!model.has_cantor()) throw ValidationError("global exit measure needs the Cantor layout");
  if (k < 0 || k > model.depth()) throw ValidationError("global exit measure depth out of range");
  const double r0 = model.spec().r0;
  GridRecipe recipe;
  recipe.center = {0.0, 0.0};
  recipe.pitch = pitch;
  recipe.half_x = recipe.half_y = r0 + 2.0 * pitch;
  recipe.region = [r0](Vec2 p) { return norm(p) < r0; };
  recipe.absorbed_label = [k](const Word& w) { return int(w.prefix(std::size_t(k)).index()) + 1; };
  recipe.outside_label = [](Vec2) { return -1; };
  const Grid grid = build_grid(model, recipe);
  LinearSystem sys(grid);
  const std::size_t cells = std::size_t{1} << (2 * k);
  std::vector<double> out(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const GridField f = sys.solve({{int(c) + 1, 1.0}}, solve);
    out[c] = sample(grid, f, at);
  }
  return out;
}

void write_field_csv(std::ostream& os, const Grid& grid, const GridField& field) {
  os << "x,y,value\n";
  char buf[96];
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (grid.kind[n] == NodeKind::Excluded) continue;
    const Vec2 p = grid.position(n);
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.12g\n", p.x, p.y, field.values[n]);
    os << buf;
  }
}

}  // namespace frbm
