#include "frbm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "frbm/errors.hpp"

namespace frbm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t cells_at(int depth) { return std::size_t{1} << (2 * depth); }

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double ss_y = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.ss_y = syy;
  f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * double(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - double(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

// Multinomial resample of `counts` with the same total.
std::vector<std::uint64_t> resample(const std::vector<std::uint64_t>& counts, std::mt19937_64& gen) {
  std::uint64_t remaining = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  std::uint64_t mass_left = remaining;
  std::vector<std::uint64_t> out(counts.size(), 0);
  for (std::size_t i = 0; i < counts.size() && remaining > 0; ++i) {
    if (counts[i] == 0) continue;
    if (counts[i] == mass_left) {
      out[i] = remaining;
      remaining = 0;
      break;
    }
    const double p = double(counts[i]) / double(mass_left);
    std::binomial_distribution<std::uint64_t> bin(remaining, p);
    out[i] = bin(gen);
    remaining -= out[i];
    mass_left -= counts[i];
  }
  return out;
}

std::vector<double> normalize(const std::vector<std::uint64_t>& counts) {
  const double total = double(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  std::vector<double> p(counts.size(), 0.0);
  if (total <= 0.0) return p;
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = double(counts[i]) / total;
  return p;
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::zeros(int depth) {
  EmpiricalMeasure m;
  m.depth = depth;
  m.counts.assign(cells_at(depth), 0);
  return m;
}

std::uint64_t EmpiricalMeasure::absorbed() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<double> EmpiricalMeasure::probabilities() const { return normalize(counts); }

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
  if (other.depth != depth) throw ValidationError("cannot merge measures of different depth");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  paths += other.paths;
  censored += other.censored;
  excluded += other.excluded;
}

EmpiricalMeasure coarsen(const EmpiricalMeasure& m, int k) {
  if (k < 0 || k > m.depth) {
    throw ValidationError("coarsen: target depth " + std::to_string(k) + " exceeds measure depth " +
                          std::to_string(m.depth));
  }
  EmpiricalMeasure out = EmpiricalMeasure::zeros(k);
  out.paths = m.paths;
  out.censored = m.censored;
  out.excluded = m.excluded;
  const int shift = 2 * (m.depth - k);
  for (std::size_t i = 0; i < m.counts.size(); ++i) out.counts[i >> shift] += m.counts[i];
  return out;
}

std::vector<double> coarsen(const std::vector<double>& p, int depth, int k) {
  if (k < 0 || k > depth) throw ValidationError("coarsen: target depth exceeds measure depth");
  std::vector<double> out(cells_at(k), 0.0);
  const int shift = 2 * (depth - k);
  for (std::size_t i = 0; i < p.size(); ++i) out[i >> shift] += p[i];
  return out;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

DimensionReport entropy_dimension(const std::vector<double>& p, int depth, double alpha) {
  if (depth < 1) throw ValidationError("entropy_dimension: depth must be at least 1");
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("entropy_dimension: empty measure");
  DimensionReport rep;
  rep.alpha = alpha;
  const double scale = std::log(1.0 / alpha);
  rep.reference = std::log(4.0) / scale;
  std::vector<double> xs{0.0}, hs{0.0};
  std::vector<double> occupied{1.0};
  for (int k = 1; k <= depth; ++k) {
    const auto pk = coarsen(p, depth, k);
    DimensionRow row;
    row.k = k;
    row.entropy = entropy(pk);
    row.dimension = row.entropy / (k * scale);
    rep.rows.push_back(row);
    xs.push_back(k * scale);
    hs.push_back(row.entropy);
    occupied.push_back(double(std::count_if(pk.begin(), pk.end(), [](double v) { return v > 0.0; })));
  }
  rep.slope = least_squares(xs, hs).slope;
  std::vector<double> logn;
  for (double n : occupied) logn.push_back(std::log(n));
  rep.box_dimension = least_squares(xs, logn).slope;
  return rep;
}

DimensionReport entropy_dimension(const EmpiricalMeasure& m, double alpha, int bootstrap, std::uint64_t seed) {
  if (m.absorbed() == 0) throw ValidationError("entropy_dimension: measure has no absorbed paths");
  DimensionReport rep = entropy_dimension(m.probabilities(), m.depth, alpha);
  if (bootstrap > 0) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<double>> dims(rep.rows.size());
    std::vector<double> slopes;
    for (int b = 0; b < bootstrap; ++b) {
      const auto r = entropy_dimension(normalize(resample(m.counts, gen)), m.depth, alpha);
      for (std::size_t i = 0; i < r.rows.size(); ++i) dims[i].push_back(r.rows[i].dimension);
      slopes.push_back(r.slope);
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
      std::sort(dims[i].begin(), dims[i].end());
      rep.rows[i].half_width = (quantile_sorted(dims[i], 0.975) - quantile_sorted(dims[i], 0.025)) / 2.0;
    }
    std::sort(slopes.begin(), slopes.end());
    rep.slope_half_width = (quantile_sorted(slopes, 0.975) - quantile_sorted(slopes, 0.025)) / 2.0;
  }
  return rep;
}

UniformityStats uniformity_stats(const std::vector<double>& p, int depth) {
  UniformityStats s;
  s.depth = depth;
  const double u = 1.0 / double(p.size());
  const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
  s.ratio = *mn > 0.0 ? *mx / *mn : kInf;
  for (double v : p) s.tv_distance += std::abs(v - u);
  s.tv_distance /= 2.0;
  s.epsilon_hat = (depth > 0 && std::isfinite(s.ratio)) ? std::pow(s.ratio, 1.0 / (2.0 * depth)) - 1.0
                  : (depth > 0 ? kInf : 0.0);
  s.chi_square = std::numeric_limits<double>::quiet_NaN();
  s.p_value = std::numeric_limits<double>::quiet_NaN();
  return s;
}

UniformityStats uniformity_stats(const EmpiricalMeasure& m) {
  UniformityStats s = uniformity_stats(m.probabilities(), m.depth);
  const double total = double(m.absorbed());
  if (total > 0.0 && m.counts.size() > 1) {
    const double expected = total / double(m.counts.size());
    double chi = 0.0;
    for (auto c : m.counts) chi += (double(c) - expected) * (double(c) - expected) / expected;
    s.chi_square = chi;
    const double dof = double(m.counts.size() - 1);
    s.p_value = boost::math::gamma_q(dof / 2.0, chi / 2.0);
  } else {
    s.chi_square = 0.0;
    s.p_value = 1.0;
  }
  return s;
}

Band ratio_band(const EmpiricalMeasure& m, int resamples, std::uint64_t seed) {
  Band band;
  band.estimate = uniformity_stats(m).ratio;
  std::mt19937_64 gen(seed);
  std::vector<double> rs;
  for (int b = 0; b < resamples; ++b) {
    const auto p = normalize(resample(m.counts, gen));
    rs.push_back(uniformity_stats(p, m.depth).ratio);
  }
  std::sort(rs.begin(), rs.end());
  band.lo = quantile_sorted(rs, 0.025);
  band.hi = quantile_sorted(rs, 0.975);
  return band;
}

TauStats TauStats::from_samples(std::vector<double> taus, std::uint64_t censored) {
  TauStats s;
  s.censored = censored;
  const std::size_t total = taus.size() + censored;
  s.censored_fraction = total ? double(censored) / double(total) : 0.0;
  if (!taus.empty()) {
    s.mean = std::accumulate(taus.begin(), taus.end(), 0.0) / double(taus.size());
    auto sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    s.q10 = quantile_sorted(sorted, 0.10);
    s.q50 = quantile_sorted(sorted, 0.50);
    s.q90 = quantile_sorted(sorted, 0.90);
    s.q99 = quantile_sorted(sorted, 0.99);
  }
  s.taus = std::move(taus);
  return s;
}

TailFit tau_tail_fit(const TauStats& stats, double s) {
  if (!(s > 0.0)) throw ValidationError("tau_tail_fit: s must be positive");
  if (stats.taus.size() < kTailMinRecords) {
    throw ValidationError("tau_tail_fit: insufficient data (" + std::to_string(stats.taus.size()) +
                          " uncensored records, need " + std::to_string(kTailMinRecords) + ")");
  }
  TailFit fit;
  fit.s = s;
  const double total = double(stats.taus.size() + stats.censored);
  fit.censored_share = double(stats.censored) / total;
  auto sorted = stats.taus;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs, ys;
  for (int n = 0;; ++n) {
    const double thr = n * s;
    const auto survivors = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), thr)) +
                           static_cast<std::size_t>(stats.censored);
    if (survivors < kTailMinSurvivors) break;
    const double prob = double(survivors) / total;
    fit.survival.emplace_back(n, prob);
    xs.push_back(double(n));
    ys.push_back(std::log(prob));
    if (n > 100000) break;
  }
  fit.points = static_cast<int>(xs.size());
  if (xs.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const LineFit lf = least_squares(xs, ys);
  if (lf.ss_y <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.rate = -lf.slope / s;
  fit.survival_factor = std::exp(lf.slope);
  fit.r_squared = lf.r_squared;
  return fit;
}

RenewalEstimate renewal_product_measure(const std::vector<double>& digit_law, int depth, double alpha) {
  if (digit_law.size() != 4) throw ValidationError("renewal_product_measure: digit law must have 4 entries");
  double sum = 0.0;
  for (double v : digit_law) {
    if (!(v >= 0.0)) throw ValidationError("renewal_product_measure: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("renewal_product_measure: digit law not normalized (sum " + std::to_string(sum) + ")");
  }
  RenewalEstimate est;
  est.measure.depth = depth;
  est.measure.p.assign(cells_at(depth), 1.0);
  for (std::size_t i = 0; i < est.measure.p.size(); ++i) {
    std::size_t idx = i;
    double prob = 1.0;
    for (int k = 0; k < depth; ++k) {
      prob *= digit_law[idx & 3];
      idx >>= 2;
    }
    est.measure.p[i] = prob;
  }
  est.entropy = entropy(digit_law);
  est.dimension = est.entropy / std::log(1.0 / alpha);
  return est;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ValidationError("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2.0;
}

double box_counting_dim(const std::vector<Vec2>& points, const std::vector<double>& scales) {
  if (scales.size() < 2) throw ValidationError("box_counting_dim: need at least 2 scales");
  if (points.empty()) throw ValidationError("box_counting_dim: no points");
  if (points.size() == 1) return 0.0;
  double x0 = points[0].x, y0 = points[0].y, x1 = x0, y1 = y0;
  for (const auto& p : points) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  if (x0 == x1 && y0 == y1) throw ValidationError("box_counting_dim: all points identical");
  std::vector<double> xs, ys;
  for (double delta : scales) {
    if (!(delta > 0.0)) throw ValidationError("box_counting_dim: scales must be positive");
    // Minimal count over a 4x4 family of grid offsets.
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (int ox = 0; ox < 4; ++ox) {
      for (int oy = 0; oy < 4; ++oy) {
        std::set<std::pair<long long, long long>> boxes;
        for (const auto& p : points) {
          boxes.emplace(static_cast<long long>(std::floor((p.x - x0) / delta + ox / 4.0)),
                        static_cast<long long>(std::floor((p.y - y0) / delta + oy / 4.0)));
        }
        best = std::min(best, boxes.size());
      }
    }
    xs.push_back(std::log(1.0 / delta));
    ys.push_back(std::log(double(best)));
  }
  return least_squares(xs, ys).slope;
}

std::vector<Vec2> support_points(const EmpiricalMeasure& m, double alpha) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    if (m.counts[i] > 0) pts.push_back(square_center(Word::from_index(i, m.depth), alpha));
  }
  return pts;
}

double cell_box_counting_dim(const EmpiricalMeasure& m, double alpha) {
  if (m.depth < 1) throw ValidationError("cell_box_counting_dim: depth must be at least 1");
  if (m.absorbed() == 0) throw ValidationError("cell_box_counting_dim: empty support");
  std::vector<double> xs, ys;
  for (int k = 0; k <= m.depth; ++k) {
    const auto c = coarsen(m, k);
    const auto n = std::count_if(c.counts.begin(), c.counts.end(), [](auto v) { return v > 0; });
    xs.push_back(k * std::log(1.0 / alpha));
    ys.push_back(std::log(double(n)));
  }
  return least_squares(xs, ys).slope;
}

}  // namespace frbm
