#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "frbm/measure.hpp"

using namespace frbm;

namespace {

EmpiricalMeasure from_counts(int depth, const std::vector<std::pair<const char*, std::uint64_t>>& cells) {
  EmpiricalMeasure m = EmpiricalMeasure::zeros(depth);
  for (const auto& [w, c] : cells) {
    m.counts[Word::parse(w).index()] = c;
    m.paths += c;
  }
  return m;
}

EmpiricalMeasure uniform(int depth, std::uint64_t per_cell) {
  EmpiricalMeasure m = EmpiricalMeasure::zeros(depth);
  for (auto& c : m.counts) c = per_cell;
  m.paths = per_cell * m.counts.size();
  return m;
}

// -sum p ln p, written out independently of the library.
double shannon(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace

TEST_CASE("coarsen") {
  const EmpiricalMeasure m = from_counts(2, {{"11", 3}, {"12", 1}, {"21", 4}});
  const EmpiricalMeasure c1 = coarsen(m, 1);
  CHECK(c1.counts == std::vector<std::uint64_t>{4, 4, 0, 0});
  const EmpiricalMeasure c0 = coarsen(m, 0);
  REQUIRE(c0.cells() == 1);
  CHECK(c0.probabilities()[0] == 1.0);
  CHECK(coarsen(uniform(2, 7), 1).counts == uniform(1, 28).counts);
  CHECK_THROWS_AS(coarsen(m, 3), ValidationError);

  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const auto q = coarsen(p, 2, 1);
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == 0.0);
}

TEST_CASE("entropy dimension") {
  const double ref = std::log(4.0) / std::log(2.5);
  CHECK(ref == doctest::Approx(1.5129).epsilon(1e-4));

  const DimensionReport u = entropy_dimension(uniform(3, 5), 0.4);
  REQUIRE(u.rows.size() == 3);
  for (const auto& r : u.rows) CHECK(r.dimension == doctest::Approx(ref).epsilon(1e-12));
  CHECK(u.slope == doctest::Approx(ref).epsilon(1e-12));
  CHECK(u.reference == doctest::Approx(ref).epsilon(1e-15));

  const DimensionReport point = entropy_dimension(from_counts(2, {{"23", 10}}), 0.4);
  for (const auto& r : point.rows) CHECK(r.dimension == doctest::Approx(0.0));

  // Uniform on the words over {1, 2}.
  const DimensionReport half = entropy_dimension(from_counts(2, {{"11", 1}, {"12", 1}, {"21", 1}, {"22", 1}}), 0.4);
  for (const auto& r : half.rows) CHECK(r.dimension == doctest::Approx(std::log(2.0) / std::log(2.5)).epsilon(1e-12));
  CHECK(std::log(2.0) / std::log(2.5) == doctest::Approx(0.7565).epsilon(1e-4));

  CHECK_THROWS_AS(entropy_dimension(EmpiricalMeasure::zeros(2), 0.4), ValidationError);

  const DimensionReport boot = entropy_dimension(from_counts(1, {{"1", 30}, {"2", 20}, {"3", 25}, {"4", 25}}), 0.4, 200);
  CHECK(boot.rows[0].half_width > 0.0);
  const DimensionReport again = entropy_dimension(from_counts(1, {{"1", 30}, {"2", 20}, {"3", 25}, {"4", 25}}), 0.4, 200);
  CHECK(boot.rows[0].half_width == again.rows[0].half_width);
}

TEST_CASE("entropy never decreases under refinement") {
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(64);
    for (auto& x : p) x = (gen() % 3 == 0) ? 0.0 : e(gen);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (s == 0.0) continue;
    for (auto& x : p) x /= s;
    double prev = -1.0;
    for (int k = 0; k <= 3; ++k) {
      const double h = entropy(coarsen(p, 3, k));
      CHECK(h >= prev - 1e-12);
      CHECK(h == doctest::Approx(shannon(coarsen(p, 3, k))).epsilon(1e-12));
      prev = h;
    }
    const DimensionReport d = entropy_dimension(p, 3, 0.4);
    for (const auto& r : d.rows) {
      CHECK(r.dimension >= 0.0);
      CHECK(r.dimension <= 2.0);
    }
  }
}

TEST_CASE("uniformity statistics") {
  const UniformityStats u = uniformity_stats(uniform(2, 9));
  CHECK(u.ratio == 1.0);
  CHECK(u.tv_distance == doctest::Approx(0.0));
  CHECK(u.epsilon_hat == doctest::Approx(0.0));

  const UniformityStats h = uniformity_stats({0.5, 0.5, 0.0, 0.0}, 1);
  CHECK(std::isinf(h.ratio));
  CHECK(h.tv_distance == doctest::Approx(0.5));

  const UniformityStats r = uniformity_stats({0.2, 0.3, 0.2, 0.3}, 1);
  CHECK(r.ratio == doctest::Approx(1.5));
  CHECK(r.epsilon_hat == doctest::Approx(std::pow(1.5, 0.5) - 1.0));
  CHECK(r.tv_distance == doctest::Approx(0.1));

  const Band b = ratio_band(from_counts(1, {{"1", 2600}, {"2", 2400}, {"3", 2500}, {"4", 2500}}), 300, 7);
  CHECK(b.lo <= b.estimate);
  CHECK(b.estimate <= b.hi);
  CHECK(b.estimate == doctest::Approx(2600.0 / 2400.0));
}

TEST_CASE("exponential tail recovers its rate") {
  std::mt19937_64 gen(13);
  const double rate = 0.7;
  std::exponential_distribution<double> e(rate);
  std::vector<double> taus(20000);
  for (auto& t : taus) t = e(gen);
  const TauStats s = TauStats::from_samples(taus, 0);
  const TailFit f = tau_tail_fit(s, s.q50);
  CHECK_FALSE(f.degenerate);
  CHECK(f.rate == doctest::Approx(rate).epsilon(0.05));
  CHECK(f.r_squared > 0.99);
  CHECK(f.survival_factor < 1.0);
  CHECK(f.survival_factor == doctest::Approx(std::exp(-rate * s.q50)).epsilon(0.05));

  const TailFit flat = tau_tail_fit(TauStats::from_samples(std::vector<double>(2000, 1.0), 0), 1.0);
  CHECK(flat.degenerate);

  CHECK_THROWS_AS(tau_tail_fit(TauStats::from_samples(std::vector<double>(999, 1.0), 0), 1.0), ValidationError);
  CHECK_THROWS_AS(tau_tail_fit(s, 0.0), ValidationError);
}

TEST_CASE("tau summary") {
  const TauStats s = TauStats::from_samples({4.0, 1.0, 3.0, 2.0}, 1);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.censored == 1);
  CHECK(s.censored_fraction == doctest::Approx(0.2));
  CHECK(s.q50 >= 2.0);
  CHECK(s.q50 <= 3.0);
}

TEST_CASE("renewal product measure") {
  const double ln25 = std::log(2.5);
  const RenewalEstimate u = renewal_product_measure({0.25, 0.25, 0.25, 0.25}, 3, 0.4);
  CHECK(u.dimension == doctest::Approx(std::log(4.0) / ln25).epsilon(1e-12));
  CHECK(u.measure.p.size() == 64);
  CHECK(std::accumulate(u.measure.p.begin(), u.measure.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> law{0.3, 0.3, 0.2, 0.2};
  const RenewalEstimate r = renewal_product_measure(law, 2, 0.4);
  const double h = -(0.6 * std::log(0.3) + 0.4 * std::log(0.2));
  CHECK(r.entropy == doctest::Approx(h).epsilon(1e-12));
  CHECK(r.entropy == doctest::Approx(1.366159).epsilon(1e-6));
  CHECK(r.dimension == doctest::Approx(h / ln25).epsilon(1e-12));
  CHECK(r.dimension == doctest::Approx(1.490967).epsilon(1e-6));
  // Product structure: p(w) = law[w1] * law[w2].
  CHECK(r.measure.p[Word::parse("13").index()] == doctest::Approx(0.06));
  // Entropy of a product measure is additive.
  CHECK(shannon(r.measure.p) == doctest::Approx(2.0 * h).epsilon(1e-12));

  CHECK_THROWS_AS(renewal_product_measure({0.3, 0.3, 0.3, 0.3}, 2, 0.4), ValidationError);
}

TEST_CASE("total variation") {
  CHECK(tv_distance({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(tv_distance({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(tv_distance({1.0}, {0.5, 0.5}), ValidationError);
}

TEST_CASE("box counting") {
  const double a = 0.4;
  std::vector<Vec2> centers;
  for (std::uint64_t i = 0; i < 256; ++i) centers.push_back(square_center(Word::from_index(i, 4), a));
  const double ref = std::log(4.0) / std::log(1.0 / a);
  CHECK(cell_box_counting_dim(uniform(4, 1), a) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(cell_box_counting_dim(from_counts(3, {{"111", 1}}), a) == doctest::Approx(0.0));
  const auto support = support_points(uniform(2, 1), a);
  CHECK(support.size() == 16);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> line;
  for (int k = 0; k < 1000; ++k) {
    const double t = u(gen);
    line.push_back({0.1 + 0.7 * t, 0.2 + 0.5 * t});
  }
  CHECK(box_counting_dim(line, {0.2, 0.1, 0.05, 0.025, 0.0125}) == doctest::Approx(1.0).epsilon(0.05));

  CHECK_THROWS_AS(box_counting_dim(std::vector<Vec2>(5, Vec2{0.3, 0.3}), {0.1, 0.01}), ValidationError);
  CHECK_THROWS_AS(box_counting_dim(line, {0.1}), ValidationError);
  CHECK(box_counting_dim({Vec2{0.3, 0.3}}, {0.1, 0.01}) == doctest::Approx(0.0));
}

TEST_CASE("measure invariants") {
  EmpiricalMeasure m = from_counts(1, {{"1", 3}, {"4", 1}});
  m.paths += 2;
  m.censored = 2;
  CHECK(m.absorbed() == 4);
  const auto p = m.probabilities();
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  EmpiricalMeasure n = from_counts(1, {{"2", 5}});
  m.merge(n);
  CHECK(m.counts[1] == 5);
  CHECK(m.paths == 11);
  CHECK(EmpiricalMeasure::zeros(2).probabilities() == std::vector<double>(16, 0.0));
  CHECK_THROWS_AS(m.merge(EmpiricalMeasure::zeros(2)), ValidationError);
}
