#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "frbm/geometry.hpp"
#include "frbm/word.hpp"

namespace frbm {

// Cylinder-cell counts at one depth. Cell i is Word::from_index(i, depth).
// Invariant: sum(counts) == paths - censored - excluded.
struct EmpiricalMeasure {
  int depth = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t paths = 0;
  std::uint64_t censored = 0;
  std::uint64_t excluded = 0;  // aborted or absorbed off K

  static EmpiricalMeasure zeros(int depth);

  std::uint64_t absorbed() const;
  std::size_t cells() const { return counts.size(); }
  // Normalized cell probabilities; all zero when nothing was absorbed.
  std::vector<double> probabilities() const;
  void merge(const EmpiricalMeasure& other);
};

// Probability-weighted measure (synthetic) with weights summing to 1.
struct WeightedMeasure {
  int depth = 0;
  std::vector<double> p;
};

EmpiricalMeasure coarsen(const EmpiricalMeasure& m, int k);
std::vector<double> coarsen(const std::vector<double>& p, int depth, int k);

// Shannon entropy in nats with 0 ln 0 = 0.
double entropy(const std::vector<double>& p);

struct DimensionRow {
  int k = 0;
  double entropy = 0.0;
  double dimension = 0.0;    // H_k / (k ln(1/alpha))
  double half_width = 0.0;   // bootstrap 95% half-width
};

struct DimensionReport {
  double alpha = 0.0;
  std::vector<DimensionRow> rows;
  double slope = 0.0;         // LS slope of H_k against k ln(1/alpha), k = 0..n
  double slope_half_width = 0.0;
  double box_dimension = 0.0; // box counting of the support
  double reference = 0.0;     // ln 4 / ln(1/alpha)
};

// Rows and slope; bootstrap half-widths stay zero unless bootstrap > 0.
DimensionReport entropy_dimension(const EmpiricalMeasure& m, double alpha, int bootstrap = 0,
                                  std::uint64_t seed = 0x5eed);
DimensionReport entropy_dimension(const std::vector<double>& p, int depth, double alpha);

struct UniformityStats {
  int depth = 0;
  double ratio = 1.0;        // max/min cell probability, +inf if a cell is empty
  double tv_distance = 0.0;  // to the uniform law
  double chi_square = 0.0;
  double p_value = 1.0;
  double epsilon_hat = 0.0;  // ratio^(1/(2n)) - 1
};

UniformityStats uniformity_stats(const EmpiricalMeasure& m);
UniformityStats uniformity_stats(const std::vector<double>& p, int depth);

// Bootstrap band for the uniformity ratio r_n (multinomial resampling).
struct Band {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
Band ratio_band(const EmpiricalMeasure& m, int resamples, std::uint64_t seed);

struct TauStats {
  std::vector<double> taus;  // uncensored absorption times, in path order
  std::uint64_t censored = 0;
  double mean = 0.0;
  double q10 = 0.0, q50 = 0.0, q90 = 0.0, q99 = 0.0;
  double censored_fraction = 0.0;

  static TauStats from_samples(std::vector<double> taus, std::uint64_t censored);
};

struct TailFit {
  double s = 0.0;
  double rate = 0.0;            // lambda-hat with P(tau >= n s) ~ exp(-rate n s)
  double survival_factor = 1.0; // exp(-rate s): per-s decay
  double r_squared = 0.0;
  double censored_share = 0.0;
  int points = 0;
  bool degenerate = false;
  std::vector<std::pair<int, double>> survival;  // (n, P(tau >= n s))
};

inline constexpr std::size_t kTailMinRecords = 1000;
inline constexpr std::size_t kTailMinSurvivors = 30;

// Throws ValidationError when fewer than kTailMinRecords uncensored samples or s <= 0.
TailFit tau_tail_fit(const TauStats& stats, double s);

struct RenewalEstimate {
  WeightedMeasure measure;
  double entropy = 0.0;    // H(p-hat)
  double dimension = 0.0;  // H(p-hat) / ln(1/alpha)
};

// Product measure p^{(x)n} over depth-n words.
RenewalEstimate renewal_product_measure(const std::vector<double>& digit_law, int depth, double alpha);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

// Box counting: slope of ln N(delta) against ln(1/delta). Throws on < 2 scales
// or identical points.
double box_counting_dim(const std::vector<Vec2>& points, const std::vector<double>& scales);
// Centers of the cells with positive counts.
std::vector<Vec2> support_points(const EmpiricalMeasure& m, double alpha);
// Box counting on the cylinder partition: N(alpha^k) = number of depth-k cells
// carrying mass, k = 0..depth.
double cell_box_counting_dim(const EmpiricalMeasure& m, double alpha);

}  // namespace frbm
