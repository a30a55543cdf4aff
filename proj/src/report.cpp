#include "frbm/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "frbm/errors.hpp"

namespace frbm {
namespace {

using nlohmann::json;

std::string sha1_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// JSON has no infinity; non-finite values are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json point(Vec2 p) { return json::array({p.x, p.y}); }

}  // namespace

std::string git_blob_sha1(std::string_view bytes) {
  std::string data = "blob " + std::to_string(bytes.size());
  data.push_back('\0');
  data.append(bytes);
  return sha1_hex(data);
}

std::string content_hash(const std::vector<Artifact>& artifacts) {
  std::vector<const Artifact*> sorted;
  for (const auto& a : artifacts) sorted.push_back(&a);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Artifact* a, const Artifact* b) { return a->name < b->name; });
  std::string lines;
  for (const Artifact* a : sorted) lines += git_blob_sha1(a->bytes) + " " + a->name + "\n";
  return sha1_hex(lines);
}

json to_json(const DimensionReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k},
                    {"entropy", row.entropy},
                    {"dimension", row.dimension},
                    {"half_width", row.half_width}});
  }
  return {{"alpha", r.alpha},
          {"rows", rows},
          {"slope", r.slope},
          {"slope_half_width", r.slope_half_width},
          {"box_dimension", r.box_dimension},
          {"reference", r.reference}};
}

json to_json(const UniformityStats& s) {
  return {{"depth", s.depth},           {"ratio", number(s.ratio)},   {"tv_distance", s.tv_distance},
          {"chi_square", s.chi_square}, {"p_value", s.p_value},       {"epsilon_hat", number(s.epsilon_hat)}};
}

json to_json(const Band& b) {
  return {{"estimate", number(b.estimate)}, {"lo", number(b.lo)}, {"hi", number(b.hi)}};
}

json to_json(const TauStats& s) {
  return {{"samples", s.taus.size()}, {"censored", s.censored}, {"censored_fraction", s.censored_fraction},
          {"mean", s.mean},           {"q10", s.q10},           {"q50", s.q50},
          {"q90", s.q90},             {"q99", s.q99}};
}

json to_json(const TailFit& f) {
  json survival = json::array();
  for (const auto& [n, p] : f.survival) survival.push_back({n, p});
  return {{"s", f.s},
          {"rate", f.rate},
          {"survival_factor", f.survival_factor},
          {"r_squared", f.r_squared},
          {"censored_share", f.censored_share},
          {"points", f.points},
          {"degenerate", f.degenerate},
          {"survival", survival}};
}

json to_json(const SimDiagnostics& d) {
  return {{"aborted", d.aborted},
          {"absorbed_other", d.absorbed_other},
          {"mean_reflections", d.mean_reflections},
          {"mean_steps", d.mean_steps},
          {"censoring_flagged", d.censoring_flagged}};
}

json to_json(const ConnectivityReport& c) {
  return {{"connected", c.connected},
          {"reachable_absorbers", c.reachable_absorbers},
          {"total_absorbers", c.total_absorbers},
          {"reachable_gap_count", c.reachable_gap_count},
          {"reachable_gap_openings", c.reachable_gap_openings},
          {"pitch", c.pitch}};
}

json to_json(const RatioRow& r) {
  return {{"b", r.b},
          {"sup_ratio", number(r.sup_ratio)},
          {"argmax", point(r.argmax)},
          {"ratio_at_center", number(r.ratio_at_center)},
          {"center_a", r.center_a},
          {"center_b", r.center_b},
          {"d_prime_nodes", r.d_prime_nodes},
          {"max_residual", r.max_residual}};
}

json to_json(const ZetaResult& z) {
  return {{"b", z.b},
          {"radius", z.radius},
          {"sup_d_prime", z.sup_d_prime},
          {"min_value", z.min_value},
          {"max_value", z.max_value},
          {"nodes", z.grid.size()},
          {"residual", z.field.residual}};
}

json to_json(const CrossValidation& cv) {
  json rows = json::array();
  for (const auto& r : cv.rows) {
    rows.push_back({{"probe", point(r.probe)},
                    {"label", r.label},
                    {"mc", r.mc},
                    {"mc_sigma", r.mc_sigma},
                    {"pde", r.pde},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass}});
  }
  return {{"rows", rows}, {"pde_sums", cv.pde_sums}, {"mc_other", cv.mc_other}, {"pass", cv.pass}};
}

json to_json(const ShellStats& s) {
  json by_n = json::array();
  for (std::size_t n = 0; n < s.paths_by_n.size(); ++n) {
    by_n.push_back({{"n", n}, {"paths", s.paths_by_n[n]}, {"digits", s.digit_by_n[n]}});
  }
  return by_n;
}

json report_bundle(const ExperimentConfig& config, const std::vector<Artifact>& artifacts,
                   const ReportSections& sections) {
  if (artifacts.empty()) throw ValidationError("report: no run artifact to bundle");
  json doc;
  doc["schema"] = kReportSchema;
  doc["mode"] = config.mode;
  doc["config"] = serialize_config(config);
  doc["content_hash"] = content_hash(artifacts);
  json files = json::array();
  for (const auto& a : artifacts) {
    files.push_back({{"name", a.name}, {"bytes", a.bytes.size()}, {"sha1", git_blob_sha1(a.bytes)}});
  }
  doc["artifacts"] = files;
  auto section = [](const std::vector<json>& v) { return json(v.empty() ? json::array() : json(v)); };
  doc["dimension"] = section(sections.dimension);
  doc["uniformity"] = section(sections.uniformity);
  doc["tail"] = section(sections.tail);
  doc["simulation"] = section(sections.simulation);
  doc["oracle"] = section(sections.oracle);
  doc["compare"] = section(sections.compare);
  doc["contrast"] = section(sections.contrast);
  doc["geometry"] = section(sections.geometry);
  return doc;
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m) {
  os << "word,count,probability\n";
  const auto p = m.probabilities();
  char buf[64];
  for (std::size_t i = 0; i < m.cells(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    os << Word::from_index(i, static_cast<std::size_t>(m.depth)).str() << ',' << m.counts[i] << ',' << buf << '\n';
  }
}

void write_box_counts_csv(std::ostream& os, const EmpiricalMeasure& m, double alpha) {
  os << "k,scale,occupied\n";
  char buf[64];
  for (int k = 0; k <= m.depth; ++k) {
    const EmpiricalMeasure c = coarsen(m, k);
    const auto occupied = std::count_if(c.counts.begin(), c.counts.end(), [](std::uint64_t n) { return n > 0; });
    std::snprintf(buf, sizeof buf, "%.17g", std::pow(alpha, k));
    os << k << ',' << buf << ',' << occupied << '\n';
  }
}

}  // namespace frbm
