#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "frbm/config.hpp"
#include "frbm/measure.hpp"
#include "frbm/pde_oracle.hpp"
#include "frbm/rbm_sim.hpp"

namespace frbm {

inline constexpr const char* kReportSchema = "frbm.report/1";

// A named input or output file folded into the report hash.
struct Artifact {
  std::string name;
  std::string bytes;
};

// Hex SHA-1 of "blob <size>\0" + bytes, as computed by `git hash-object`.
std::string git_blob_sha1(std::string_view bytes);
// Hash over the artifacts sorted by name: SHA-1 of the lines "<blob sha1> <name>\n".
std::string content_hash(const std::vector<Artifact>& artifacts);

nlohmann::json to_json(const DimensionReport& r);
nlohmann::json to_json(const UniformityStats& s);
nlohmann::json to_json(const Band& b);
nlohmann::json to_json(const TauStats& s);
nlohmann::json to_json(const TailFit& f);
nlohmann::json to_json(const SimDiagnostics& d);
nlohmann::json to_json(const ConnectivityReport& c);
nlohmann::json to_json(const RatioRow& r);
nlohmann::json to_json(const ZetaResult& z);
nlohmann::json to_json(const CrossValidation& cv);
nlohmann::json to_json(const ShellStats& s);

// Summary sections of a report. Every member is an array, possibly empty.
struct ReportSections {
  std::vector<nlohmann::json> dimension;   // one DimensionReport per b value
  std::vector<nlohmann::json> uniformity;
  std::vector<nlohmann::json> tail;
  std::vector<nlohmann::json> simulation;
  std::vector<nlohmann::json> oracle;
  std::vector<nlohmann::json> compare;
  std::vector<nlohmann::json> contrast;
  std::vector<nlohmann::json> geometry;
};

// Merges the config echo, the content hash of the artifacts and the sections.
// Throws ValidationError when no artifact is given.
nlohmann::json report_bundle(const ExperimentConfig& config, const std::vector<Artifact>& artifacts,
                             const ReportSections& sections);

// Measure table: word,count,probability for every cell of the measure's depth.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m);
// Plot pairs: k,scale,occupied cells.
void write_box_counts_csv(std::ostream& os, const EmpiricalMeasure& m, double alpha);

}  // namespace frbm
