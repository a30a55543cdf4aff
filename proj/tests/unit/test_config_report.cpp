#include "doctest.h"

#include "frbm/config.hpp"
#include "frbm/report.hpp"

using namespace frbm;

namespace {

const char* kSample = R"(; sample run
[run]
mode = compare
b_sweep = 0.4, 0.2,0.1

[geometry]
alpha = 0.4
b = 0.1
ell = 1.1
n_gen = 2
relax_gap = true

[sim]
h0 = 5e-4
seed = 0x10
start = 0.0, -0.7
n_paths = 123

[analysis]
depths = 1, 2
monitor = 2

[oracle]
pitch = 0.00390625
solver = cg
probes = 0, 0; 0.3, -0.1
)";

}  // namespace

TEST_CASE("config parse") {
  const ExperimentConfig c = parse_config(kSample);
  CHECK(c.mode == "compare");
  CHECK(c.b_sweep == std::vector<double>{0.4, 0.2, 0.1});
  CHECK(c.geometry.n_gen == 2);
  CHECK(c.sim.h0 == 5e-4);
  CHECK(c.sim.seed == 16);
  CHECK(c.sim.start == Vec2{0.0, -0.7});
  CHECK(c.n_paths == 123);
  CHECK(c.analysis.depths == std::vector<int>{1, 2});
  CHECK(c.analysis.monitor == "2");
  CHECK(c.oracle.solver == SolverKind::ConjugateGradient);
  REQUIRE(c.oracle.probes.size() == 2);
  CHECK(c.oracle.probes[1] == Vec2{0.3, -0.1});
}

TEST_CASE("config round trip is idempotent") {
  const std::string once = serialize_config(parse_config(kSample));
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
  const ExperimentConfig c = parse_config(once);
  CHECK(c.sim.start == Vec2{0.0, -0.7});
  CHECK(c.oracle.grid.pitch == 0.00390625);

  ExperimentConfig d;
  d.geometry.relax_gap = true;
  d.geometry.b = 0.1;
  d.sim.h0 = 0.1 + 0.2;  // not exactly representable as a short decimal
  const ExperimentConfig back = parse_config(serialize_config(d));
  CHECK(back.sim.h0 == d.sim.h0);
}

TEST_CASE("config rejects unknown and malformed input") {
  CHECK_THROWS_WITH_AS(parse_config("[sim]\nhzero = 1\n"), doctest::Contains("[sim] hzero"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[simulation]\nh0 = 1\n"), doctest::Contains("simulation"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[sim]\nh0 = fast\n"), doctest::Contains("[sim] h0"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[sim]\nstart = 1\n"), doctest::Contains("[sim] start"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[run]\nmode = paint\n"), doctest::Contains("mode"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[oracle]\nsolver = magic\n"), doctest::Contains("solver"), ValidationError);
  CHECK_THROWS_AS(parse_config("[sim]\nc = 2\n"), ValidationError);
  // 1 / (2 * 0.45) < 1.3
  CHECK_THROWS_WITH_AS(parse_config("[geometry]\nalpha = 0.45\nell = 1.3\n"), doctest::Contains("disjointness"),
                       ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/frbm.ini"), ValidationError);
}

TEST_CASE("config overrides") {
  const ExperimentConfig c = parse_config("[geometry]\nb = 0.1\n", ConfigOverrides{42, true});
  CHECK(c.geometry.relax_gap);
  CHECK(c.sim.seed == 42);
  CHECK_THROWS_AS(parse_config("[geometry]\nb = 0.1\n"), ValidationError);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("content hash tracks every byte and name") {
  const std::vector<Artifact> base{{"a.csv", "1,2\n"}, {"b.csv", "x"}};
  const std::string h = content_hash(base);
  CHECK(h.size() == 40);
  CHECK(content_hash({{"b.csv", "x"}, {"a.csv", "1,2\n"}}) == h);
  CHECK(content_hash({{"a.csv", "1,3\n"}, {"b.csv", "x"}}) != h);
  CHECK(content_hash({{"a.csv", "1,2\n"}, {"c.csv", "x"}}) != h);
  CHECK(content_hash({{"a.csv", "1,2\n"}}) != h);
}

TEST_CASE("report bundle") {
  ExperimentConfig c;
  c.geometry.relax_gap = true;
  c.geometry.b = 0.1;
  const auto doc = report_bundle(c, {{"measure.csv", "word,count,probability\n"}}, {});
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["dimension"].is_array());
  CHECK(doc["dimension"].empty());
  CHECK(doc["uniformity"].empty());
  CHECK(doc["artifacts"].size() == 1);
  CHECK(doc["config"] == serialize_config(c));
  CHECK_THROWS_AS(report_bundle(c, {}, {}), ValidationError);

  ReportSections sec;
  sec.uniformity.push_back(to_json(uniformity_stats({0.5, 0.5, 0.0, 0.0}, 1)));
  const auto with = report_bundle(c, {{"x", "y"}}, sec);
  CHECK(with["uniformity"][0]["ratio"] == "inf");
}
