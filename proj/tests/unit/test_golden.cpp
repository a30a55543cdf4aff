#include "doctest.h"

#include <fstream>
#include <sstream>

#include "frbm/geometry.hpp"

using namespace frbm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE_MESSAGE(is.good(), "missing golden file " << path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("geometry exports match the golden snapshots") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    GeometrySpec g;
    g.alpha = 0.4;
    g.b = 0.1;
    g.ell = 1.1;
    g.n_gen = n;
    g.relax_gap = true;
    const GeometryModel m = GeometryModel::build(g);
    const std::string stem = std::string(FRBM_GOLDEN_DIR) + "/geometry_n" + std::to_string(n);
    CHECK(geometry_svg(m) == slurp(stem + ".svg"));
    CHECK(geometry_json(m) == slurp(stem + ".json"));
    CHECK(geometry_svg(GeometryModel::build(g)) == geometry_svg(m));
  }
}
