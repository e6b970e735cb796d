#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hopflab/hopf.hpp"

using namespace hopflab;
using namespace hopflab::hopf;

namespace {

const Geometry& geom() {
  static const Geometry g;
  return g;
}

void require_all(const VerificationReport& rep) {
  for (auto& c : rep.checks) {
    INFO(c.name << ": " << c.witness);
    CHECK(c.pass);
  }
}

}  // namespace

TEST_CASE("frame structure equations") { require_all(verify_frames(geom())); }

TEST_CASE("corrupted structure equation is caught and named") {
  auto rep = verify_frames(geom(), "dbar_minus_alpha1");
  int bad = 0;
  for (auto& c : rep.checks)
    if (!c.pass) {
      ++bad;
      CHECK(c.name == "dbar_minus_alpha1");
      CHECK(!c.witness.empty());
    }
  CHECK(bad == 1);
}

TEST_CASE("shared metric, torsion, and calibration identities") {
  require_all(verify_hermitian_pair(geom()));
}

TEST_CASE("generalized complex pair reconstruction") { require_all(verify_gk(geom())); }

TEST_CASE("Bismut connections and bracket flatness") { require_all(verify_bismut(geom())); }
