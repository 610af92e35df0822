#include <doctest.h>

#include "crowd/geometry.hpp"

using namespace crowd;

TEST_CASE("narrow corridor grid") {
  const CorridorGrid cg = build_corridor(0.9, 9.6, 0.9, 0.3);
  CHECK(cg.grid.nx == 3);
  CHECK(cg.grid.ny == 32);
  CHECK(cg.index.exit_cells.size() == 3);
  for (const Cell& c : cg.index.exit_cells) CHECK(c.j == 0);
}

TEST_CASE("medium corridor has a centered three-cell exit") {
  const CorridorGrid cg = build_corridor(3.3, 9.6, 0.9, 0.3);
  CHECK(cg.grid.nx == 11);
  CHECK(cg.grid.ny == 32);
  REQUIRE(cg.index.exit_cells.size() == 3);
  int lo = 100, hi = -1;
  for (const Cell& c : cg.index.exit_cells) {
    lo = std::min(lo, c.i);
    hi = std::max(hi, c.i);
  }
  CHECK(lo == 4);
  CHECK(hi == 6);
  CHECK(cg.is_exit({5, 0}));
  CHECK_FALSE(cg.is_exit({5, 1}));
}

TEST_CASE("single-cell corridor") {
  const CorridorGrid cg = build_corridor(0.3, 0.3, 0.3, 0.3);
  CHECK(cg.grid.nx == 1);
  CHECK(cg.grid.ny == 1);
  CHECK(cg.index.exit_cells.size() == 1);
}

TEST_CASE("measurement cells lie inside the grid") {
  const CorridorGrid cg = build_corridor(5.7, 9.6, 0.9, 0.3);
  CHECK_FALSE(cg.index.measurement_cells.empty());
  for (const Cell& c : cg.index.measurement_cells) CHECK(cg.grid.contains(c));
  CHECK(cg.measurement_area() > 0.0);
}

TEST_CASE("non-conforming dimensions name the offending field") {
  auto message = [](auto&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([] { build_corridor(1.0, 9.6, 0.9, 0.3); }).find("width") != std::string::npos);
  CHECK(message([] { build_corridor(0.9, 9.5, 0.9, 0.3); }).find("length") != std::string::npos);
  CHECK(message([] { build_corridor(0.9, 9.6, 1.2, 0.3); }).find("exit") != std::string::npos);
  CHECK_THROWS_AS(build_corridor(0.9, 9.6, 0.9, 0.0), ConfigError);
  CHECK_THROWS_AS(build_corridor(-0.9, 9.6, 0.9, 0.3), ConfigError);
  // An even exit cannot be centered in an odd-width corridor.
  CHECK_THROWS_AS(build_corridor(0.9, 9.6, 0.6, 0.3), ConfigError);
}

TEST_CASE("packing density") {
  CHECK(max_packing_density(0.3) == doctest::Approx(100.0 / 9.0).epsilon(1e-14));
  CHECK(max_packing_density(1.0) == 1.0);
  CHECK(max_packing_density(0.5) == 4.0);
  CHECK_THROWS_AS(max_packing_density(0.0), ConfigError);
}

TEST_CASE("point to segment distance") {
  const Segment s{{-0.45, 0.0}, {0.45, 0.0}};
  CHECK(point_segment_distance({0.0, 1.5}, s) == doctest::Approx(1.5));
  CHECK(point_segment_distance({1.65, 0.75}, s) ==
        doctest::Approx(std::sqrt(1.2 * 1.2 + 0.75 * 0.75)));
  CHECK(point_segment_distance({0.2, 0.0}, s) == doctest::Approx(0.0));
}
