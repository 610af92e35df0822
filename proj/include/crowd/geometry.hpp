#ifndef CROWD_GEOMETRY_HPP
#define CROWD_GEOMETRY_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "crowd/field.hpp"

namespace crowd {

// Thrown for malformed scenario input (bad dimensions, bad config values).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical update leaves its admissible range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Straight line segment in the plane; used for the exit.
struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;

  double length() const { return (b - a).norm(); }
};

// Euclidean distance from p to the closest point of s.
double point_segment_distance(const Eigen::Vector2d& p, const Segment& s);

struct Corridor {
  double width_m = 0.9;
  double length_m = 9.6;
  double exit_width_m = 0.9;
  double cell_size_m = 0.3;

  double area() const { return width_m * length_m; }
};

struct GridIndexing {
  int nx = 0;
  int ny = 0;
  std::vector<Cell> exit_cells;
  std::vector<Cell> wall_cells;  // boundary cells that are not exit cells
  std::vector<Cell> measurement_cells;
};

// A discretized corridor: the grid, its cell partition and the exit segment.
// Immutable after build_corridor returns.
struct CorridorGrid {
  Corridor corridor;
  Grid grid;
  GridIndexing index;
  Segment exit;
  Mask exit_mask;

  double cell_area() const { return grid.h * grid.h; }
  double measurement_area() const {
    return static_cast<double>(index.measurement_cells.size()) * cell_area();
  }
  bool is_exit(Cell c) const { return exit_mask(c.j, c.i); }
};

// Human-readable description of how the measurement square is approximated.
inline constexpr const char* kMeasurementAreaNote =
    "3x3 cell block starting 2 cells from the exit row (0.8x0.8 m at 0.5 m "
    "approximated on the cell grid)";

// Builds the grid for a corridor with the exit centered on the short side
// y = 0. Throws ConfigError naming the offending dimension when the sizes
// are not multiples of the cell size or the exit cannot be centered.
CorridorGrid build_corridor(double width_m, double length_m, double exit_width_m,
                            double cell_size_m);
CorridorGrid build_corridor(const Corridor& c);

// Persons per square meter when every cell holds one agent.
double max_packing_density(double cell_size_m);

}  // namespace crowd

#endif  // CROWD_GEOMETRY_HPP
