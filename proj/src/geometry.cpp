#include "crowd/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace crowd {

namespace {

int conforming_count(double extent, double h, const char* name) {
  if (!(extent > 0.0)) {
    throw ConfigError(std::string(name) + " must be positive");
  }
  const double ratio = extent / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError(std::string(name) + " = " + std::to_string(extent) +
                      " is not a multiple of cell_size_m = " + std::to_string(h));
  }
  return static_cast<int>(rounded);
}

}  // namespace

double point_segment_distance(const Eigen::Vector2d& p, const Segment& s) {
  const Eigen::Vector2d d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

CorridorGrid build_corridor(double width_m, double length_m, double exit_width_m,
                            double cell_size_m) {
  if (!(cell_size_m > 0.0)) throw ConfigError("cell_size_m must be positive");
  const int nx = conforming_count(width_m, cell_size_m, "width_m");
  const int ny = conforming_count(length_m, cell_size_m, "length_m");
  const int nexit = conforming_count(exit_width_m, cell_size_m, "exit_width_m");
  if (nexit > nx) throw ConfigError("exit_width_m exceeds width_m");
  if ((nx - nexit) % 2 != 0) {
    throw ConfigError("exit_width_m cannot be centered: width_m and exit_width_m "
                      "differ by an odd number of cells");
  }

  CorridorGrid out;
  out.corridor = {width_m, length_m, exit_width_m, cell_size_m};
  out.grid = {nx, ny, cell_size_m};
  out.index.nx = nx;
  out.index.ny = ny;
  out.exit_mask = Mask::Constant(ny, nx, false);

  const int first_exit = (nx - nexit) / 2;
  for (int i = first_exit; i < first_exit + nexit; ++i) {
    out.index.exit_cells.push_back({i, 0});
    out.exit_mask(0, i) = true;
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const bool boundary = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
      if (boundary && !out.exit_mask(j, i)) out.index.wall_cells.push_back({i, j});
    }
  }

  const int rows = std::min(3, ny);
  const int row0 = std::min(2, ny - rows);
  const int cols = std::min(3, nx);
  const int col0 = (nx - cols) / 2;
  for (int j = row0; j < row0 + rows; ++j) {
    for (int i = col0; i < col0 + cols; ++i) out.index.measurement_cells.push_back({i, j});
  }

  const double half = 0.5 * exit_width_m;
  const double mid = 0.5 * width_m;
  out.exit = {{mid - half, 0.0}, {mid + half, 0.0}};
  return out;
}

CorridorGrid build_corridor(const Corridor& c) {
  return build_corridor(c.width_m, c.length_m, c.exit_width_m, c.cell_size_m);
}

double max_packing_density(double cell_size_m) {
  if (!(cell_size_m > 0.0)) throw ConfigError("cell_size_m must be positive");
  return 1.0 / (cell_size_m * cell_size_m);
}

}  // namespace crowd
