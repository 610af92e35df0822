#include "crowd/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace crowd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_open(const Grid& g, const Mask& open, int i, int j) {
  return g.contains(i, j) && open(j, i);
}

double neighbor_value(const Grid& g, const Mask& open, const ScalarField& phi, int i,
                      int j) {
  return is_open(g, open, i, j) ? phi(j, i) : kInf;
}

// Local Godunov solution of max(phi - a, 0)^2 + max(phi - b, 0)^2 = f^2.
double godunov_update(double a, double b, double f) {
  if (a == kInf && b == kInf) return kInf;
  if (std::abs(a - b) >= f) return std::min(a, b) + f;
  const double d = a - b;
  return 0.5 * (a + b + std::sqrt(2.0 * f * f - d * d));
}

double local_update(const Grid& g, const Mask& open, const ScalarField& phi,
                    const ScalarField& rhs, int i, int j) {
  const double a = std::min(neighbor_value(g, open, phi, i - 1, j),
                            neighbor_value(g, open, phi, i + 1, j));
  const double b = std::min(neighbor_value(g, open, phi, i, j - 1),
                            neighbor_value(g, open, phi, i, j + 1));
  return godunov_update(a, b, rhs(j, i) * g.h);
}

Mask source_mask(const Grid& g, std::span<const Source> sources) {
  Mask m = Mask::Constant(g.ny, g.nx, false);
  for (const auto& s : sources) m(s.cell.j, s.cell.i) = true;
  return m;
}

void check_shape(const Grid& g, const Mask& open) {
  if (open.rows() != g.ny || open.cols() != g.nx) {
    throw std::invalid_argument("mask shape does not match grid");
  }
}

}  // namespace

const char* to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::distance: return "distance";
    case PotentialKind::eikonal: return "eikonal";
    case PotentialKind::laplace: return "laplace";
    case PotentialKind::hughes: return "hughes";
  }
  return "unknown";
}

PotentialField distance_potential(const Grid& grid, const Segment& exit) {
  if (exit.length() <= 0.0) throw ConfigError("exit segment is empty");
  PotentialField out;
  out.kind = PotentialKind::distance;
  out.values = grid.zeros();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      out.values(j, i) = point_segment_distance(grid.center({i, j}), exit);
    }
  }
  return out;
}

PotentialField eikonal_fast_sweeping(const Grid& grid, const Mask& open,
                                     std::span<const Source> sources,
                                     const ScalarField& rhs, const SolverOptions& opts) {
  check_shape(grid, open);
  PotentialField out;
  out.kind = PotentialKind::eikonal;
  out.values = ScalarField::Constant(grid.ny, grid.nx, kInf);
  const Mask fixed = source_mask(grid, sources);
  for (const auto& s : sources) out.values(s.cell.j, s.cell.i) = s.value;

  ScalarField& phi = out.values;
  const int nx = grid.nx;
  const int ny = grid.ny;
  // The four sweep orderings: (+i,+j), (-i,+j), (-i,-j), (+i,-j).
  const int dirs[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

  double round_change = kInf;
  int sweeps = 0;
  while (sweeps < opts.max_iterations) {
    const auto& d = dirs[sweeps % 4];
    if (sweeps % 4 == 0) round_change = 0.0;
    for (int jj = 0; jj < ny; ++jj) {
      const int j = d[1] > 0 ? jj : ny - 1 - jj;
      for (int ii = 0; ii < nx; ++ii) {
        const int i = d[0] > 0 ? ii : nx - 1 - ii;
        if (!open(j, i) || fixed(j, i)) continue;
        const double cand = local_update(grid, open, phi, rhs, i, j);
        if (cand < phi(j, i)) {
          round_change = std::max(round_change, phi(j, i) - cand);
          phi(j, i) = cand;
        }
      }
    }
    ++sweeps;
    // Converged once a full round of the four orderings changes nothing.
    if (sweeps % 4 == 0 && round_change < opts.tol) break;
  }
  out.iterations = sweeps;
  out.residual = round_change;
  out.converged = round_change < opts.tol;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (open(j, i) && phi(j, i) == kInf) out.converged = false;
    }
  }
  return out;
}

ScalarField eikonal_residual(const Grid& grid, const Mask& open,
                             std::span<const Source> sources, const ScalarField& phi,
                             const ScalarField& rhs) {
  const Mask fixed = source_mask(grid, sources);
  ScalarField res = grid.zeros();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!open(j, i) || fixed(j, i)) continue;
      res(j, i) = std::abs(phi(j, i) - local_update(grid, open, phi, rhs, i, j));
    }
  }
  return res;
}

PotentialField laplace_potential(const Grid& grid, const Mask& open,
                                 std::span<const Source> dirichlet,
                                 const SolverOptions& opts) {
  check_shape(grid, open);
  if (dirichlet.empty()) throw ConfigError("laplace_potential needs Dirichlet data");
  PotentialField out;
  out.kind = PotentialKind::laplace;
  const Mask fixed = source_mask(grid, dirichlet);
  double mean = 0.0;
  for (const auto& s : dirichlet) mean += s.value;
  mean /= static_cast<double>(dirichlet.size());
  out.values = grid.constant(mean);
  for (const auto& s : dirichlet) out.values(s.cell.j, s.cell.i) = s.value;

  double omega = opts.sor_omega;
  if (omega <= 0.0) {
    const int n = std::max(grid.nx, grid.ny);
    omega = 2.0 / (1.0 + std::sin(std::numbers::pi / std::max(n, 2)));
  }

  ScalarField& phi = out.values;
  auto average = [&](int i, int j, double& avg) {
    double sum = 0.0;
    int k = 0;
    const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : off) {
      if (is_open(grid, open, i + o[0], j + o[1])) {
        sum += phi(j + o[1], i + o[0]);
        ++k;
      }
    }
    if (k == 0) return false;
    avg = sum / k;
    return true;
  };

  int iter = 0;
  double residual = kInf;
  for (; iter < opts.max_iterations; ++iter) {
    for (int colour = 0; colour < 2; ++colour) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = (j + colour) % 2; i < grid.nx; i += 2) {
          if (!open(j, i) || fixed(j, i)) continue;
          double avg;
          if (average(i, j, avg)) phi(j, i) += omega * (avg - phi(j, i));
        }
      }
    }
    residual = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        if (!open(j, i) || fixed(j, i)) continue;
        double avg;
        if (average(i, j, avg)) residual = std::max(residual, std::abs(avg - phi(j, i)));
      }
    }
    if (residual < opts.tol) {
      ++iter;
      break;
    }
  }
  out.iterations = iter;
  out.residual = residual;
  out.converged = residual < opts.tol;
  double peak = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (open(j, i)) peak = std::max(peak, std::abs(phi(j, i)));
    }
  }
  out.degenerate = peak <= 1e-12;
  return out;
}

ScalarField hughes_rhs(const ScalarField& density, double clamp) {
  return (1.0 - density.min(1.0 - clamp).max(0.0)).inverse();
}

std::vector<Source> exit_sources(const CorridorGrid& cg, const ScalarField& rhs) {
  std::vector<Source> out;
  const Grid& g = cg.grid;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Cell c{i, j};
      const double d = point_segment_distance(g.center(c), cg.exit);
      if (cg.is_exit(c) || d <= kExactSeedRadius) out.push_back({c, rhs(j, i) * d});
    }
  }
  return out;
}

PotentialField corridor_distance(const CorridorGrid& cg) {
  return distance_potential(cg.grid, cg.exit);
}

PotentialField corridor_eikonal(const CorridorGrid& cg, const SolverOptions& opts) {
  const ScalarField rhs = cg.grid.constant(1.0);
  const auto src = exit_sources(cg, rhs);
  return eikonal_fast_sweeping(cg.grid, cg.grid.all_open(), src, rhs, opts);
}

PotentialField corridor_laplace(const CorridorGrid& cg, const SolverOptions& opts) {
  std::vector<Source> data;
  for (const Cell& c : cg.index.exit_cells) {
    data.push_back({c, point_segment_distance(cg.grid.center(c), cg.exit)});
  }
  for (const Cell& c : cg.index.wall_cells) {
    data.push_back({c, point_segment_distance(cg.grid.center(c), cg.exit)});
  }
  return laplace_potential(cg.grid, cg.grid.all_open(), data, opts);
}

PotentialField hughes_potential(const CorridorGrid& cg, const ScalarField& density,
                                double clamp, const SolverOptions& opts) {
  const ScalarField rhs = hughes_rhs(density, clamp);
  const auto src = exit_sources(cg, rhs);
  PotentialField out = eikonal_fast_sweeping(cg.grid, cg.grid.all_open(), src, rhs, opts);
  out.kind = PotentialKind::hughes;
  return out;
}

Eigen::Vector2d descent_direction(const Grid& grid, const Mask& open,
                                  const ScalarField& phi, Cell c) {
  auto derivative = [&](int di, int dj) {
    const bool fwd = is_open(grid, open, c.i + di, c.j + dj);
    const bool bwd = is_open(grid, open, c.i - di, c.j - dj);
    const double mid = phi(c.j, c.i);
    if (fwd && bwd) {
      return (phi(c.j + dj, c.i + di) - phi(c.j - dj, c.i - di)) / (2.0 * grid.h);
    }
    if (fwd) return (phi(c.j + dj, c.i + di) - mid) / grid.h;
    if (bwd) return (mid - phi(c.j - dj, c.i - di)) / grid.h;
    return 0.0;
  };
  Eigen::Vector2d g(derivative(1, 0), derivative(0, 1));
  const double n = g.norm();
  if (n == 0.0 || !std::isfinite(n)) return Eigen::Vector2d::Zero();
  return -g / n;
}

namespace {

ObstacleScene make_room(const char* name, double h) {
  ObstacleScene s;
  s.name = name;
  const double width = 6.0;
  const double length = 6.0;
  const double exit_width = 1.0;
  s.grid = {static_cast<int>(std::lround(width / h)),
            static_cast<int>(std::lround(length / h)), h};
  s.open = s.grid.all_open();
  s.exit = {{0.5 * (width - exit_width), 0.0}, {0.5 * (width + exit_width), 0.0}};
  return s;
}

void close_box(ObstacleScene& s, double x0, double x1, double y0, double y1) {
  for (int j = 0; j < s.grid.ny; ++j) {
    for (int i = 0; i < s.grid.nx; ++i) {
      const Eigen::Vector2d p = s.grid.center({i, j});
      if (p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1) s.open(j, i) = false;
    }
  }
}

void finish_scene(ObstacleScene& s, double y_front) {
  const Grid& g = s.grid;
  for (int i = 0; i < g.nx; ++i) {
    const Eigen::Vector2d p = g.center({i, 0});
    if (p.x() > s.exit.a.x() && p.x() < s.exit.b.x()) {
      s.exit_sources.push_back({{i, 0}, point_segment_distance(p, s.exit)});
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const bool boundary = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
      if (boundary && s.open(j, i)) {
        s.boundary_data.push_back({{i, j}, point_segment_distance(g.center({i, j}), s.exit)});
      }
      const Eigen::Vector2d p = g.center({i, j});
      if (!boundary && s.open(j, i) && p.y() > 0.3 && p.y() < y_front &&
          std::abs(p.x() - 3.0) < 1.5) {
        s.compare_region.push_back({i, j});
      }
    }
  }
}

}  // namespace

ObstacleScene make_convex_obstacle_scene(double h) {
  ObstacleScene s = make_room("convex", h);
  close_box(s, 2.4, 3.6, 2.0, 3.0);
  s.probe = {s.grid.nx / 2, static_cast<int>(std::lround(1.5 / h))};
  finish_scene(s, 1.9);
  return s;
}

ObstacleScene make_u_obstacle_scene(double h) {
  ObstacleScene s = make_room("u_shape", h);
  // Bottom bar faces the exit, the opening faces away from it.
  close_box(s, 1.8, 4.2, 2.0, 2.3);
  close_box(s, 1.8, 2.1, 2.0, 4.0);
  close_box(s, 3.9, 4.2, 2.0, 4.0);
  s.probe = {s.grid.nx / 2, static_cast<int>(std::floor(3.75 / h))};
  finish_scene(s, 1.9);
  return s;
}

ObstacleReport compare_potentials(const ObstacleScene& scene, const SolverOptions& opts) {
  ObstacleReport r;
  const ScalarField rhs = scene.grid.constant(1.0);
  r.eikonal = eikonal_fast_sweeping(scene.grid, scene.open, scene.exit_sources, rhs, opts);
  r.laplace = laplace_potential(scene.grid, scene.open, scene.boundary_data, opts);
  double sum = 0.0;
  for (const Cell& c : scene.compare_region) {
    const auto de = descent_direction(scene.grid, scene.open, r.eikonal.values, c);
    const auto dl = descent_direction(scene.grid, scene.open, r.laplace.values, c);
    sum += de.dot(dl);
  }
  if (!scene.compare_region.empty()) {
    r.mean_cosine = sum / static_cast<double>(scene.compare_region.size());
  }
  r.probe_eikonal_y =
      descent_direction(scene.grid, scene.open, r.eikonal.values, scene.probe).y();
  r.probe_laplace_y =
      descent_direction(scene.grid, scene.open, r.laplace.values, scene.probe).y();
  return r;
}

}  // namespace crowd
