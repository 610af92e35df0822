#ifndef CROWD_POTENTIAL_HPP
#define CROWD_POTENTIAL_HPP

#include <span>
#include <string>
#include <vector>

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"

namespace crowd {

enum class PotentialKind { distance, eikonal, laplace, hughes };

const char* to_string(PotentialKind kind);

// Potential phi on a grid, in meters. Descent directions of phi point toward
// the exit.
struct PotentialField {
  ScalarField values;
  PotentialKind kind = PotentialKind::distance;
  bool converged = true;
  bool degenerate = false;
  int iterations = 0;
  double residual = 0.0;
};

// Fixed boundary value on one cell.
struct Source {
  Cell cell;
  double value = 0.0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 10000;
  double sor_omega = 0.0;  // <= 0 picks the optimal value for the grid
};

// Exact Euclidean distance of every cell center to the segment.
PotentialField distance_potential(const Grid& grid, const Segment& exit);

// Godunov upwind fast sweeping for |grad phi| = rhs with phi fixed at the
// sources. Closed cells stay at +infinity and are never updated. Cells not
// connected to a source keep the initial large value; converged is then false.
PotentialField eikonal_fast_sweeping(const Grid& grid, const Mask& open,
                                     std::span<const Source> sources,
                                     const ScalarField& rhs,
                                     const SolverOptions& opts = {});

// Residual of the discrete upwind equation at every open, non-source cell.
ScalarField eikonal_residual(const Grid& grid, const Mask& open,
                             std::span<const Source> sources, const ScalarField& phi,
                             const ScalarField& rhs);

// 5-point Laplacian with Dirichlet values at the given cells and homogeneous
// Neumann conditions toward closed or off-grid neighbors. Red-black SOR
// (omega = 1 is plain red-black Gauss-Seidel).
PotentialField laplace_potential(const Grid& grid, const Mask& open,
                                 std::span<const Source> dirichlet,
                                 const SolverOptions& opts = {});

// Hughes cost: rhs = 1 / (1 - min(rho, 1 - clamp)).
inline constexpr double kHughesClamp = 1e-3;
ScalarField hughes_rhs(const ScalarField& density, double clamp = kHughesClamp);

// Corridor helpers. Exit cells and every cell within kExactSeedRadius of the
// exit segment are seeded with their (rhs-weighted) distance to it; a fixed
// seed radius removes the endpoint singularity and restores first-order
// convergence.
inline constexpr double kExactSeedRadius = 0.3;  // m
std::vector<Source> exit_sources(const CorridorGrid& cg, const ScalarField& rhs);
PotentialField corridor_distance(const CorridorGrid& cg);
PotentialField corridor_eikonal(const CorridorGrid& cg, const SolverOptions& opts = {});
PotentialField corridor_laplace(const CorridorGrid& cg, const SolverOptions& opts = {});
PotentialField hughes_potential(const CorridorGrid& cg, const ScalarField& density,
                                double clamp = kHughesClamp,
                                const SolverOptions& opts = {});

// Unit vector along -grad phi at a cell (zero where the gradient vanishes).
// Central differences, one-sided next to closed or off-grid cells.
Eigen::Vector2d descent_direction(const Grid& grid, const Mask& open,
                                  const ScalarField& phi, Cell c);

// Room with an obstacle in front of a centered exit, used to compare eikonal
// and Laplace potentials.
struct ObstacleScene {
  std::string name;
  Grid grid;
  Mask open;
  Segment exit;
  std::vector<Source> exit_sources;   // eikonal data
  std::vector<Source> boundary_data;  // Laplace Dirichlet data on the outer walls
  std::vector<Cell> compare_region;   // open cells between exit and obstacle
  Cell probe;                         // inside the cavity mouth (U scene only)
};

ObstacleScene make_convex_obstacle_scene(double h = 0.1);
ObstacleScene make_u_obstacle_scene(double h = 0.1);

struct ObstacleReport {
  PotentialField eikonal;
  PotentialField laplace;
  double mean_cosine = 0.0;     // over compare_region
  double probe_eikonal_y = 0.0;  // y-component of eikonal descent at the probe
  double probe_laplace_y = 0.0;
};

ObstacleReport compare_potentials(const ObstacleScene& scene,
                                  const SolverOptions& opts = {});

}  // namespace crowd

#endif  // CROWD_POTENTIAL_HPP
