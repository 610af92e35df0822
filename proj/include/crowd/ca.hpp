#ifndef CROWD_CA_HPP
#define CROWD_CA_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowd/geometry.hpp"
#include "crowd/potential.hpp"
#include "crowd/rng.hpp"

namespace crowd::ca {

// How agents in exit cells leave. queue: every agent in an exit cell takes
// part in one lottery per step, weighted by its leave rate, and the winner
// exits with the per-step exit probability; agents that do not exit follow
// their sampled option. sampled: only agents that sampled the leave option
// take part.
enum class ExitRule { queue, sampled };

const char* to_string(ExitRule rule);
ExitRule exit_rule_from_string(const std::string& name);

struct SimParams {
  double beta = 3.84;   // 1/m
  double mu = 1.0;      // motivation, <= 1
  double p_ex = 1.15;   // persons/s
  double dt = 0.08;     // s
  double gamma = 0.0;   // pushing probability
  std::uint64_t seed = 1;
  int n_agents = 0;
  long step_cap = 1'000'000;
  ExitRule exit_rule = ExitRule::queue;

  // Exit probability per step, p_ex * dt capped at 1.
  double exit_probability() const;
  bool exit_probability_capped() const { return p_ex * dt > 1.0; }
  // Total move probability 1 / (3 - mu); the rest is the stay probability.
  double move_probability() const { return 1.0 / (3.0 - mu); }
};

// Throws ConfigError on out-of-range parameters.
void validate(const SimParams& p);

// Moore directions. Index d and 7 - d are opposite; 3 and 4 are the 1D
// left/right moves.
inline constexpr std::array<std::array<int, 2>, 8> kDirections = {{
    {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
inline constexpr int kLeft = 3;
inline constexpr int kRight = 4;
constexpr int opposite(int d) { return 7 - d; }

// Cell topology plus potential drops phi(c) - phi(neighbor) per direction.
// The corridor and the 1D test lattices share this representation.
struct Lattice {
  int n_cells = 0;
  std::vector<std::array<int, 8>> neighbor;   // -1: wall or off-grid
  std::vector<std::array<double, 8>> drop;
  std::vector<char> exit;                     // may leave the domain
  std::vector<double> leave_drop;             // drop toward the point past the door

  int next(int c, int d) const {
    const int n = neighbor[c][d];
    return n < 0 ? -1 : neighbor[n][d];
  }
};

// 2D Moore lattice on the corridor grid. The leave option of an exit cell
// continues the potential one cell past the door: drop = h.
Lattice corridor_lattice(const CorridorGrid& cg, const ScalarField& phi);
// 1D segment of cells with potential phi (n cells, exit at cell 0 when
// with_exit is set).
Lattice line_lattice(const std::vector<double>& phi, double h, bool with_exit);
// 1D ring with a constant drop per cell toward the left.
Lattice ring_lattice(int n_cells, double drop_left);

struct Rates {
  std::array<double, 8> move{};
  double leave = 0.0;
  double stay = 1.0;

  double total_move() const;
};

// Transition rates of one cell. Weights exp(beta * drop) over the admissible
// options (in-domain neighbors and, at exit cells, the leave option) share
// the move probability 1 / (3 - mu); walls get rate 0.
Rates transition_rates(const Lattice& lat, int cell, const SimParams& p);

// Rates for every cell of a lattice.
std::vector<Rates> rate_table(const Lattice& lat, const SimParams& p);

inline constexpr int kStay = -1;
inline constexpr int kLeave = 8;

struct State {
  std::vector<int> occupant;    // per cell, agent id or -1
  std::vector<int> agent_cell;  // per agent id, cell or -1 once exited
  int present = 0;
  int exited = 0;
  long step = 0;

  static State empty(int n_cells);
  void place(int agent, int cell);
};

// Sampled intention of one agent for one step.
struct Intent {
  int agent = 0;
  int option = kStay;  // 0..7 direction, kLeave, or kStay
  double rate = 0.0;   // rate of the sampled option
  bool push = false;
};

struct StepEvents {
  int moves = 0;
  int pushes = 0;
  int conflicts = 0;
  int exits = 0;
  long displacement_left = 0;  // net moves along direction kLeft (1D diagnostics)
};

// Samples one option per present agent, in agent-id order. With gamma > 0,
// an option toward an occupied cell whose continuation is free becomes a push
// attempt with probability gamma; otherwise it is blocked.
std::vector<Intent> sample_intents(const State& s, const Lattice& lat,
                                   const std::vector<Rates>& rates, double gamma,
                                   Rng& rng);

// Applies intents against the pre-step occupancy. The exit lottery runs
// first. Then contenders for one cell are resolved proportionally to their
// rates, in ascending cell order; losers stay. A won push is carried out only
// if the pushed agent neither won its own option nor was pushed already.
StepEvents resolve_intents(State& s, const Lattice& lat, const std::vector<Rates>& rates,
                           const std::vector<Intent>& intents, double exit_probability,
                           ExitRule rule, Rng& rng);

StepEvents step_parallel(State& s, const Lattice& lat, const std::vector<Rates>& rates,
                         const SimParams& p, Rng& rng);
StepEvents step_parallel_pushing(State& s, const Lattice& lat,
                                 const std::vector<Rates>& rates, const SimParams& p,
                                 Rng& rng);

// Uniform placement without replacement.
State random_placement(int n_cells, int n_agents, Rng& rng);

struct RunStatistics {
  double exit_time_s = 0.0;
  long steps = 0;  // step of the last departure
  bool complete = true;
  std::vector<int> measurement_counts;  // occupied measurement cells per step
  std::vector<double> density_series;   // persons/m^2 per step
  double max_density = 0.0;
};

// One run from uniform random placement until the corridor is empty or the
// step cap is hit. Throws ConfigError if n_agents exceeds the cell count.
RunStatistics run_to_exit(const CorridorGrid& cg, const SimParams& p,
                          const PotentialField& phi, std::uint64_t run_index = 0);
RunStatistics run_to_exit(const CorridorGrid& cg, const Lattice& lat,
                          const std::vector<Rates>& rates, const SimParams& p, Rng& rng,
                          bool pushing = false);

// Steps until a single agent started at `start` has left the lattice, or -1
// at the step cap.
long single_agent_steps(const Lattice& lat, const std::vector<Rates>& rates,
                        const SimParams& p, int start, Rng& rng);

struct Histogram {
  double bin_width = 1.0;
  double origin = 0.0;
  std::vector<long> counts;
};

struct EnsembleStatistics {
  int n_runs = 0;
  int incomplete_runs = 0;
  double mean_exit_time = 0.0;
  double std_exit_time = 0.0;
  std::vector<double> exit_times;  // per run, run-index order
  Histogram exit_histogram;
  double mean_run_max_density = 0.0;  // mean of per-run maxima
  // Ensemble-mean measurement density per step and its peak.
  std::vector<double> mean_density_series;
  double peak_mean_density = 0.0;
  double peak_mean_density_se = 0.0;
  long peak_step = 0;
  ScalarField max_density_map;  // per cell max over steps of mean occupancy, p/m^2
};

struct MonteCarloOptions {
  int n_runs = 500;
  int threads = 1;
  double histogram_bin = 1.0;
  bool pushing = false;
  bool density_map = true;
};

// Runs are seeded from (p.seed, run index); the result does not depend on
// the thread count.
EnsembleStatistics monte_carlo(const CorridorGrid& cg, const SimParams& p,
                               const PotentialField& phi, const MonteCarloOptions& opts);

// Number of modes of a histogram after a centered moving average.
int count_modes(const std::vector<long>& counts, int window, double min_fraction = 0.05);

// Per-cell exit loss and outgoing move rates as seen by the mean-field
// update. Under the queue rule an agent in an exit cell exits with the exit
// probability and otherwise follows its rates; under the sampled rule it
// exits with rate(leave) * exit probability.
struct MeanFieldRates {
  std::vector<std::array<double, 8>> move;
  std::vector<double> exit_loss;
};
MeanFieldRates mean_field_rates(const Lattice& lat, const std::vector<Rates>& rates,
                                double exit_probability, ExitRule rule);

// Deterministic update of occupation probabilities with size-exclusion
// factors (1 - rho) on the target cells. Exit cells additionally lose
// rho * exit_loss. Throws NumericalError if any value leaves [0, 1] by more
// than 1e-12.
Eigen::VectorXd master_equation_step(const Lattice& lat, const MeanFieldRates& r,
                                     const Eigen::VectorXd& rho);

// 1D master equation with local pushing (directions kLeft/kRight only).
// A push needs the pushed agent's neighbor cell in the same direction.
Eigen::VectorXd master_equation_step_pushing(const Lattice& lat, const MeanFieldRates& r,
                                             const Eigen::VectorXd& rho, double gamma);

// Exact occupancy distribution of a single agent (no exclusion), one step.
Eigen::VectorXd single_agent_step(const Lattice& lat, const MeanFieldRates& r,
                                  const Eigen::VectorXd& p);

// Field <-> lattice vector conversions for corridor lattices.
Eigen::VectorXd to_vector(const ScalarField& f);
ScalarField to_field(const Eigen::VectorXd& v, const Grid& g);

// Mean velocity (cells per step toward kLeft) on a ring at a given density
// (occupied fraction), with the potential dropping by drop_per_cell meters
// per cell toward kLeft.
struct VelocityEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
VelocityEstimate ring_velocity(int n_cells, double density, double drop_per_cell,
                               const SimParams& p, bool pushing, int warmup_steps,
                               int measure_steps, int n_runs);

}  // namespace crowd::ca

#endif  // CROWD_CA_HPP
