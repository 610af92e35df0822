#ifndef CROWD_CALIBRATE_HPP
#define CROWD_CALIBRATE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "crowd/ca.hpp"
#include "crowd/geometry.hpp"

namespace crowd::calibrate {

// Experimental scenario: agent count, CA corridor width and mean exit times
// for motivated (mu = 1) and less motivated agents.
struct Scenario {
  int n_agents;
  double width_m;
  double target_motivated_s;
  double target_unmotivated_s;
};

inline constexpr std::array<Scenario, 3> kScenarios = {{
    {63, 0.9, 53.0, 64.0}, {67, 3.3, 60.0, 68.0}, {57, 5.7, 55.0, 57.0}}};

inline constexpr double kCorridorLength = 9.6;
inline constexpr double kExitWidth = 0.9;
inline constexpr double kCellSize = 0.3;
inline constexpr double kSingleAgentTime = 8.0;  // s, motivated agent over the corridor
inline constexpr double kMaxSpeed = 1.2;         // m/s at mu = 1

CorridorGrid scenario_corridor(double width_m);

// Centered cell on the row farthest from the exit.
int far_start_cell(const CorridorGrid& cg);

struct NbarMeasurement {
  double mean = 0.0;
  double standard_error = 0.0;
  int incomplete = 0;
};

// Mean step count of a single agent from far_start_cell to the exit on the
// distance potential. Run r uses Rng(seed, r).
NbarMeasurement measure_nbar(const CorridorGrid& cg, const ca::SimParams& p, int n_runs);

struct NbarSample {
  double beta = 0.0;
  double nbar = 0.0;
  double standard_error = 0.0;
  double dt = 0.0;         // self-consistent step, kSingleAgentTime / nbar
  int iterations = 0;
  bool converged = false;
};

struct NbarOptions {
  double p_ex = 1.1;
  double mu = 1.0;
  int n_runs = 2000;
  std::uint64_t seed = 1;
  double dt_start = kSingleAgentTime / 64.0;
  double tolerance = 1e-6;  // relative change in dt
  int max_iterations = 50;
};

// The exit wait depends on dt, so dt = 8 s / nbar(beta, dt) is solved by
// fixed-point iteration with common random numbers.
NbarSample self_consistent_nbar(const CorridorGrid& cg, double beta, const NbarOptions& opts);

struct FitResult {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual = 0.0;  // RMS, steps
  int iterations = 0;
  bool converged = false;

  double operator()(double beta) const;
};

// Least squares for nbar = a + b / beta^c. Initial guess a = min nbar,
// b = max - min, c = 1. Throws ConfigError for fewer than 4 samples or
// repeated beta.
FitResult fit_nbar(const std::vector<double>& beta, const std::vector<double>& nbar);

inline constexpr std::array<double, 10> kNbarBetas = {0.5, 1.0, 1.5, 2.0, 3.0,
                                                     4.0, 5.0, 6.0, 8.0, 10.0};

// Fit of self_consistent_nbar over kNbarBetas with default NbarOptions,
// frozen so that simulations can derive dt without re-measuring.
FitResult reference_fit();

// Runs self_consistent_nbar at every beta and fits the samples.
struct NbarCurve {
  std::vector<NbarSample> samples;
  FitResult fit;
};
NbarCurve measure_nbar_curve(const std::vector<double>& betas, const NbarOptions& opts);

// dt = 8 s / nbar_fit(beta). Throws ConfigError if the fitted count is not
// positive.
double derive_dt(double beta, const FitResult& fit);

struct EnsembleOptions {
  int n_runs = 500;
  int threads = 1;
  std::uint64_t seed = 1;
};

struct ObjectiveResult {
  double z = 0.0;  // s
  std::array<double, 3> mean_exit{};
  std::array<double, 3> standard_error{};
  int incomplete_runs = 0;
};

// Root of the summed squared deviations from the targets.
double z_from_means(const std::array<double, 3>& means, const std::array<double, 3>& targets);

std::array<double, 3> motivated_targets();
std::array<double, 3> unmotivated_targets();

// Ensemble mean exit times over the three scenarios. Every scenario and
// every grid point uses the same master seed.
ObjectiveResult objective_z(const ca::SimParams& base, const std::array<double, 3>& targets,
                            const EnsembleOptions& opts);

struct GridSearchOptions {
  double beta_min = 0.5;
  double beta_max = 10.0;
  int beta_points = 20;
  double pex_min = 0.55;
  double pex_max = 1.65;
  int pex_points = 12;
  std::array<double, 3> targets = motivated_targets();
  EnsembleOptions ensemble;
};

struct CalibrationResult {
  std::vector<double> betas;
  std::vector<double> pexs;
  std::vector<double> dts;  // per beta
  Eigen::MatrixXd z;        // beta rows, p_ex columns
  double beta_min = 0.0;
  double pex_min = 0.0;
  double dt_min = 0.0;
  double z_min = 0.0;
  int incomplete_runs = 0;
};

// Throws ConfigError for fewer than 5 points per axis.
CalibrationResult grid_search(const FitResult& fit, const GridSearchOptions& opts);

struct Mu0Options {
  double mu_min = -5.0;
  double mu_max = 1.0;   // excluded
  double coarse_step = 0.5;
  double fine_step = 0.05;
  EnsembleOptions ensemble;
};

struct Mu0Result {
  double mu0 = 0.0;
  double z = 0.0;
  std::array<double, 3> mean_exit{};
  std::vector<double> mus;  // every evaluated mu, in evaluation order
  std::vector<double> zs;
};

// Grid search over mu in [mu_min, mu_max) against the targets, refined on a
// finer grid around the best coarse point.
Mu0Result estimate_mu0(double beta, double p_ex, double dt, const std::array<double, 3>& targets,
                       const Mu0Options& opts);

// Single-agent speed relative to the motivated maximum speed.
double implied_speed(double mu);

}  // namespace crowd::calibrate

#endif  // CROWD_CALIBRATE_HPP
