#ifndef CROWD_RIEMANN_HPP
#define CROWD_RIEMANN_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace crowd::riemann {

// Flux of the inviscid 1D model, j(rho) = -rho (1 - rho); mass moves toward
// the exit at x = 0.
template <typename Scalar>
Scalar flux(Scalar rho) {
  return rho * rho - rho;
}

template <typename Scalar>
Scalar flux_derivative(Scalar rho) {
  return Scalar(2) * rho - Scalar(1);
}

// Godunov flux for the convex flux above.
template <typename Scalar>
Scalar godunov_flux(Scalar a, Scalar b) {
  if (a <= b) {
    if (a <= Scalar(0.5) && Scalar(0.5) <= b) return Scalar(-0.25);
    return std::min(flux(a), flux(b));
  }
  return std::max(flux(a), flux(b));
}

enum class Regime { constant, boundary_shock, rarefaction_subhalf, rarefaction_superhalf };

const char* to_string(Regime r);

struct Problem {
  double rho0 = 0.5;
  double L = 1.0;
  double p_ex = 0.5;
};

// Throws ConfigError unless 0 < rho0 < 1, L > 0 and 0 < p_ex <= 1.
void validate(const Problem& p);

struct Event {
  double t = 0.0;
  double x = 0.0;
  std::string kind;
};

struct Solution {
  Problem problem;
  Regime regime = Regime::constant;
  double rho_bar = 0.0;      // boundary trace
  std::vector<Event> events;  // ordered by time; the last one is the exit
  double exit_time = 0.0;
  bool near_interface = false;  // input within 1e-12 of a regime boundary
};

// Regime of the entropy solution. Inputs on an interface line go to the
// constant regime.
Regime classify(const Problem& p);

Solution solve(const Problem& p);

// Entropy solution at (x, t), x >= 0, t >= 0. At a shock the left limit is
// returned.
double evaluate(const Solution& s, double x, double t);

// Discontinuity present at time t, with the speed taken from the closed-form
// path (not from the jump condition).
struct Shock {
  std::string name;
  double x = 0.0;
  double speed = 0.0;
  double left = 0.0;
  double right = 0.0;
};
std::vector<Shock> shocks_at(const Solution& s, double t);

double rankine_hugoniot_residual(const Shock& s);
bool lax_admissible(const Shock& s, double tol = 1e-12);

// Admissible boundary traces for the relaxed exit condition.
bool in_relaxed_set(double trace, double p_ex, double tol = 1e-12);

// Midpoint rule on [0, L] with n points.
double mass(const Solution& s, double t, int n = 10000);

struct GodunovResult {
  double dx = 0.0;
  double t = 0.0;
  std::vector<double> rho;        // cell averages at time t
  std::vector<double> times;      // mass history
  std::vector<double> masses;
  double depletion_time = -1.0;   // first time mass < threshold * initial
};

// First-order Godunov scheme on [0, L] with a ghost cell at 1 - p_ex on the
// exit side and 0 on the far side. Throws ConfigError for n_cells < 10 or a
// CFL number outside (0, 1].
GodunovResult godunov_oracle(const Problem& p, int n_cells, double t_end, double cfl = 0.9,
                             double depletion_threshold = 1e-4);

// L1 distance between a Godunov profile and the exact solution.
double l1_error(const Solution& s, const GodunovResult& g);

// Exit times, rows indexed by rho0, columns by p_ex.
Eigen::MatrixXd exit_time_map(const std::vector<double>& p_ex, const std::vector<double>& rho0,
                              double L);

}  // namespace crowd::riemann

#endif  // CROWD_RIEMANN_HPP
