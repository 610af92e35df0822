#ifndef CROWD_PDE_HPP
#define CROWD_PDE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "crowd/geometry.hpp"
#include "crowd/potential.hpp"

namespace crowd::pde {

enum class Variant { standard, pushing, motivated_drift };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct PdeParams {
  Variant variant = Variant::standard;
  double mu = 1.0;
  double beta = 3.84;    // 1/m
  double p_ex = 1.15;    // Robin coefficient on the exit, j.n = p_ex rho
  double gamma = 0.0;    // pushing strength, pushing variant only
  double cfl = 0.5;      // fraction of the positivity bound used per step
  double dt_max = 0.05;  // upper bound on the adaptive step, PDE time units
  // Seconds per PDE time unit, used only to label output.
  double time_scale_s = 0.0788 / 0.09;

  // Diffusion prefactor: 1/(8(3-mu)), or 1/8 for the motivated-drift variant.
  double alpha() const;
  // Drift strength entering 2*beta_eff*rho(1-rho)*grad(phi).
  double beta_eff() const;
  // Pushing strength actually used (0 unless variant == pushing).
  double gamma_eff() const;
  // Outflow per unit exit length and unit density: alpha * p_ex, since the
  // Robin condition acts on the flux before the alpha prefactor.
  double outflow_rate() const { return alpha() * p_ex; }
};

void validate(const PdeParams& p);

// Mobility m(rho) = rho (1 - rho) (1 + 2 gamma rho), split into the
// increasing factor rho (1 + 2 gamma rho) and the decreasing factor 1 - rho.
template <typename Scalar>
Scalar mobility_up(Scalar rho, Scalar gamma) {
  return rho * (Scalar(1) + Scalar(2) * gamma * rho);
}
template <typename Scalar>
Scalar mobility_down(Scalar rho) {
  return Scalar(1) - rho;
}
template <typename Scalar>
Scalar mobility(Scalar rho, Scalar gamma) {
  return mobility_up(rho, gamma) * mobility_down(rho);
}

// x log x with 0 log 0 = 0.
template <typename Scalar>
Scalar xlogx(Scalar x) {
  using std::log;
  return x > Scalar(0) ? x * log(x) : Scalar(0);
}

// Entropy density without the potential term. For gamma = 0 this is
// rho log rho + (1 - rho) log(1 - rho).
template <typename Scalar>
Scalar entropy_density(Scalar rho, Scalar gamma) {
  using std::log;
  const Scalar g2 = Scalar(2) * gamma + Scalar(1);
  const Scalar push = Scalar(2) * gamma * rho + Scalar(1);
  return (Scalar(4) * gamma + Scalar(1)) / g2 * xlogx(Scalar(1) - rho) + xlogx(rho) +
         push / g2 * log(push);
}

// Derivative of entropy_density: the entropy variable without 2 beta phi.
template <typename Scalar>
Scalar entropy_variable(Scalar rho, Scalar gamma) {
  using std::log;
  const Scalar g2 = Scalar(2) * gamma + Scalar(1);
  return log(rho) - (Scalar(4) * gamma + Scalar(1)) / g2 * log(Scalar(1) - rho) +
         Scalar(2) * gamma / g2 * log(Scalar(1) + Scalar(2) * gamma * rho);
}

// Continuous flux density j = -alpha ((1 + 4 gamma rho) grad rho
// + 2 beta rho (1 - rho)(1 + 2 gamma rho) grad phi) along one axis.
template <typename Scalar>
Scalar continuous_flux(Scalar rho, Scalar grad_rho, Scalar grad_phi, Scalar alpha,
                       Scalar beta, Scalar gamma) {
  return -alpha * ((Scalar(1) + Scalar(4) * gamma * rho) * grad_rho +
                   Scalar(2) * beta * mobility(rho, gamma) * grad_phi);
}

// Face flux from cell L to cell R (positive: mass moves from L to R) at
// spacing h. Upwinds the split mobility by the sign of the entropy-variable
// slope, so the flux never increases the entropy and never leaves [0, 1]
// under the step bound.
double face_flux(double rho_l, double rho_r, double phi_l, double phi_r, double h,
                 const PdeParams& p);

struct Snapshot {
  double t = 0.0;
  ScalarField rho;
};

struct SeriesPoint {
  double t = 0.0;       // PDE time units
  double t_s = 0.0;     // seconds via time_scale_s
  double mass = 0.0;    // persons remaining
  double measurement_density = 0.0;  // persons/m^2
  double entropy = 0.0;
};

// Explicit finite-volume stepper on a corridor grid. Walls are no-flux;
// exit cells lose outflow_rate() * rho * h through their face on the exit
// side.
class Solver {
 public:
  Solver(const CorridorGrid& cg, const PdeParams& p, ScalarField phi, bool closed = false);

  // Advances by at most dt (or the adaptive bound, whichever is smaller).
  // Returns the step taken. Throws NumericalError on a box or mass-balance
  // violation.
  double step(double dt);

  // Stable step for the current state.
  double stable_dt() const;

  const ScalarField& density() const { return rho_; }
  void set_density(const ScalarField& rho);
  const ScalarField& potential() const { return phi_; }
  void set_potential(ScalarField phi) { phi_ = std::move(phi); }
  double time() const { return t_; }
  long steps() const { return steps_; }

  // Integral of rho (scaled units, m^2).
  double mass() const;
  // Scaled mass that left through the exit in the last step.
  double last_outflow() const { return last_outflow_; }
  double entropy() const;
  // Mean rho over the measurement cells.
  double measurement_mean() const;

 private:
  const CorridorGrid* cg_;
  PdeParams p_;
  ScalarField phi_;
  ScalarField rho_;
  bool closed_;
  double t_ = 0.0;
  long steps_ = 0;
  double last_outflow_ = 0.0;
};

double entropy(const ScalarField& rho, const ScalarField& phi, double h, const PdeParams& p);

struct ScenarioOptions {
  double stop_fraction = 1e-3;   // stop when mass < stop_fraction * initial
  double t_max = 200.0;          // PDE time units
  double record_every = 0.05;    // PDE time units between series points
  double snapshot_every = 0.0;   // 0: no snapshots
  int hughes_every = 0;          // recompute a Hughes potential every k steps
  bool closed = false;           // no exit outflow; runs until t_max
};

struct ScenarioResult {
  std::vector<SeriesPoint> series;
  std::vector<Snapshot> snapshots;
  double rho0 = 0.0;
  double peak_measurement_density = 0.0;
  double peak_time = 0.0;
  long steps = 0;
  bool finished = false;  // reached the stop fraction before t_max
};

// Constant initial density n / (rho_s * area) with rho_s = 1 / h^2.
// Throws ConfigError if that exceeds 1.
ScenarioResult simulate_scenario(const CorridorGrid& cg, int n_persons, const PdeParams& p,
                                 const PotentialField& phi, const ScenarioOptions& opts = {});

// First time the measurement density reaches `level` (persons/m^2), or -1.
double time_to_reach(const std::vector<SeriesPoint>& series, double level);

}  // namespace crowd::pde

#endif  // CROWD_PDE_HPP
