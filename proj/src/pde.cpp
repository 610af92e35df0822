#include "crowd/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>

namespace crowd::pde {

namespace {

constexpr double kFloor = 1e-12;

double clamp_open(double rho) { return std::clamp(rho, kFloor, 1.0 - kFloor); }

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::pushing: return "pushing";
    case Variant::motivated_drift: return "motivated_drift";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "standard") return Variant::standard;
  if (name == "pushing") return Variant::pushing;
  if (name == "motivated_drift") return Variant::motivated_drift;
  throw ConfigError("variant must be standard, pushing or motivated_drift, got '" + name +
                    "'");
}

double PdeParams::alpha() const {
  return variant == Variant::motivated_drift ? 1.0 / 8.0 : 1.0 / (8.0 * (3.0 - mu));
}

double PdeParams::beta_eff() const {
  return variant == Variant::motivated_drift ? mu * beta : beta;
}

double PdeParams::gamma_eff() const { return variant == Variant::pushing ? gamma : 0.0; }

void validate(const PdeParams& p) {
  if (!std::isfinite(p.mu) || p.mu > 1.0) throw ConfigError("mu must be finite and <= 1");
  if (!std::isfinite(p.beta) || p.beta < 0.0) throw ConfigError("beta must be >= 0");
  if (!std::isfinite(p.p_ex) || p.p_ex < 0.0) throw ConfigError("p_ex must be >= 0");
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(p.cfl > 0.0 && p.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(p.dt_max > 0.0)) throw ConfigError("dt_max must be > 0");
  if (!(p.time_scale_s > 0.0)) throw ConfigError("time_scale_s must be > 0");
}

double face_flux(double rho_l, double rho_r, double phi_l, double phi_r, double h,
                 const PdeParams& p) {
  const double g = p.gamma_eff();
  const double lr = mobility_up(std::max(rho_l, 0.0), g) * mobility_down(std::min(rho_r, 1.0));
  const double rl = mobility_up(std::max(rho_r, 0.0), g) * mobility_down(std::min(rho_l, 1.0));
  if (lr <= 0.0 && rl <= 0.0) return 0.0;
  const double two_b = 2.0 * p.beta_eff();
  const double ul = entropy_variable(clamp_open(rho_l), g) + two_b * phi_l;
  const double ur = entropy_variable(clamp_open(rho_r), g) + two_b * phi_r;
  const double xi = (ul - ur) / h;
  return p.alpha() * (xi > 0.0 ? xi * lr : xi * rl);
}

Solver::Solver(const CorridorGrid& cg, const PdeParams& p, ScalarField phi, bool closed)
    : cg_(&cg), p_(p), phi_(std::move(phi)), closed_(closed) {
  validate(p_);
  const Grid& g = cg.grid;
  if (phi_.rows() != g.ny || phi_.cols() != g.nx) {
    throw ConfigError("potential does not match the corridor grid");
  }
  rho_ = g.zeros();
}

void Solver::set_density(const ScalarField& rho) {
  const Grid& g = cg_->grid;
  if (rho.rows() != g.ny || rho.cols() != g.nx) {
    throw ConfigError("density does not match the corridor grid");
  }
  if ((rho < 0.0).any() || (rho > 1.0).any()) throw ConfigError("density must lie in [0, 1]");
  rho_ = rho;
}

double Solver::stable_dt() const {
  const Grid& g = cg_->grid;
  const double h = g.h;
  const double two_b = 2.0 * p_.beta_eff();
  const double gam = p_.gamma_eff();
  ScalarField u(g.ny, g.nx);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      u(j, i) = entropy_variable(clamp_open(rho_(j, i)), gam) + two_b * phi_(j, i);
    }
  }
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double slope = 0.0;
      if (i > 0) slope += std::abs(u(j, i) - u(j, i - 1));
      if (i + 1 < g.nx) slope += std::abs(u(j, i) - u(j, i + 1));
      if (j > 0) slope += std::abs(u(j, i) - u(j - 1, i));
      if (j + 1 < g.ny) slope += std::abs(u(j, i) - u(j + 1, i));
      double rate = p_.alpha() * (1.0 + 2.0 * gam) * slope / (h * h);
      if (!closed_ && cg_->exit_mask(j, i)) rate += p_.outflow_rate() / h;
      if (!std::isfinite(rate)) {
        throw NumericalError("non-finite rate bound at cell (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") at t = " + std::to_string(t_));
      }
      worst = std::max(worst, rate);
    }
  }
  const double bound = worst > 0.0 ? p_.cfl / worst : p_.dt_max;
  return std::min(bound, p_.dt_max);
}

double Solver::step(double dt) {
  const Grid& g = cg_->grid;
  const double h = g.h;
  dt = std::min(dt, stable_dt());
  ScalarField div = g.zeros();  // net outflow per unit length
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double f = face_flux(rho_(j, i), rho_(j, i + 1), phi_(j, i), phi_(j, i + 1), h, p_);
      div(j, i) += f;
      div(j, i + 1) -= f;
    }
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double f = face_flux(rho_(j, i), rho_(j + 1, i), phi_(j, i), phi_(j + 1, i), h, p_);
      div(j, i) += f;
      div(j + 1, i) -= f;
    }
  }
  double outflow = 0.0;
  if (!closed_) {
    for (const Cell& c : cg_->index.exit_cells) {
      const double f = p_.outflow_rate() * rho_(c.j, c.i);
      div(c.j, c.i) += f;
      outflow += f * h * dt;
    }
  }
  const double before = mass();
  rho_ -= (dt / h) * div;
  const double after = mass();

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double r = rho_(j, i);
      if (!(r >= -1e-10 && r <= 1.0 + 1e-10)) {
        throw NumericalError("density " + std::to_string(r) + " at cell (" +
                             std::to_string(i) + ", " + std::to_string(j) + ") left [0, 1] after step " +
                             std::to_string(steps_ + 1) + " with dt = " + std::to_string(dt) +
                             " (stable bound " + std::to_string(stable_dt()) + ")");
      }
    }
  }
  const double residual = std::abs((before - after) - outflow);
  if (residual > 1e-10 * std::max(1.0, before)) {
    throw NumericalError("mass balance residual " + std::to_string(residual) + " at step " +
                         std::to_string(steps_ + 1));
  }
  last_outflow_ = outflow;
  t_ += dt;
  ++steps_;
  return dt;
}

double Solver::mass() const { return rho_.sum() * cg_->grid.h * cg_->grid.h; }

double Solver::entropy() const { return pde::entropy(rho_, phi_, cg_->grid.h, p_); }

double Solver::measurement_mean() const {
  double acc = 0.0;
  for (const Cell& c : cg_->index.measurement_cells) acc += rho_(c.j, c.i);
  return acc / static_cast<double>(cg_->index.measurement_cells.size());
}

double entropy(const ScalarField& rho, const ScalarField& phi, double h, const PdeParams& p) {
  const double g = p.gamma_eff();
  const double two_b = 2.0 * p.beta_eff();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < rho.size(); ++k) {
    const double r = std::clamp(rho(k), 0.0, 1.0);
    acc += entropy_density(r, g) + two_b * r * phi(k);
  }
  return acc * h * h;
}

ScenarioResult simulate_scenario(const CorridorGrid& cg, int n_persons, const PdeParams& p,
                                 const PotentialField& phi, const ScenarioOptions& opts) {
  if (n_persons < 0) throw ConfigError("n_persons must be >= 0");
  const Grid& g = cg.grid;
  const double rho_s = 1.0 / (g.h * g.h);
  const double area = g.size() * g.h * g.h;
  ScenarioResult out;
  out.rho0 = n_persons / (rho_s * area);
  if (out.rho0 > 1.0) {
    throw ConfigError("initial density " + std::to_string(out.rho0) +
                      " exceeds 1: too many persons for the corridor");
  }
  Solver solver(cg, p, phi.values, opts.closed);
  solver.set_density(g.constant(out.rho0));
  const double m0 = solver.mass();

  auto record = [&] {
    SeriesPoint pt;
    pt.t = solver.time();
    pt.t_s = pt.t * p.time_scale_s;
    pt.mass = solver.mass() * rho_s;
    pt.measurement_density = solver.measurement_mean() * rho_s;
    pt.entropy = solver.entropy();
    out.series.push_back(pt);
  };
  auto track_peak = [&] {
    const double d = solver.measurement_mean() * rho_s;
    if (d > out.peak_measurement_density) {
      out.peak_measurement_density = d;
      out.peak_time = solver.time();
    }
  };
  record();
  track_peak();
  if (opts.snapshot_every > 0.0) out.snapshots.push_back({0.0, solver.density()});
  if (m0 <= 0.0) {
    out.finished = true;
    return out;
  }

  double next_record = opts.record_every;
  double next_snapshot = opts.snapshot_every;
  if (!(opts.t_max > 0.0) || !(opts.record_every > 0.0)) {
    throw ConfigError("t_max and record_every must be > 0");
  }
  while (solver.mass() >= opts.stop_fraction * m0 && solver.time() < opts.t_max) {
    if (opts.hughes_every > 0 && solver.steps() % opts.hughes_every == 0) {
      solver.set_potential(hughes_potential(cg, solver.density()).values);
    }
    double dt = p.dt_max;
    dt = std::min(dt, next_record - solver.time());
    if (opts.snapshot_every > 0.0) dt = std::min(dt, next_snapshot - solver.time());
    dt = std::max(dt, 1e-15);
    solver.step(dt);
    track_peak();
    if (solver.time() >= next_record - 1e-12) {
      record();
      next_record += opts.record_every;
    }
    if (opts.snapshot_every > 0.0 && solver.time() >= next_snapshot - 1e-12) {
      out.snapshots.push_back({solver.time(), solver.density()});
      next_snapshot += opts.snapshot_every;
    }
  }
  if (out.series.back().t < solver.time()) record();
  out.steps = solver.steps();
  out.finished = solver.mass() < opts.stop_fraction * m0;
  return out;
}

double time_to_reach(const std::vector<SeriesPoint>& series, double level) {
  for (const SeriesPoint& pt : series) {
    if (pt.measurement_density >= level) return pt.t;
  }
  return -1.0;
}

}  // namespace crowd::pde
