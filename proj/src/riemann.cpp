#include "crowd/riemann.hpp"

#include <algorithm>
#include <cmath>

#include "crowd/geometry.hpp"

namespace crowd::riemann {

namespace {

constexpr double kInterfaceTol = 1e-12;

double fan(double x, double t) { return (x + t) / (2.0 * t); }

// Back shock between rho0 and vacuum, started at x = L.
double back_shock(const Problem& p, double t) { return p.L - (1.0 - p.rho0) * t; }

// Curved shock after the rarefaction crest meets the back shock.
double curved_shock(const Problem& p, double t) {
  return 2.0 * std::sqrt(p.L * p.rho0 * t) - t;
}
double curved_shock_speed(const Problem& p, double t) {
  return std::sqrt(p.L * p.rho0 / t) - 1.0;
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::constant: return "constant";
    case Regime::boundary_shock: return "boundary_shock";
    case Regime::rarefaction_subhalf: return "rarefaction_subhalf";
    case Regime::rarefaction_superhalf: return "rarefaction_superhalf";
  }
  return "unknown";
}

void validate(const Problem& p) {
  if (!(p.rho0 > 0.0 && p.rho0 < 1.0)) throw ConfigError("rho0 must lie in (0, 1)");
  if (!(p.L > 0.0) || !std::isfinite(p.L)) throw ConfigError("L must be > 0");
  if (!(p.p_ex > 0.0 && p.p_ex <= 1.0)) throw ConfigError("p_ex must lie in (0, 1]");
}

Regime classify(const Problem& p) {
  validate(p);
  const double r = p.rho0, q = p.p_ex;
  if (q < 0.5) {
    if (r <= q) return Regime::constant;
    if (r < 1.0 - q) return Regime::boundary_shock;
    if (r == 1.0 - q) return Regime::constant;
    return Regime::rarefaction_superhalf;
  }
  if (r <= 0.5) return Regime::constant;
  return q > 0.5 ? Regime::rarefaction_subhalf : Regime::rarefaction_superhalf;
}

Solution solve(const Problem& p) {
  Solution s;
  s.problem = p;
  s.regime = classify(p);
  const double r = p.rho0, q = p.p_ex, L = p.L;
  s.near_interface = std::abs(r - q) < kInterfaceTol || std::abs(r - (1.0 - q)) < kInterfaceTol ||
                     (std::abs(r - 0.5) < kInterfaceTol && q >= 0.5) ||
                     std::abs(q - 0.5) < kInterfaceTol;
  switch (s.regime) {
    case Regime::constant:
      s.rho_bar = r;
      s.exit_time = L / (1.0 - r);
      break;
    case Regime::boundary_shock: {
      s.rho_bar = 1.0 - q;
      const double t1 = L / (1.0 - q);
      s.events.push_back({t1, (r - q) * L / (1.0 - q), "shock_collision"});
      s.exit_time = r * L / (q * (1.0 - q));
      break;
    }
    case Regime::rarefaction_subhalf:
      s.rho_bar = 0.5;
      s.events.push_back({L / r, (2.0 * r - 1.0) * L / r, "crest_meets_back_shock"});
      s.exit_time = 4.0 * r * L;
      break;
    case Regime::rarefaction_superhalf: {
      s.rho_bar = 1.0 - q;
      s.events.push_back({L / r, (2.0 * r - 1.0) * L / r, "crest_meets_back_shock"});
      const double t4 = L * r / ((1.0 - q) * (1.0 - q));
      const double x4 = L * (1.0 - 2.0 * q) * r / ((1.0 - q) * (1.0 - q));
      if (t4 > L / r) s.events.push_back({t4, x4, "shock_meets_boundary_state"});
      s.exit_time = r * L / (q * (1.0 - q));
      break;
    }
  }
  s.events.push_back({s.exit_time, 0.0, "exit"});
  return s;
}

double evaluate(const Solution& s, double x, double t) {
  const Problem& p = s.problem;
  const double r = p.rho0, q = p.p_ex, L = p.L;
  if (x < 0.0) return 0.0;
  if (t <= 0.0) return x <= L ? r : 0.0;
  if (t >= s.exit_time) return 0.0;
  switch (s.regime) {
    case Regime::constant:
      return x <= back_shock(p, t) ? r : 0.0;
    case Regime::boundary_shock: {
      const double t1 = L / (1.0 - q);
      if (t < t1) {
        if (x <= (r - q) * t) return 1.0 - q;
        return x <= back_shock(p, t) ? r : 0.0;
      }
      const double x1 = (r - q) * L / (1.0 - q);
      return x <= x1 - q * (t - t1) ? 1.0 - q : 0.0;
    }
    case Regime::rarefaction_subhalf:
    case Regime::rarefaction_superhalf: {
      const double rb = s.rho_bar;
      const double tail = (2.0 * rb - 1.0) * t;
      if (t < L / r) {
        if (x <= tail) return rb;
        if (x <= (2.0 * r - 1.0) * t) return fan(x, t);
        return x <= back_shock(p, t) ? r : 0.0;
      }
      if (s.regime == Regime::rarefaction_subhalf) {
        return x <= curved_shock(p, t) ? fan(x, t) : 0.0;
      }
      const double t4 = L * r / ((1.0 - q) * (1.0 - q));
      if (t < t4) {
        if (x <= tail) return rb;
        return x <= curved_shock(p, t) ? fan(x, t) : 0.0;
      }
      const double x4 = L * (1.0 - 2.0 * q) * r / ((1.0 - q) * (1.0 - q));
      return x <= x4 - q * (t - t4) ? rb : 0.0;
    }
  }
  return 0.0;
}

std::vector<Shock> shocks_at(const Solution& s, double t) {
  const Problem& p = s.problem;
  const double r = p.rho0, q = p.p_ex, L = p.L;
  std::vector<Shock> out;
  if (t <= 0.0 || t >= s.exit_time) return out;
  switch (s.regime) {
    case Regime::constant:
      out.push_back({"back", back_shock(p, t), -(1.0 - r), r, 0.0});
      break;
    case Regime::boundary_shock: {
      const double t1 = L / (1.0 - q);
      if (t < t1) {
        out.push_back({"boundary", (r - q) * t, r - q, 1.0 - q, r});
        out.push_back({"back", back_shock(p, t), -(1.0 - r), r, 0.0});
      } else {
        const double x1 = (r - q) * L / (1.0 - q);
        out.push_back({"merged", x1 - q * (t - t1), -q, 1.0 - q, 0.0});
      }
      break;
    }
    case Regime::rarefaction_subhalf:
    case Regime::rarefaction_superhalf: {
      if (t < L / r) {
        out.push_back({"back", back_shock(p, t), -(1.0 - r), r, 0.0});
        break;
      }
      const double t4 = s.regime == Regime::rarefaction_superhalf
                            ? L * r / ((1.0 - q) * (1.0 - q))
                            : s.exit_time;
      if (t < t4) {
        const double xs = curved_shock(p, t);
        out.push_back({"curved", xs, curved_shock_speed(p, t), fan(xs, t), 0.0});
      } else {
        const double x4 = L * (1.0 - 2.0 * q) * r / ((1.0 - q) * (1.0 - q));
        out.push_back({"merged", x4 - q * (t - t4), -q, s.rho_bar, 0.0});
      }
      break;
    }
  }
  return out;
}

double rankine_hugoniot_residual(const Shock& s) {
  return s.speed * (s.left - s.right) - (flux(s.left) - flux(s.right));
}

bool lax_admissible(const Shock& s, double tol) {
  return flux_derivative(s.left) + tol >= s.speed && s.speed + tol >= flux_derivative(s.right);
}

bool in_relaxed_set(double trace, double p_ex, double tol) {
  if (p_ex < 0.5) {
    return (trace >= -tol && trace <= p_ex + tol) || std::abs(trace - (1.0 - p_ex)) <= tol;
  }
  return trace >= -tol && trace <= 0.5 + tol;
}

double mass(const Solution& s, double t, int n) {
  const double L = s.problem.L;
  const double dx = L / n;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += evaluate(s, (k + 0.5) * dx, t);
  return acc * dx;
}

GodunovResult godunov_oracle(const Problem& p, int n_cells, double t_end, double cfl,
                             double depletion_threshold) {
  validate(p);
  if (n_cells < 10) throw ConfigError("godunov oracle needs at least 10 cells");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("CFL number must lie in (0, 1]");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
  GodunovResult out;
  out.dx = p.L / n_cells;
  out.rho.assign(n_cells, p.rho0);
  const double ghost = 1.0 - p.p_ex;
  // Characteristic speeds are bounded by 1 in [0, 1].
  const double dt_full = cfl * out.dx;
  const double m0 = p.rho0 * p.L;
  std::vector<double> f(n_cells + 1);
  double m = m0;
  out.times.push_back(0.0);
  out.masses.push_back(m);
  while (out.t < t_end) {
    const double dt = std::min(dt_full, t_end - out.t);
    f[0] = godunov_flux(ghost, out.rho[0]);
    for (int k = 1; k < n_cells; ++k) f[k] = godunov_flux(out.rho[k - 1], out.rho[k]);
    f[n_cells] = godunov_flux(out.rho[n_cells - 1], 0.0);
    for (int k = 0; k < n_cells; ++k) out.rho[k] -= dt / out.dx * (f[k + 1] - f[k]);
    out.t += dt;
    m = 0.0;
    for (double v : out.rho) m += v;
    m *= out.dx;
    out.times.push_back(out.t);
    out.masses.push_back(m);
    if (out.depletion_time < 0.0 && m < depletion_threshold * m0) out.depletion_time = out.t;
  }
  return out;
}

double l1_error(const Solution& s, const GodunovResult& g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < g.rho.size(); ++k) {
    acc += std::abs(g.rho[k] - evaluate(s, (k + 0.5) * g.dx, g.t));
  }
  return acc * g.dx;
}

Eigen::MatrixXd exit_time_map(const std::vector<double>& p_ex, const std::vector<double>& rho0,
                              double L) {
  Eigen::MatrixXd out(rho0.size(), p_ex.size());
  for (std::size_t a = 0; a < rho0.size(); ++a) {
    for (std::size_t b = 0; b < p_ex.size(); ++b) {
      out(a, b) = solve({rho0[a], L, p_ex[b]}).exit_time;
    }
  }
  return out;
}

}  // namespace crowd::riemann
