#include "crowd/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "crowd/potential.hpp"
#include "crowd/rng.hpp"

namespace crowd::calibrate {

CorridorGrid scenario_corridor(double width_m) {
  return build_corridor(width_m, kCorridorLength, kExitWidth, kCellSize);
}

int far_start_cell(const CorridorGrid& cg) {
  const Grid& g = cg.grid;
  return g.index({g.nx / 2, g.ny - 1});
}

NbarMeasurement measure_nbar(const CorridorGrid& cg, const ca::SimParams& p, int n_runs) {
  if (n_runs < 2) throw ConfigError("measure_nbar needs at least 2 runs");
  ca::validate(p);
  const PotentialField phi = corridor_distance(cg);
  const ca::Lattice lat = ca::corridor_lattice(cg, phi.values);
  const std::vector<ca::Rates> rates = ca::rate_table(lat, p);
  const int start = far_start_cell(cg);
  NbarMeasurement out;
  double sum = 0.0, sq = 0.0;
  int done = 0;
  for (int r = 0; r < n_runs; ++r) {
    Rng rng(p.seed, static_cast<std::uint64_t>(r));
    const long steps = ca::single_agent_steps(lat, rates, p, start, rng);
    if (steps < 0) {
      ++out.incomplete;
      continue;
    }
    sum += static_cast<double>(steps);
    sq += static_cast<double>(steps) * static_cast<double>(steps);
    ++done;
  }
  if (done == 0) return out;
  out.mean = sum / done;
  if (done > 1) {
    const double var = std::max(0.0, (sq - done * out.mean * out.mean) / (done - 1));
    out.standard_error = std::sqrt(var / done);
  }
  return out;
}

NbarSample self_consistent_nbar(const CorridorGrid& cg, double beta, const NbarOptions& opts) {
  if (!(opts.dt_start > 0.0)) throw ConfigError("dt_start must be > 0");
  if (opts.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  ca::SimParams p;
  p.beta = beta;
  p.mu = opts.mu;
  p.p_ex = opts.p_ex;
  p.seed = opts.seed;
  p.n_agents = 1;
  NbarSample s;
  s.beta = beta;
  double dt = opts.dt_start;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    p.dt = dt;
    const NbarMeasurement m = measure_nbar(cg, p, opts.n_runs);
    if (!(m.mean > 0.0)) throw NumericalError("single-agent runs did not reach the exit");
    const double next = kSingleAgentTime / m.mean;
    s.nbar = m.mean;
    s.standard_error = m.standard_error;
    s.iterations = it;
    s.dt = next;
    if (std::abs(next - dt) <= opts.tolerance * dt) {
      s.converged = true;
      break;
    }
    // Averaging damps the 2-cycles that the piecewise-constant CRN map can
    // produce.
    dt = it < 10 ? next : 0.5 * (dt + next);
  }
  return s;
}

double FitResult::operator()(double beta) const { return a + b / std::pow(beta, c); }

namespace {

struct NbarFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double>& beta;
  const std::vector<double>& nbar;

  NbarFunctor(const std::vector<double>& b, const std::vector<double>& n)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(b.size())), beta(b), nbar(n) {}

  int operator()(const InputType& x, ValueType& f) const {
    for (std::size_t k = 0; k < beta.size(); ++k) {
      f(k) = x(0) + x(1) * std::pow(beta[k], -x(2)) - nbar[k];
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& j) const {
    for (std::size_t k = 0; k < beta.size(); ++k) {
      const double t = std::pow(beta[k], -x(2));
      j(k, 0) = 1.0;
      j(k, 1) = t;
      j(k, 2) = -x(1) * t * std::log(beta[k]);
    }
    return 0;
  }
};

}  // namespace

FitResult fit_nbar(const std::vector<double>& beta, const std::vector<double>& nbar) {
  if (beta.size() != nbar.size()) throw ConfigError("beta and nbar sizes differ");
  if (beta.size() < 4) throw ConfigError("fit_nbar needs at least 4 samples");
  if (std::set<double>(beta.begin(), beta.end()).size() != beta.size()) {
    throw ConfigError("fit_nbar needs distinct beta values");
  }
  for (double b : beta) {
    if (!(b > 0.0)) throw ConfigError("beta samples must be > 0");
  }
  const auto [lo, hi] = std::minmax_element(nbar.begin(), nbar.end());
  Eigen::VectorXd x(3);
  x << *lo, *hi - *lo, 1.0;

  NbarFunctor functor(beta, nbar);
  Eigen::LevenbergMarquardt<NbarFunctor> lm(functor);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setGtol(0.0);
  lm.setMaxfev(2000);
  const Eigen::LevenbergMarquardtSpace::Status status = lm.minimize(x);

  FitResult out;
  out.a = x(0);
  out.b = x(1);
  out.c = x(2);
  out.iterations = static_cast<int>(lm.iterations());
  Eigen::VectorXd f(beta.size());
  functor(x, f);
  out.residual = std::sqrt(f.squaredNorm() / static_cast<double>(beta.size()));
  using namespace Eigen::LevenbergMarquardtSpace;
  const bool ok_status = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                         status == RelativeErrorAndReductionTooSmall ||
                         status == CosinusTooSmall || status == FtolTooSmall ||
                         status == XtolTooSmall || status == GtolTooSmall;
  out.converged = ok_status && x.allFinite() && out.c > 0.0;
  return out;
}

FitResult reference_fit() {
  FitResult f;
  f.a = 67.373105526571038;
  f.b = 313.05466627777542;
  f.c = 1.6670997334133579;
  f.residual = 4.5602211808111175;
  f.converged = true;
  return f;
}

NbarCurve measure_nbar_curve(const std::vector<double>& betas, const NbarOptions& opts) {
  NbarCurve out;
  const CorridorGrid cg = scenario_corridor(kScenarios[0].width_m);
  std::vector<double> nbar;
  for (double b : betas) {
    out.samples.push_back(self_consistent_nbar(cg, b, opts));
    nbar.push_back(out.samples.back().nbar);
  }
  out.fit = fit_nbar(betas, nbar);
  return out;
}

double derive_dt(double beta, const FitResult& fit) {
  const double n = fit(beta);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ConfigError("fitted step count is not positive at beta = " + std::to_string(beta));
  }
  return kSingleAgentTime / n;
}

double z_from_means(const std::array<double, 3>& means, const std::array<double, 3>& targets) {
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) acc += (means[k] - targets[k]) * (means[k] - targets[k]);
  return std::sqrt(acc);
}

std::array<double, 3> motivated_targets() {
  return {kScenarios[0].target_motivated_s, kScenarios[1].target_motivated_s,
          kScenarios[2].target_motivated_s};
}

std::array<double, 3> unmotivated_targets() {
  return {kScenarios[0].target_unmotivated_s, kScenarios[1].target_unmotivated_s,
          kScenarios[2].target_unmotivated_s};
}

ObjectiveResult objective_z(const ca::SimParams& base, const std::array<double, 3>& targets,
                            const EnsembleOptions& opts) {
  ObjectiveResult out;
  for (int k = 0; k < 3; ++k) {
    const Scenario& sc = kScenarios[k];
    const CorridorGrid cg = scenario_corridor(sc.width_m);
    const PotentialField phi = corridor_distance(cg);
    ca::SimParams p = base;
    p.n_agents = sc.n_agents;
    p.seed = opts.seed;
    ca::MonteCarloOptions mc;
    mc.n_runs = opts.n_runs;
    mc.threads = opts.threads;
    mc.density_map = false;
    const ca::EnsembleStatistics e = ca::monte_carlo(cg, p, phi, mc);
    out.mean_exit[k] = e.mean_exit_time;
    out.standard_error[k] = e.std_exit_time / std::sqrt(static_cast<double>(e.n_runs));
    out.incomplete_runs += e.incomplete_runs;
  }
  out.z = z_from_means(out.mean_exit, targets);
  return out;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

}  // namespace

CalibrationResult grid_search(const FitResult& fit, const GridSearchOptions& opts) {
  if (opts.beta_points < 5 || opts.pex_points < 5) {
    throw ConfigError("grid_search needs at least 5 points per axis");
  }
  if (!(opts.beta_min > 0.0 && opts.beta_max > opts.beta_min)) {
    throw ConfigError("beta range must satisfy 0 < beta_min < beta_max");
  }
  if (!(opts.pex_min > 0.0 && opts.pex_max > opts.pex_min)) {
    throw ConfigError("p_ex range must satisfy 0 < pex_min < pex_max");
  }
  CalibrationResult out;
  out.betas = linspace(opts.beta_min, opts.beta_max, opts.beta_points);
  out.pexs = linspace(opts.pex_min, opts.pex_max, opts.pex_points);
  out.z.resize(opts.beta_points, opts.pex_points);
  out.z_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < opts.beta_points; ++a) {
    const double dt = derive_dt(out.betas[a], fit);
    out.dts.push_back(dt);
    for (int b = 0; b < opts.pex_points; ++b) {
      ca::SimParams p;
      p.beta = out.betas[a];
      p.p_ex = out.pexs[b];
      p.dt = dt;
      const ObjectiveResult r = objective_z(p, opts.targets, opts.ensemble);
      out.z(a, b) = r.z;
      out.incomplete_runs += r.incomplete_runs;
      if (r.z < out.z_min) {
        out.z_min = r.z;
        out.beta_min = p.beta;
        out.pex_min = p.p_ex;
        out.dt_min = dt;
      }
    }
  }
  return out;
}

Mu0Result estimate_mu0(double beta, double p_ex, double dt, const std::array<double, 3>& targets,
                       const Mu0Options& opts) {
  if (!(opts.mu_max <= 1.0 && opts.mu_min < opts.mu_max)) {
    throw ConfigError("mu range must satisfy mu_min < mu_max <= 1");
  }
  if (!(opts.coarse_step > 0.0 && opts.fine_step > 0.0)) {
    throw ConfigError("mu search steps must be > 0");
  }
  Mu0Result out;
  out.z = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double mu) {
    ca::SimParams p;
    p.beta = beta;
    p.p_ex = p_ex;
    p.dt = dt;
    p.mu = mu;
    const ObjectiveResult r = objective_z(p, targets, opts.ensemble);
    out.mus.push_back(mu);
    out.zs.push_back(r.z);
    if (r.z < out.z) {
      out.z = r.z;
      out.mu0 = mu;
      out.mean_exit = r.mean_exit;
    }
  };
  const int n_coarse = static_cast<int>(std::ceil((opts.mu_max - opts.mu_min) / opts.coarse_step));
  for (int k = 0; k < n_coarse; ++k) {
    const double mu = opts.mu_min + k * opts.coarse_step;
    if (mu < opts.mu_max) evaluate(mu);
  }
  const double centre = out.mu0;
  const int half = static_cast<int>(std::floor(opts.coarse_step / opts.fine_step));
  for (int k = -half; k <= half; ++k) {
    if (k == 0) continue;
    const double mu = centre + k * opts.fine_step;
    if (mu >= opts.mu_min && mu < opts.mu_max) evaluate(mu);
  }
  return out;
}

double implied_speed(double mu) {
  const ca::SimParams motivated;
  ca::SimParams p;
  p.mu = mu;
  return kMaxSpeed * p.move_probability() / motivated.move_probability();
}

}  // namespace crowd::calibrate
