#include <doctest.h>

#include <cmath>
#include <vector>

#include "crowd/calibrate.hpp"

using namespace crowd;
using namespace crowd::calibrate;

namespace {

std::vector<double> betas() { return {kNbarBetas.begin(), kNbarBetas.end()}; }

}  // namespace

TEST_CASE("noise-free samples recover the generating curve") {
  const double a = 63.528, b = 244.082, c = 1.38148;
  std::vector<double> n;
  for (double beta : betas()) n.push_back(a + b / std::pow(beta, c));
  const FitResult f = fit_nbar(betas(), n);
  CHECK(f.converged);
  CHECK(std::abs(f.a / a - 1.0) < 1e-6);
  CHECK(std::abs(f.b / b - 1.0) < 1e-6);
  CHECK(std::abs(f.c / c - 1.0) < 1e-6);
  CHECK(f.residual < 1e-8);
  CHECK(f(3.84) == doctest::Approx(101.57267280569602).epsilon(1e-9));
}

TEST_CASE("flat samples fit a flat curve") {
  const std::vector<double> n(10, 70.0);
  const FitResult f = fit_nbar(betas(), n);
  for (double beta : {0.5, 3.0, 10.0}) CHECK(f(beta) == doctest::Approx(70.0).epsilon(1e-9));
}

TEST_CASE("fit input errors") {
  CHECK_THROWS_AS(fit_nbar({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(fit_nbar({1.0, 2.0, 3.0, 4.0}, {3.0, 2.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(fit_nbar({1.0, 2.0, 2.0, 4.0}, {4.0, 3.0, 2.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(fit_nbar({0.0, 2.0, 3.0, 4.0}, {4.0, 3.0, 2.0, 1.0}), ConfigError);
}

TEST_CASE("dt from the fitted step count") {
  FitResult f;
  f.a = 64.0;
  CHECK(derive_dt(2.0, f) == doctest::Approx(0.125));
  f.a = 80.0;
  CHECK(derive_dt(2.0, f) == doctest::Approx(0.1));
  f.a = -1.0;
  CHECK_THROWS_AS(derive_dt(2.0, f), ConfigError);
  FitResult published;
  published.a = 63.528;
  published.b = 244.082;
  published.c = 1.38148;
  CHECK(derive_dt(3.84, published) == doctest::Approx(0.078761341796170336).epsilon(1e-12));
}

TEST_CASE("reference fit") {
  const FitResult f = reference_fit();
  CHECK(f(0.5) > f(3.84));
  CHECK(f(3.84) > f(10.0));
  CHECK(derive_dt(3.84, f) == doctest::Approx(0.079523346583420487).epsilon(1e-12));
}

TEST_CASE("objective helpers") {
  CHECK(z_from_means({54.0, 61.0, 56.0}, motivated_targets()) == doctest::Approx(std::sqrt(3.0)));
  CHECK(z_from_means(motivated_targets(), motivated_targets()) == 0.0);
  CHECK(motivated_targets() == std::array<double, 3>{53.0, 60.0, 55.0});
  CHECK(unmotivated_targets() == std::array<double, 3>{64.0, 68.0, 57.0});
  CHECK(implied_speed(1.0) == doctest::Approx(1.2));
  CHECK(implied_speed(-1.22) == doctest::Approx(0.56872037914691943).epsilon(1e-14));
}

TEST_CASE("scenario corridors") {
  for (const Scenario& s : kScenarios) {
    const CorridorGrid cg = scenario_corridor(s.width_m);
    CHECK(cg.grid.ny == 32);
    CHECK(cg.index.exit_cells.size() == 3);
    const Cell start = cg.grid.cell(far_start_cell(cg));
    CHECK(start.j == 31);
  }
}

TEST_CASE("single-agent step counts drop with beta") {
  const CorridorGrid cg = scenario_corridor(0.9);
  ca::SimParams p;
  p.p_ex = 1.1;
  p.dt = 0.1;
  p.beta = 0.5;
  const NbarMeasurement lo = measure_nbar(cg, p, 300);
  p.beta = 10.0;
  const NbarMeasurement hi = measure_nbar(cg, p, 300);
  CHECK(lo.incomplete == 0);
  CHECK(lo.mean / hi.mean > 1.5);
  CHECK(hi.standard_error > 0.0);
  CHECK_THROWS_AS(measure_nbar(cg, p, 1), ConfigError);
}

TEST_CASE("self-consistent dt reproduces the reference measurement") {
  const CorridorGrid cg = scenario_corridor(0.9);
  const NbarSample s = self_consistent_nbar(cg, 4.0, NbarOptions{});
  CHECK(s.converged);
  CHECK(s.dt == doctest::Approx(kSingleAgentTime / s.nbar).epsilon(1e-5));
  const FitResult f = reference_fit();
  CHECK(std::abs(s.nbar - f(4.0)) < 3.0 * f.residual);
}

TEST_CASE("ensemble objective is finite and deterministic") {
  ca::SimParams p;
  p.dt = derive_dt(p.beta, reference_fit());
  EnsembleOptions o;
  o.n_runs = 4;
  const ObjectiveResult a = objective_z(p, motivated_targets(), o);
  const ObjectiveResult b = objective_z(p, motivated_targets(), o);
  CHECK(std::isfinite(a.z));
  CHECK(a.z == b.z);
  for (double m : a.mean_exit) CHECK(m > 10.0);
  CHECK(a.incomplete_runs == 0);
}

TEST_CASE("grid search validates its axes") {
  GridSearchOptions o;
  o.beta_points = 4;
  CHECK_THROWS_AS(grid_search(reference_fit(), o), ConfigError);
  o.beta_points = 5;
  o.pex_min = 2.0;
  o.pex_max = 1.0;
  CHECK_THROWS_AS(grid_search(reference_fit(), o), ConfigError);
}

TEST_CASE("small grid search picks its own minimum") {
  GridSearchOptions o;
  o.beta_min = 3.0;
  o.beta_max = 5.0;
  o.beta_points = 5;
  o.pex_min = 0.9;
  o.pex_max = 1.3;
  o.pex_points = 5;
  o.ensemble.n_runs = 3;
  const CalibrationResult r = grid_search(reference_fit(), o);
  CHECK(r.z.rows() == 5);
  CHECK(r.z.cols() == 5);
  CHECK(r.z_min == r.z.minCoeff());
  CHECK(r.betas.front() == 3.0);
  CHECK(r.betas.back() == 5.0);
  CHECK(r.dts.size() == 5);
}
