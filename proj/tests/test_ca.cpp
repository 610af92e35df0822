#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "crowd/ca.hpp"
#include "crowd/potential.hpp"

using namespace crowd;
using namespace crowd::ca;

namespace {

std::vector<double> ramp(int n, double h) {
  std::vector<double> phi(n);
  for (int c = 0; c < n; ++c) phi[c] = h * (c + 0.5);
  return phi;
}

// Every cell moves left with certainty.
std::vector<Rates> always_left(int n) {
  Rates r;
  r.move[kLeft] = 1.0;
  r.stay = 0.0;
  return std::vector<Rates>(n, r);
}

State line_state(int n, const std::vector<int>& cells) {
  State s = State::empty(n);
  s.agent_cell.assign(cells.size(), -1);
  for (std::size_t a = 0; a < cells.size(); ++a) s.place(static_cast<int>(a), cells[a]);
  return s;
}

}  // namespace

TEST_CASE("flat interior cell shares the move probability evenly") {
  const CorridorGrid cg = build_corridor(3.3, 9.6, 0.9, 0.3);
  const Lattice lat = corridor_lattice(cg, cg.grid.constant(1.0));
  const int c = cg.grid.index({5, 10});
  SimParams p;
  p.mu = 1.0;
  Rates r = transition_rates(lat, c, p);
  for (double m : r.move) CHECK(m == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(r.stay == doctest::Approx(0.5).epsilon(1e-15));
  p.mu = 0.0;
  r = transition_rates(lat, c, p);
  for (double m : r.move) CHECK(m == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  CHECK(r.stay == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("beta = 0 gives equal rates on a sloped potential") {
  const Lattice lat = line_lattice(ramp(5, 0.3), 0.3, false);
  SimParams p;
  p.beta = 0.0;
  const Rates r = transition_rates(lat, 2, p);
  CHECK(r.move[kLeft] == doctest::Approx(r.move[kRight]));
  CHECK(r.total_move() == doctest::Approx(0.5));
}

TEST_CASE("walls get zero rate and the exit cell has a leave option") {
  const Lattice lat = line_lattice(ramp(4, 0.3), 0.3, true);
  SimParams p;
  const Rates r0 = transition_rates(lat, 0, p);
  CHECK(r0.move[kLeft] == 0.0);
  CHECK(r0.leave > r0.move[kRight]);
  CHECK(r0.total_move() == doctest::Approx(0.5));
  const Rates r3 = transition_rates(lat, 3, p);
  CHECK(r3.move[kRight] == 0.0);
  CHECK(r3.leave == 0.0);
  CHECK(r3.move[kLeft] == doctest::Approx(0.5));
}

TEST_CASE("validation rejects out-of-range parameters") {
  auto bad = [](auto edit) {
    SimParams p;
    edit(p);
    CHECK_THROWS_AS(validate(p), ConfigError);
  };
  bad([](SimParams& p) { p.mu = 1.5; });
  bad([](SimParams& p) { p.beta = -1.0; });
  bad([](SimParams& p) { p.gamma = 1.5; });
  bad([](SimParams& p) { p.dt = 0.0; });
  bad([](SimParams& p) { p.p_ex = -0.1; });
  bad([](SimParams& p) { p.n_agents = -1; });
  bad([](SimParams& p) { p.beta = std::nan(""); });
  CHECK(exit_rule_from_string("queue") == ExitRule::queue);
  CHECK(exit_rule_from_string("sampled") == ExitRule::sampled);
  CHECK_THROWS_AS(exit_rule_from_string("first"), ConfigError);
  CHECK_THROWS_AS(ring_lattice(2, 0.0), ConfigError);
}

TEST_CASE("exit probability is capped at one") {
  SimParams p;
  p.p_ex = 20.0;
  p.dt = 0.1;
  CHECK(p.exit_probability() == 1.0);
  CHECK(p.exit_probability_capped());
}

TEST_CASE("conflict winner is drawn proportionally to the rates") {
  const Lattice lat = line_lattice({0.0, 0.0, 0.0}, 0.3, false);
  const auto rates = always_left(3);
  Rng rng(123);
  const int trials = 100000;
  int first = 0;
  for (int t = 0; t < trials; ++t) {
    State s = line_state(3, {0, 2});
    const std::vector<Intent> intents = {{0, kRight, 2.0, false}, {1, kLeft, 1.0, false}};
    resolve_intents(s, lat, rates, intents, 0.0, ExitRule::queue, rng);
    first += s.agent_cell[0] == 1;
    CHECK((s.agent_cell[0] == 1) != (s.agent_cell[1] == 1));
  }
  const double f = static_cast<double>(first) / trials;
  const double se = std::sqrt(2.0 / 9.0 / trials);
  CHECK(std::abs(f - 2.0 / 3.0) < 4.0 * se);
}

TEST_CASE("equal rates split conflicts evenly") {
  const Lattice lat = line_lattice({0.0, 0.0, 0.0}, 0.3, false);
  const auto rates = always_left(3);
  Rng rng(7);
  const int trials = 100000;
  int first = 0;
  for (int t = 0; t < trials; ++t) {
    State s = line_state(3, {0, 2});
    const std::vector<Intent> intents = {{0, kRight, 1.0, false}, {1, kLeft, 1.0, false}};
    resolve_intents(s, lat, rates, intents, 0.0, ExitRule::queue, rng);
    first += s.agent_cell[0] == 1;
  }
  CHECK(std::abs(static_cast<double>(first) / trials - 0.5) < 4.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("a push moves both agents one cell") {
  // Cells 0 1 2, agent A in 2 pushes B in 1 into the free cell 0.
  const Lattice lat = line_lattice({0.0, 0.0, 0.0}, 0.3, false);
  const auto rates = always_left(3);
  Rng rng(1);
  State s = line_state(3, {2, 1});
  const std::vector<Intent> intents = {{0, kLeft, 1.0, true}, {1, kStay, 0.0, false}};
  const StepEvents ev = resolve_intents(s, lat, rates, intents, 0.0, ExitRule::queue, rng);
  CHECK(ev.pushes == 1);
  CHECK(s.agent_cell[0] == 1);
  CHECK(s.agent_cell[1] == 0);
  CHECK(ev.displacement_left == 2);
}

TEST_CASE("a full row cannot be pushed") {
  const Lattice lat = line_lattice({0.0, 0.0, 0.0}, 0.3, false);
  const auto rates = always_left(3);
  Rng rng(1);
  State s = line_state(3, {2, 1, 0});
  SimParams p;
  p.gamma = 1.0;
  const StepEvents ev = step_parallel_pushing(s, lat, rates, p, rng);
  CHECK(ev.pushes == 0);
  CHECK(ev.moves == 0);
  CHECK(s.agent_cell == std::vector<int>{2, 1, 0});
}

TEST_CASE("pushing with gamma = 0 reproduces the standard step") {
  const CorridorGrid cg = build_corridor(3.3, 9.6, 0.9, 0.3);
  const PotentialField phi = corridor_distance(cg);
  const Lattice lat = corridor_lattice(cg, phi.values);
  SimParams p;
  p.gamma = 0.0;
  const auto rates = rate_table(lat, p);
  Rng seed_rng(5);
  State a = random_placement(lat.n_cells, 80, seed_rng);
  State b = a;
  Rng ra(99), rb(99);
  for (int t = 0; t < 200; ++t) {
    step_parallel(a, lat, rates, p, ra);
    step_parallel_pushing(b, lat, rates, p, rb);
  }
  CHECK(a.agent_cell == b.agent_cell);
  CHECK(a.exited == b.exited);
}

TEST_CASE("occupancy stays exclusive and agents are conserved") {
  const CorridorGrid cg = build_corridor(5.7, 9.6, 0.9, 0.3);
  const PotentialField phi = corridor_distance(cg);
  const Lattice lat = corridor_lattice(cg, phi.values);
  SimParams p;
  p.gamma = 0.7;
  const auto rates = rate_table(lat, p);
  Rng rng(11);
  State s = random_placement(lat.n_cells, 150, rng);
  for (int t = 0; t < 300; ++t) {
    step_parallel_pushing(s, lat, rates, p, rng);
    int seen = 0;
    for (int c = 0; c < lat.n_cells; ++c) {
      if (s.occupant[c] >= 0) {
        ++seen;
        CHECK(s.agent_cell[s.occupant[c]] == c);
      }
    }
    CHECK(seen == s.present);
    CHECK(s.present + s.exited == 150);
  }
}

TEST_CASE("strong drift: a single agent needs two steps per cell") {
  // Moves left with probability 1/2 per step, exits on the first step in the
  // exit cell.
  const int k = 6;
  const Lattice lat = line_lattice(ramp(k, 0.3), 0.3, true);
  SimParams p;
  p.beta = 60.0;
  p.p_ex = 20.0;
  p.dt = 0.1;
  const auto rates = rate_table(lat, p);
  const int runs = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < runs; ++r) {
    Rng rng(3, r);
    const double n = static_cast<double>(single_agent_steps(lat, rates, p, k - 1, rng));
    sum += n;
    sum2 += n * n;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sum2 / runs - mean * mean) / runs);
  CHECK(std::abs(mean - (2.0 * (k - 1) + 1.0)) < 4.0 * se);
}

TEST_CASE("step cap marks a run incomplete") {
  const Lattice lat = line_lattice(ramp(4, 0.3), 0.3, true);
  SimParams p;
  p.step_cap = 1;
  const auto rates = rate_table(lat, p);
  Rng rng(1);
  CHECK(single_agent_steps(lat, rates, p, 3, rng) == -1);
}

TEST_CASE("an empty corridor exits at time zero") {
  const CorridorGrid cg = build_corridor(0.9, 9.6, 0.9, 0.3);
  SimParams p;
  p.n_agents = 0;
  const RunStatistics r = run_to_exit(cg, p, corridor_distance(cg));
  CHECK(r.complete);
  CHECK(r.exit_time_s == 0.0);
}

TEST_CASE("too many agents is a config error") {
  const CorridorGrid cg = build_corridor(0.9, 0.9, 0.9, 0.3);
  SimParams p;
  p.n_agents = 10;
  CHECK_THROWS_AS(run_to_exit(cg, p, corridor_distance(cg)), ConfigError);
}

TEST_CASE("monte carlo: one run equals the single run and threads do not matter") {
  const CorridorGrid cg = build_corridor(3.3, 9.6, 0.9, 0.3);
  const PotentialField phi = corridor_distance(cg);
  SimParams p;
  p.n_agents = 40;
  p.seed = 17;
  MonteCarloOptions o;
  o.n_runs = 1;
  const EnsembleStatistics one = monte_carlo(cg, p, phi, o);
  CHECK(one.mean_exit_time == run_to_exit(cg, p, phi, 0).exit_time_s);

  o.n_runs = 12;
  o.threads = 1;
  const EnsembleStatistics serial = monte_carlo(cg, p, phi, o);
  o.threads = 3;
  const EnsembleStatistics parallel = monte_carlo(cg, p, phi, o);
  CHECK(serial.exit_times == parallel.exit_times);
  CHECK(serial.mean_density_series == parallel.mean_density_series);
  CHECK((serial.max_density_map == parallel.max_density_map).all());

  o.n_runs = 0;
  CHECK_THROWS_AS(monte_carlo(cg, p, phi, o), ConfigError);
}

TEST_CASE("count_modes") {
  CHECK(count_modes({0, 1, 5, 9, 5, 1, 0}, 1) == 1);
  CHECK(count_modes({0, 9, 1, 0, 0, 1, 9, 0}, 1) == 2);
  CHECK(count_modes({}, 3) == 0);
}

TEST_CASE("master equation keeps empty and full lattices fixed") {
  const Lattice lat = line_lattice(ramp(8, 0.3), 0.3, false);
  SimParams p;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.1, ExitRule::queue);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8), one = Eigen::VectorXd::Ones(8);
  CHECK(master_equation_step(lat, r, zero).isApprox(zero));
  CHECK((master_equation_step(lat, r, one) - one).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("master equation conserves mass on a ring") {
  const Lattice lat = ring_lattice(12, 0.3);
  SimParams p;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.0, ExitRule::queue);
  Eigen::VectorXd rho(12);
  for (int c = 0; c < 12; ++c) rho[c] = 0.5 + 0.4 * std::sin(c);
  const double m0 = rho.sum();
  Eigen::VectorXd a = rho, b = rho;
  for (int t = 0; t < 100; ++t) {
    a = master_equation_step(lat, r, a);
    b = master_equation_step_pushing(lat, r, b, 0.8);
  }
  CHECK(a.sum() == doctest::Approx(m0).epsilon(1e-12));
  CHECK(b.sum() == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("pushing master equation with gamma = 0 is the standard one") {
  const Lattice lat = line_lattice(ramp(10, 0.3), 0.3, true);
  SimParams p;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.2, ExitRule::queue);
  Eigen::VectorXd rho(10);
  for (int c = 0; c < 10; ++c) rho[c] = 0.1 * c;
  CHECK((master_equation_step(lat, r, rho) - master_equation_step_pushing(lat, r, rho, 0.0))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("master equation loses exactly the exit flux") {
  const CorridorGrid cg = build_corridor(3.3, 9.6, 0.9, 0.3);
  const Lattice lat = corridor_lattice(cg, corridor_distance(cg).values);
  SimParams p;
  const auto rates = rate_table(lat, p);
  for (ExitRule rule : {ExitRule::queue, ExitRule::sampled}) {
    const MeanFieldRates r = mean_field_rates(lat, rates, 0.09, rule);
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(lat.n_cells, 0.3);
    const Eigen::VectorXd next = master_equation_step(lat, r, rho);
    double loss = 0.0;
    for (int c = 0; c < lat.n_cells; ++c) loss += r.exit_loss[c] * rho[c];
    CHECK(loss > 0.0);
    CHECK(rho.sum() - next.sum() == doctest::Approx(loss).epsilon(1e-12));
  }
}

TEST_CASE("master equation rejects mismatched sizes") {
  const Lattice lat = ring_lattice(5, 0.0);
  const auto rates = rate_table(lat, SimParams{});
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.0, ExitRule::queue);
  CHECK_THROWS(master_equation_step(lat, r, Eigen::VectorXd::Zero(4)));
}

TEST_CASE("single agent occupancy on a line matches the exact chain") {
  const Lattice lat = line_lattice(ramp(6, 0.3), 0.3, true);
  SimParams p;
  p.beta = 2.0;
  p.mu = 1.0;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.1, ExitRule::queue);
  Eigen::VectorXd prob = Eigen::VectorXd::Zero(6);
  prob[5] = 1.0;
  for (int t = 0; t < 10; ++t) prob = single_agent_step(lat, r, prob);
  const double expected[6] = {0.19773889182555637, 0.19920818469675086, 0.21733454437494812,
                              0.1858692418550586,  0.11974106044301716, 0.04112865920111078};
  for (int c = 0; c < 6; ++c) CHECK(prob[c] == doctest::Approx(expected[c]).epsilon(1e-12));
}

TEST_CASE("on a flat ring the master equation is linear") {
  const Lattice lat = ring_lattice(9, 0.0);
  SimParams p;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.0, ExitRule::queue);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(9);
  rho[0] = 1.0;
  Eigen::VectorXd single = rho;
  for (int t = 0; t < 20; ++t) {
    rho = master_equation_step(lat, r, rho);
    single = single_agent_step(lat, r, single);
  }
  CHECK((rho - single).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single agent Monte Carlo matches the master equation on a flat ring") {
  const int n = 9, steps = 20, runs = 100000;
  const Lattice lat = ring_lattice(n, 0.0);
  SimParams p;
  const auto rates = rate_table(lat, p);
  const MeanFieldRates r = mean_field_rates(lat, rates, 0.0, ExitRule::queue);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(n);
  rho[0] = 1.0;
  for (int t = 0; t < steps; ++t) rho = master_equation_step(lat, r, rho);

  std::vector<int> hits(n, 0);
  for (int run = 0; run < runs; ++run) {
    Rng rng(21, run);
    State s = line_state(n, {0});
    for (int t = 0; t < steps; ++t) step_parallel(s, lat, rates, p, rng);
    ++hits[s.agent_cell[0]];
  }
  for (int c = 0; c < n; ++c) {
    const double f = static_cast<double>(hits[c]) / runs;
    const double se = std::sqrt(rho[c] * (1.0 - rho[c]) / runs);
    CHECK(std::abs(f - rho[c]) < 4.0 * se);
  }
}

TEST_CASE("pushing does not slow a dense ring down") {
  SimParams p;
  p.beta = 3.84;
  p.gamma = 1.0;
  p.seed = 4;
  const VelocityEstimate plain = ring_velocity(60, 0.6, 0.3, p, false, 100, 400, 20);
  const VelocityEstimate push = ring_velocity(60, 0.6, 0.3, p, true, 100, 400, 20);
  CHECK(plain.mean > 0.0);
  CHECK(push.mean > plain.mean);
}
