#include <doctest.h>

#include <cmath>
#include <random>

#include "crowd/geometry.hpp"
#include "crowd/riemann.hpp"

using namespace crowd;
using namespace crowd::riemann;

TEST_CASE("flux and the Godunov flux") {
  CHECK(flux(0.0) == 0.0);
  CHECK(flux(1.0) == 0.0);
  CHECK(flux(0.5) == -0.25);
  CHECK(godunov_flux(0.2, 0.8) == -0.25);
  CHECK(godunov_flux(0.8, 0.2) == doctest::Approx(-0.16));
  CHECK(godunov_flux(0.1, 0.3) == doctest::Approx(flux(0.3)));
  CHECK(godunov_flux(0.6, 0.9) == doctest::Approx(flux(0.6)));
  CHECK(godunov_flux(0.9, 0.6) == doctest::Approx(flux(0.9)));
}

TEST_CASE("regimes") {
  CHECK(classify({0.4, 1.0, 0.3}) == Regime::boundary_shock);
  CHECK(classify({0.2, 1.0, 0.3}) == Regime::constant);
  CHECK(classify({0.9, 1.0, 0.2}) == Regime::rarefaction_superhalf);
  CHECK(classify({0.8, 1.0, 0.6}) == Regime::rarefaction_subhalf);
  CHECK(classify({0.25, 1.0, 0.6}) == Regime::constant);
  CHECK(classify({0.6, 1.0, 0.5}) == Regime::rarefaction_superhalf);
  CHECK(std::string(to_string(Regime::boundary_shock)) == "boundary_shock");
}

TEST_CASE("invalid problems") {
  CHECK_THROWS_AS(solve({0.0, 1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(solve({1.0, 1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(solve({0.5, 0.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(solve({0.5, 1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(solve({0.5, 1.0, 1.5}), ConfigError);
}

TEST_CASE("exit times against exact rationals") {
  CHECK(solve({0.4, 1.0, 0.3}).exit_time == doctest::Approx(40.0 / 21.0).epsilon(1e-14));
  CHECK(solve({0.8, 1.0, 0.6}).exit_time == doctest::Approx(16.0 / 5.0).epsilon(1e-14));
  CHECK(solve({0.25, 1.0, 0.6}).exit_time == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(solve({0.9, 1.0, 0.2}).exit_time == doctest::Approx(45.0 / 8.0).epsilon(1e-14));
  CHECK(solve({0.6, 1.0, 0.5}).exit_time == doctest::Approx(12.0 / 5.0).epsilon(1e-14));
  CHECK(solve({0.4, 2.5, 0.3}).exit_time == doctest::Approx(2.5 * 40.0 / 21.0).epsilon(1e-14));
}

TEST_CASE("the constant and shock formulas agree on the interface") {
  const Solution s = solve({0.7, 1.0, 0.3});
  CHECK(s.regime == Regime::constant);
  CHECK(s.near_interface);
  CHECK(s.exit_time == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(solve({0.7 - 1e-9, 1.0, 0.3}).exit_time == doctest::Approx(10.0 / 3.0).epsilon(1e-8));
  CHECK_FALSE(solve({0.4, 1.0, 0.3}).near_interface);
}

TEST_CASE("events") {
  const Solution a = solve({0.4, 1.0, 0.3});
  REQUIRE(a.events.size() == 2);
  CHECK(a.events[0].kind == "shock_collision");
  CHECK(a.events[0].t == doctest::Approx(1.0 / 0.7));
  CHECK(a.events[0].x == doctest::Approx(0.1 / 0.7));
  CHECK(a.events.back().kind == "exit");

  const Solution b = solve({0.8, 1.0, 0.6});
  REQUIRE(b.events.size() == 2);
  CHECK(b.events[0].kind == "crest_meets_back_shock");
  CHECK(b.events[0].t == doctest::Approx(1.25));
  CHECK(b.events[0].x == doctest::Approx(0.75));

  const Solution c = solve({0.9, 1.0, 0.2});
  REQUIRE(c.events.size() == 3);
  CHECK(c.events[1].kind == "shock_meets_boundary_state");
  for (std::size_t k = 1; k < c.events.size(); ++k) CHECK(c.events[k].t >= c.events[k - 1].t);
}

TEST_CASE("piecewise evaluation") {
  const Solution a = solve({0.4, 1.0, 0.3});
  CHECK(evaluate(a, 0.05, 1.0) == doctest::Approx(0.7));
  CHECK(evaluate(a, 0.3, 1.0) == doctest::Approx(0.4));
  CHECK(evaluate(a, 0.5, 1.0) == 0.0);
  CHECK(evaluate(a, 0.5, 0.0) == 0.4);
  CHECK(evaluate(a, 0.1, 5.0) == 0.0);

  const Solution b = solve({0.8, 1.0, 0.6});
  CHECK(evaluate(b, 0.1, 1.0) == doctest::Approx(0.55));
  CHECK(evaluate(b, 0.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("shocks satisfy the jump and entropy conditions") {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int seen[4] = {0, 0, 0, 0};
  int tries = 0;
  while ((seen[0] < 20 || seen[1] < 20 || seen[2] < 20 || seen[3] < 20) && tries < 100000) {
    ++tries;
    const Problem p{u(eng), 0.5 + 2.0 * u(eng), u(eng)};
    const Solution s = solve(p);
    const int r = static_cast<int>(s.regime);
    if (seen[r] >= 20) continue;
    ++seen[r];
    CHECK(in_relaxed_set(s.rho_bar, p.p_ex));
    for (int k = 1; k < 50; ++k) {
      const double t = s.exit_time * k / 50.0;
      for (const Shock& sh : shocks_at(s, t)) {
        CHECK(std::abs(rankine_hugoniot_residual(sh)) <= 1e-12);
        CHECK(lax_admissible(sh));
      }
    }
  }
  for (int r = 0; r < 4; ++r) CHECK(seen[r] == 20);
}

TEST_CASE("exact mass decreases at the exit flux") {
  const Solution s = solve({0.4, 1.0, 0.3});
  CHECK(mass(s, 0.0) == doctest::Approx(0.4));
  // Outflow |j(1 - p_ex)| = 0.21 per unit time while the boundary state holds.
  CHECK(mass(s, 0.5, 200000) == doctest::Approx(0.4 - 0.21 * 0.5).epsilon(1e-4));
}

TEST_CASE("relaxed boundary set") {
  CHECK(in_relaxed_set(0.2, 0.3));
  CHECK(in_relaxed_set(0.7, 0.3));
  CHECK_FALSE(in_relaxed_set(0.5, 0.3));
  CHECK(in_relaxed_set(0.5, 0.6));
  CHECK_FALSE(in_relaxed_set(0.55, 0.6));
}

TEST_CASE("Godunov depletion times") {
  struct Case {
    Problem p;
    double oracle;
  };
  const Case cases[] = {{{0.4, 1.0, 0.3}, 1.9046249999997207},
                        {{0.8, 1.0, 0.6}, 3.1997249999992587},
                        {{0.25, 1.0, 0.6}, 1.3333499999999245}};
  for (const Case& c : cases) {
    const Solution s = solve(c.p);
    const GodunovResult g = godunov_oracle(c.p, 4000, 1.2 * s.exit_time);
    CHECK(g.depletion_time == doctest::Approx(c.oracle).epsilon(1e-9));
    CHECK(std::abs(g.depletion_time - s.exit_time) <= 0.02 * s.exit_time);
  }
}

TEST_CASE("Godunov converges to the exact profile") {
  const Problem p{0.3, 1.0, 0.6};
  const Solution s = solve(p);
  const int n = 400;
  const GodunovResult g = godunov_oracle(p, n, 0.5 * s.exit_time);
  CHECK(l1_error(s, g) <= 5.0 / n);
}

TEST_CASE("Godunov rejects bad discretizations") {
  const Problem p{0.3, 1.0, 0.6};
  CHECK_THROWS_AS(godunov_oracle(p, 5, 1.0), ConfigError);
  CHECK_THROWS_AS(godunov_oracle(p, 100, 1.0, 1.5), ConfigError);
  CHECK_THROWS_AS(godunov_oracle(p, 100, 1.0, 0.0), ConfigError);
}

TEST_CASE("exit time map is continuous and grows with the initial density") {
  std::vector<double> q, r;
  for (int k = 0; k < 50; ++k) {
    q.push_back((k + 0.5) / 50.0);
    r.push_back((k + 0.5) / 50.0);
  }
  const Eigen::MatrixXd m = exit_time_map(q, r, 1.0);
  CHECK(m.rows() == 50);
  CHECK(m.cols() == 50);
  for (int b = 0; b < 50; ++b) {
    for (int a = 1; a < 50; ++a) {
      CHECK(m(a, b) >= m(a - 1, b));
      CHECK(m(a, b) - m(a - 1, b) < 2.5);
    }
  }
}
