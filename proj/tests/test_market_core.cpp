#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "common.hpp"

using namespace gridmarket;

namespace {

CostModel single(double q, double c) {
  CostModel cm;
  cm.q.resize(1);
  cm.c.resize(1);
  cm.q << q;
  cm.c << c;
  return cm;
}

}  // namespace

TEST_CASE("total_cost: closed-form points") {
  CHECK(total_cost(single(2.0, 1.0), Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
  Eigen::VectorXd Pg(1);
  Pg << 3.0;
  CHECK(total_cost(single(2.0, 1.0), Pg) == doctest::Approx(12.0));
}

TEST_CASE("total_cost: KKT optimum beats random balanced perturbations") {
  const CaseData cs = gmtest::ieee14();
  const DispatchSolution sol = solve_economic_dispatch(cs.cost, cs.network.Pd);
  const double opt = total_cost(cs.cost, sol.Pg_star);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 14;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = gauss(rng);
    d.array() -= d.mean();  // balanced perturbation, keeps 1'Pg = 1'Pd
    CHECK(total_cost(cs.cost, sol.Pg_star + d) >= opt - 1e-9);
  }
}

TEST_CASE("solve_economic_dispatch: closed-form cases") {
  const DispatchSolution s1 = solve_economic_dispatch(single(1.0, 0.0),
                                                      Eigen::VectorXd::Constant(1, 5.0));
  CHECK(s1.lambda_star == doctest::Approx(5.0));
  CHECK(s1.Pg_star(0) == doctest::Approx(5.0));

  CostModel twin;
  twin.q = Eigen::VectorXd::Constant(2, 3.0);
  twin.c = Eigen::VectorXd::Constant(2, 1.0);
  Eigen::VectorXd Pd(2);
  Pd << 4.0, 6.0;
  const DispatchSolution s2 = solve_economic_dispatch(twin, Pd);
  CHECK(s2.Pg_star(0) == doctest::Approx(5.0));
  CHECK(s2.Pg_star(1) == doctest::Approx(5.0));
}

TEST_CASE("solve_economic_dispatch: 14-bus regime-1 generator outputs") {
  const CaseData cs = gmtest::ieee14();
  const DispatchSolution sol = solve_economic_dispatch(cs.cost, cs.network.Pd);
  const int gens[] = {1, 2, 3, 6, 8};
  const double ref[] = {85, 15, 42, 31, 63};
  Eigen::VectorXd got(5), want(5);
  for (int i = 0; i < 5; ++i) {
    got(i) = sol.Pg_star(gens[i] - 1);
    want(i) = ref[i];
  }
  CHECK((got - want).norm() / want.norm() < 0.05);
  // KKT invariants
  CHECK((cs.cost.q.array() * sol.Pg_star.array() + cs.cost.c.array() - sol.lambda_star)
            .abs()
            .maxCoeff() /
            sol.lambda_star <
        1e-10);
  CHECK(std::abs(sol.Pg_star.sum() - cs.network.Pd.sum()) / cs.network.Pd.sum() < 1e-10);
  CHECK(sol.lambda_star > 0.0);
}

TEST_CASE("solve_economic_dispatch: load scaling matches re-solve") {
  const CaseData cs = gmtest::ieee14();
  const DispatchSolution base = solve_economic_dispatch(cs.cost, cs.network.Pd);
  const double s = 1.7;
  const DispatchSolution scaled = solve_economic_dispatch(cs.cost, s * cs.network.Pd);
  const double qinv_sum = (1.0 / cs.cost.q.array()).sum();
  // lambda is affine in total load per the closed form
  const double predicted =
      base.lambda_star + (s - 1.0) * cs.network.Pd.sum() / qinv_sum;
  CHECK(scaled.lambda_star == doctest::Approx(predicted).epsilon(1e-12));
}

TEST_CASE("iso_clearing_diagnostic") {
  Eigen::VectorXd Pd(2);
  Pd << 4.0, 6.0;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  const ClearingReport r1 = iso_clearing_diagnostic(b, Pd);
  CHECK(r1.min_bid_set == std::vector<int>{0});
  CHECK(r1.optimal_value == doctest::Approx(10.0));
  CHECK(r1.bounded);

  const ClearingReport r2 = iso_clearing_diagnostic(Eigen::VectorXd::Constant(2, 3.0), Pd);
  CHECK(r2.min_bid_set.size() == 2);

  // vertex enumeration oracle: optimum assigns the full load to one cheapest bidder
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd bb(5);
    for (int i = 0; i < 5; ++i) bb(i) = u(rng);
    const double total = 10.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i) best = std::min(best, bb(i) * total);
    const ClearingReport r = iso_clearing_diagnostic(bb, Eigen::VectorXd::Constant(5, 2.0));
    CHECK(r.optimal_value == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("generator_payoff and desired_generation") {
  const CostModel cm = single(2.0, 1.0);
  CHECK(generator_payoff(cm, 0, 7.0, 0.0) == doctest::Approx(0.0));

  // payoff at the profit-maximizing quantity equals q/2 * Pdes^2
  const double b = 5.0;
  const Eigen::VectorXd des = desired_generation(cm, Eigen::VectorXd::Constant(1, b));
  CHECK(des(0) == doctest::Approx(2.0));
  CHECK(generator_payoff(cm, 0, b, des(0)) ==
        doctest::Approx(0.5 * cm.q(0) * des(0) * des(0)));

  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 3.0);
  const double peak = generator_payoff(cm, 0, b, des(0));
  for (int trial = 0; trial < 100; ++trial)
    CHECK(generator_payoff(cm, 0, b, des(0) + gauss(rng)) <= peak + 1e-12);

  CHECK(desired_generation(cm, cm.c).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("efficient_nash_equilibrium") {
  CHECK(efficient_nash_equilibrium(single(1.0, 0.0), Eigen::VectorXd::Constant(1, 5.0))(0) ==
        doctest::Approx(5.0));

  const CaseData cs = gmtest::ieee14();
  const DispatchSolution sol = solve_economic_dispatch(cs.cost, cs.network.Pd);
  const Eigen::VectorXd bstar = efficient_nash_equilibrium(cs.cost, cs.network.Pd);
  CHECK((bstar.array() - sol.lambda_star).abs().maxCoeff() < 1e-12 * sol.lambda_star);
  // consistency: desired generation at the uniform bid recovers the dispatch
  CHECK((desired_generation(cs.cost, bstar) - sol.Pg_star).cwiseAbs().maxCoeff() < 1e-9);

  // unilateral deviations under re-clearing never beat the equilibrium payoff
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> pick(0, 13);
  const double total = cs.network.Pd.sum();
  for (int trial = 0; trial < 50; ++trial) {
    const int i = pick(rng);
    double dev = u(rng) * sol.lambda_star;
    if (std::abs(dev) < 1e-6) dev = 0.1 * sol.lambda_star;
    const double bi = sol.lambda_star + dev;
    // the ISO LP assigns everything to the strict minimum bidder
    const double allocation = bi < sol.lambda_star ? total : 0.0;
    const double payoff_dev = generator_payoff(cs.cost, i, bi, allocation);
    const double payoff_eq = generator_payoff(cs.cost, i, sol.lambda_star, sol.Pg_star(i));
    CHECK(payoff_dev <= payoff_eq + 1e-9);
  }
}
