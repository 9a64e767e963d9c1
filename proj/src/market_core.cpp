#include "gridmarket/market_core.hpp"

#include <stdexcept>

namespace gridmarket {

double total_cost(const CostModel& cost, const Eigen::VectorXd& Pg) {
  return 0.5 * (Pg.array().square() * cost.q.array()).sum() + cost.c.dot(Pg);
}

DispatchSolution solve_economic_dispatch(const CostModel& cost, const Eigen::VectorXd& Pd) {
  if ((cost.q.array() <= 0.0).any())
    throw std::invalid_argument("solve_economic_dispatch: q must be strictly positive");
  const double lambda =
      (Pd.sum() + (cost.c.array() / cost.q.array()).sum()) / (1.0 / cost.q.array()).sum();
  DispatchSolution sol;
  sol.lambda_star = lambda;
  sol.Pg_star = (lambda - cost.c.array()) / cost.q.array();
  sol.b_star = Eigen::VectorXd::Constant(cost.q.size(), lambda);
  return sol;
}

ClearingReport iso_clearing_diagnostic(const Eigen::VectorXd& b, const Eigen::VectorXd& Pd) {
  ClearingReport rep;
  const double bmin = b.minCoeff();
  for (int i = 0; i < b.size(); ++i)
    if (b(i) == bmin) rep.min_bid_set.push_back(i);
  rep.optimal_value = bmin * Pd.sum();
  rep.bounded = true;  // bids are finite reals, so the LP optimum is attained
  return rep;
}

double generator_payoff(const CostModel& cost, int i, double b_i, double P_gi) {
  return P_gi * b_i - (0.5 * cost.q(i) * P_gi * P_gi + cost.c(i) * P_gi);
}

Eigen::VectorXd desired_generation(const CostModel& cost, const Eigen::VectorXd& b) {
  return (b.array() - cost.c.array()) / cost.q.array();
}

Eigen::VectorXd efficient_nash_equilibrium(const CostModel& cost, const Eigen::VectorXd& Pd) {
  return solve_economic_dispatch(cost, Pd).b_star;
}

}  // namespace gridmarket
