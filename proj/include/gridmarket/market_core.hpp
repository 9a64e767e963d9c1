#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gridmarket {

/// Quadratic generation costs C_i(P) = 0.5 q_i P^2 + c_i P.
struct CostModel {
  Eigen::VectorXd q;  ///< > 0 (strong convexity)
  Eigen::VectorXd c;  ///< >= 0
};

struct DispatchSolution {
  Eigen::VectorXd Pg_star;
  double lambda_star = 0.0;
  Eigen::VectorXd b_star;  ///< efficient Nash equilibrium bids, = 1 * lambda_star
};

struct ClearingReport {
  std::vector<int> min_bid_set;  ///< 0-based argmin bidder indices
  double optimal_value = 0.0;    ///< (min_i b_i) * total load
  bool bounded = true;
};

double total_cost(const CostModel& cost, const Eigen::VectorXd& Pg);

/// Closed-form KKT solution of min 0.5 Pg'QPg + c'Pg  s.t. 1'Pg = 1'Pd.
DispatchSolution solve_economic_dispatch(const CostModel& cost, const Eigen::VectorXd& Pd);

ClearingReport iso_clearing_diagnostic(const Eigen::VectorXd& b, const Eigen::VectorXd& Pd);

double generator_payoff(const CostModel& cost, int i, double b_i, double P_gi);

/// Profit-maximizing quantity per generator: (b_i - c_i) / q_i.
Eigen::VectorXd desired_generation(const CostModel& cost, const Eigen::VectorXd& b);

Eigen::VectorXd efficient_nash_equilibrium(const CostModel& cost, const Eigen::VectorXd& Pd);

}  // namespace gridmarket
