#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gridmarket/grid_model.hpp"
#include "gridmarket/market_core.hpp"

namespace gridmarket {

/// Full state x = col(phi, omega, b, P_g, lambda).
struct SystemState {
  Eigen::VectorXd phi;    ///< length n-1
  Eigen::VectorXd omega;  ///< length n
  Eigen::VectorXd b;      ///< length n
  Eigen::VectorXd Pg;     ///< length n
  double lambda = 0.0;

  Eigen::VectorXd pack() const;
  static SystemState unpack(const Eigen::VectorXd& x, int n);
  int dim() const { return static_cast<int>(phi.size() + 3 * omega.size() + 1); }
};

struct GainSet {
  Eigen::VectorXd tau_b;  ///< diagonal, > 0
  Eigen::VectorXd tau_g;  ///< diagonal, > 0
  double tau_lambda = 1.0;
  double rho = 1.0;
  double sigma = 1.0;
};

struct Disturbance {
  Eigen::MatrixXd B;  ///< input matrix, rows = state dimension
  std::function<Eigen::VectorXd(double)> d;
};

/// Closed-loop vector field F(x), assembled componentwise.
SystemState vector_field(const PowerNetwork& net, const TreeCoordinates& tree,
                         const CostModel& cost, const GainSet& gains,
                         const SystemState& x);

/// Equilibrium per the dispatch closed form; phi solved by damped Newton.
/// Throws std::runtime_error("infeasible power flow...") when the angle solve
/// fails or the security constraint |eta| < pi/2 is violated.
SystemState find_equilibrium(const PowerNetwork& net, const TreeCoordinates& tree,
                             const CostModel& cost, const GainSet& gains);

double energy_function_V(const PowerNetwork& net, const TreeCoordinates& tree,
                         const GainSet& gains, const SystemState& x,
                         const SystemState& xbar);

Eigen::VectorXd energy_gradient_V(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const GainSet& gains, const SystemState& x,
                                  const SystemState& xbar);

/// dV/dt along F: -omega'A omega - sigma^{-2} bt'Q^{-1}bt - rho sigma^{-2} (1'Pt)^2.
double v_dissipation_rate(const PowerNetwork& net, const TreeCoordinates& tree,
                          const CostModel& cost, const GainSet& gains,
                          const SystemState& x, const SystemState& xbar);

Eigen::VectorXd perturbed_vector_field(const PowerNetwork& net, const TreeCoordinates& tree,
                                       const CostModel& cost, const GainSet& gains,
                                       const Disturbance& dist, double t,
                                       const SystemState& x);

/// Matrix form used as a test oracle: Q^{-1} A Q^{-1} grad V with the block
/// matrices of the compact closed-loop representation.
Eigen::MatrixXd assemble_A_matrix(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const CostModel& cost, const GainSet& gains);
Eigen::VectorXd q_weights(const PowerNetwork& net, const GainSet& gains);

}  // namespace gridmarket
