#include "gridmarket/coupled_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarket {

Eigen::VectorXd SystemState::pack() const {
  const int n = static_cast<int>(omega.size());
  Eigen::VectorXd x(4 * n);
  x.head(n - 1) = phi;
  x.segment(n - 1, n) = omega;
  x.segment(2 * n - 1, n) = b;
  x.segment(3 * n - 1, n) = Pg;
  x(4 * n - 1) = lambda;
  return x;
}

SystemState SystemState::unpack(const Eigen::VectorXd& x, int n) {
  SystemState s;
  s.phi = x.head(n - 1);
  s.omega = x.segment(n - 1, n);
  s.b = x.segment(2 * n - 1, n);
  s.Pg = x.segment(3 * n - 1, n);
  s.lambda = x(4 * n - 1);
  return s;
}

SystemState vector_field(const PowerNetwork& net, const TreeCoordinates& tree,
                         const CostModel& cost, const GainSet& gains, const SystemState& x) {
  SystemState dx;
  const Eigen::VectorXd eta = tree.E * x.phi;
  const Eigen::VectorXd flow = net.D * (net.gamma.array() * eta.array().sin()).matrix();
  dx.phi = tree.Dt.transpose() * x.omega;
  dx.omega = (-flow.array() - net.A.array() * x.omega.array() + x.Pg.array() -
              net.Pd.array()) /
             net.M.array();
  dx.b = (x.Pg.array() - (x.b.array() - cost.c.array()) / cost.q.array()) /
         gains.tau_b.array();
  const double imbalance = (net.Pd - x.Pg).sum();
  dx.Pg = (x.lambda - x.b.array() - gains.sigma * gains.sigma * x.omega.array() +
           gains.rho * imbalance) /
          gains.tau_g.array();
  dx.lambda = imbalance / gains.tau_lambda;
  return dx;
}

SystemState find_equilibrium(const PowerNetwork& net, const TreeCoordinates& tree,
                             const CostModel& cost, const GainSet& gains) {
  const DispatchSolution sol = solve_economic_dispatch(cost, net.Pd);
  const Eigen::VectorXd inj = sol.Pg_star - net.Pd;
  const int n = net.n;

  // damped Newton on r(phi) = D (gamma .* sin(E phi)) - inj, started at phi = 0
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n - 1);
  auto residual = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const Eigen::VectorXd eta = tree.E * p;
    return net.D * (net.gamma.array() * eta.array().sin()).matrix() - inj;
  };
  Eigen::VectorXd r = residual(phi);
  bool converged = r.norm() < 1e-12;
  for (int it = 0; it < 100 && !converged; ++it) {
    const Eigen::VectorXd eta = tree.E * phi;
    const Eigen::VectorXd w = net.gamma.array() * eta.array().cos();
    const Eigen::MatrixXd J = net.D * w.asDiagonal() * tree.E;  // n x (n-1)
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd dphi = JtJ.ldlt().solve(-J.transpose() * r);
    double step = 1.0;
    Eigen::VectorXd r_new = residual(phi + step * dphi);
    while (step > 1e-8 && r_new.norm() >= r.norm()) {
      step *= 0.5;
      r_new = residual(phi + step * dphi);
    }
    phi += step * dphi;
    r = r_new;
    converged = r.norm() < 1e-12;
  }
  if (!converged)
    throw std::runtime_error(
        "infeasible power flow: equilibrium angle solve did not converge "
        "(loads exceed line capability at |angle| < pi/2)");
  if ((tree.E * phi).array().abs().maxCoeff() >= M_PI / 2)
    throw std::runtime_error(
        "infeasible power flow: equilibrium violates the security constraint");

  SystemState xbar;
  xbar.phi = phi;
  xbar.omega = Eigen::VectorXd::Zero(n);
  xbar.b = sol.b_star;
  xbar.Pg = sol.Pg_star;
  xbar.lambda = sol.lambda_star;

  const SystemState f = vector_field(net, tree, cost, gains, xbar);
  if (f.pack().array().abs().maxCoeff() >= 1e-9)
    throw std::runtime_error("infeasible power flow: equilibrium residual check failed");
  return xbar;
}

double energy_function_V(const PowerNetwork& net, const TreeCoordinates& tree,
                         const GainSet& gains, const SystemState& x,
                         const SystemState& xbar) {
  const double U = potential_energy(net, tree, x.phi);
  const double Ubar = potential_energy(net, tree, xbar.phi);
  const Eigen::VectorXd gU = potential_gradient(net, tree, xbar.phi);
  const double s2 = gains.sigma * gains.sigma;
  const Eigen::VectorXd bt = x.b - xbar.b;
  const Eigen::VectorXd Pt = x.Pg - xbar.Pg;
  const double lt = x.lambda - xbar.lambda;
  return U - Ubar - gU.dot(x.phi - xbar.phi) +
         0.5 * (x.omega.array().square() * net.M.array()).sum() +
         0.5 / s2 *
             ((bt.array().square() * gains.tau_b.array()).sum() +
              (Pt.array().square() * gains.tau_g.array()).sum() +
              gains.tau_lambda * lt * lt);
}

Eigen::VectorXd energy_gradient_V(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const GainSet& gains, const SystemState& x,
                                  const SystemState& xbar) {
  const int n = net.n;
  const double s2 = gains.sigma * gains.sigma;
  Eigen::VectorXd g(4 * n);
  g.head(n - 1) =
      potential_gradient(net, tree, x.phi) - potential_gradient(net, tree, xbar.phi);
  g.segment(n - 1, n) = net.M.array() * x.omega.array();
  g.segment(2 * n - 1, n) = gains.tau_b.array() * (x.b - xbar.b).array() / s2;
  g.segment(3 * n - 1, n) = gains.tau_g.array() * (x.Pg - xbar.Pg).array() / s2;
  g(4 * n - 1) = gains.tau_lambda * (x.lambda - xbar.lambda) / s2;
  return g;
}

double v_dissipation_rate(const PowerNetwork& net, const TreeCoordinates& tree,
                          const CostModel& cost, const GainSet& gains,
                          const SystemState& x, const SystemState& xbar) {
  (void)tree;
  const double s2 = gains.sigma * gains.sigma;
  const Eigen::VectorXd bt = x.b - xbar.b;
  const Eigen::VectorXd Pt = x.Pg - xbar.Pg;
  const double sumPt = Pt.sum();
  return -(x.omega.array().square() * net.A.array()).sum() -
         (bt.array().square() / cost.q.array()).sum() / s2 -
         gains.rho / s2 * sumPt * sumPt;
}

Eigen::VectorXd perturbed_vector_field(const PowerNetwork& net, const TreeCoordinates& tree,
                                       const CostModel& cost, const GainSet& gains,
                                       const Disturbance& dist, double t,
                                       const SystemState& x) {
  return vector_field(net, tree, cost, gains, x).pack() + dist.B * dist.d(t);
}

Eigen::VectorXd q_weights(const PowerNetwork& net, const GainSet& gains) {
  const int n = net.n;
  Eigen::VectorXd w(4 * n);
  w.head(n - 1).setOnes();
  w.segment(n - 1, n) = net.M;
  w.segment(2 * n - 1, n) = gains.tau_b / gains.sigma;
  w.segment(3 * n - 1, n) = gains.tau_g / gains.sigma;
  w(4 * n - 1) = gains.tau_lambda / gains.sigma;
  return w;
}

Eigen::MatrixXd assemble_A_matrix(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const CostModel& cost, const GainSet& gains) {
  const int n = net.n, nm1 = n - 1;
  const int dim = 4 * n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  const int iphi = 0, iom = nm1, ib = nm1 + n, iP = nm1 + 2 * n, il = dim - 1;
  A.block(iphi, iom, nm1, n) = tree.Dt.transpose();
  A.block(iom, iphi, n, nm1) = -tree.Dt;
  A.block(iom, iom, n, n) = (-net.A).asDiagonal();
  A.block(iom, iP, n, n) = gains.sigma * Eigen::MatrixXd::Identity(n, n);
  A.block(ib, ib, n, n) = (-1.0 / cost.q.array()).matrix().asDiagonal();
  A.block(ib, iP, n, n) = Eigen::MatrixXd::Identity(n, n);
  A.block(iP, iom, n, n) = -gains.sigma * Eigen::MatrixXd::Identity(n, n);
  A.block(iP, ib, n, n) = -Eigen::MatrixXd::Identity(n, n);
  A.block(iP, iP, n, n) = -gains.rho * Eigen::MatrixXd::Ones(n, n);
  A.block(iP, il, n, 1) = Eigen::VectorXd::Ones(n);
  A.block(il, iP, 1, n) = -Eigen::RowVectorXd::Ones(n);
  return A;
}

}  // namespace gridmarket
