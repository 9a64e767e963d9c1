#pragma once

#include <Eigen/Dense>
#include <string>

#include "gridmarket/coupled_dynamics.hpp"

namespace gridmarket {

struct EpsilonParameters {
  double eps0 = 1.0, eps1 = 1.0, eps2 = 1.0, eps3 = 1.0;
};

/// Region Omega = { x : |D^T Dt_pinv^T phi|_inf <= gamma }, |eta_bar|_inf < gamma < pi/2.
struct RegionOmega {
  double gamma = 0.0;
};

struct HessianBlocks {
  Eigen::MatrixXd K1;  ///< lower bound block for the (phi, omega) Hessian
  Eigen::MatrixXd K2;  ///< upper bound block
  Eigen::MatrixXd H2;  ///< exact (b, Pg, lambda) Hessian block
};

struct LyapunovCertificate {
  EpsilonParameters eps;
  double gamma = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double alpha_hat = 0.0;
  double chi = 0.0;
  double alpha = 0.0;
  double xi_matrix_min_eig = 0.0;
};

struct LipschitzConstants {
  double L_f = 0.0, L_g = 0.0, L_h = 0.0, L = 0.0, L_W = 0.0;
};

struct StepBounds {
  double xi_bar = 0.0;    ///< bound tied to the market-clearing round
  double zeta_bar = 0.0;  ///< bound tied to the inner bidding gap
};

/// gamma = (|eta_bar|_inf + pi/2) / 2 for the given equilibrium.
RegionOmega default_region(const PowerNetwork& net, const TreeCoordinates& tree,
                           const SystemState& xbar);

double w_epsilon(const SystemState& x, const SystemState& xbar, const EpsilonParameters& eps,
                 const GainSet& gains, const PowerNetwork& net, const TreeCoordinates& tree);

Eigen::VectorXd grad_w_epsilon(const SystemState& x, const SystemState& xbar,
                               const EpsilonParameters& eps, const GainSet& gains,
                               const PowerNetwork& net, const TreeCoordinates& tree);

HessianBlocks hessian_blocks(const EpsilonParameters& eps, double gamma,
                             const PowerNetwork& net, const TreeCoordinates& tree,
                             const GainSet& gains);

/// Symmetric matrix of dimension 3n + 1 + (n-1), block order (omega, b/s, Pg/s, lambda/s, phi).
/// When drop_eps0_terms is set, the 2/eps0 contributions are omitted (used by the
/// eps2 search stage, where only the eps0-independent part matters).
Eigen::MatrixXd assemble_xi_matrix(const EpsilonParameters& eps, double gamma,
                                   const PowerNetwork& net, const TreeCoordinates& tree,
                                   const CostModel& cost, const GainSet& gains,
                                   bool drop_eps0_terms = false);

/// Scaled projection P mapping (phi, omega, b, Pg, lambda) deviations onto the
/// Xi block coordinates (omega, b/s, Pg/s, lambda/s, phi).
Eigen::MatrixXd xi_projection(const PowerNetwork& net, const GainSet& gains);

/// Minimum eigenvalues of the three positivity conditions on eps0.
struct Eps0Conditions {
  double cond_phi = 0.0;   ///< lambda_min of scrU(gamma 1) - eps0^2 eps1^2 Dt_pinv M Dt_pinv^T
  double cond_b = 0.0;     ///< min of tau_b - eps0^2 eps2^2 tau_g
  double cond_lam = 0.0;   ///< tau_lambda Schur complement
};
Eps0Conditions eps0_conditions(const EpsilonParameters& eps, double gamma,
                               const PowerNetwork& net, const TreeCoordinates& tree,
                               const GainSet& gains);

/// Geometric search: eps1 = eps3 = 1, double eps2 until the trailing
/// (Pg, lambda, phi) block of Xi is PD, then halve eps0 until Xi is PD and the
/// eps0 conditions hold. Throws std::runtime_error on failure, naming the
/// violated condition.
LyapunovCertificate find_epsilon(const PowerNetwork& net, const TreeCoordinates& tree,
                                 const CostModel& cost, const GainSet& gains, double gamma);

LipschitzConstants lipschitz_constants(const PowerNetwork& net, const TreeCoordinates& tree,
                                       const CostModel& cost, const GainSet& gains,
                                       const LyapunovCertificate& cert);

/// Theorem-2 inter-event bounds; requires 0 < beta < alpha.
StepBounds step_bounds(const LipschitzConstants& consts, double alpha, double beta);

std::string certificate_report(const LyapunovCertificate& cert,
                               const LipschitzConstants& consts, const StepBounds& bounds);

}  // namespace gridmarket
