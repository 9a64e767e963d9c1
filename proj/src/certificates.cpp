#include "gridmarket/certificates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gridmarket {

namespace {

double min_eig(const Eigen::MatrixXd& S) {
  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig(const Eigen::MatrixXd& S) {
  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double op_norm(const Eigen::MatrixXd& Mx) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Mx);
  return svd.singularValues()(0);
}

}  // namespace

RegionOmega default_region(const PowerNetwork& net, const TreeCoordinates& tree,
                           const SystemState& xbar) {
  (void)net;
  const double eta_max = (tree.E * xbar.phi).array().abs().maxCoeff();
  return RegionOmega{0.5 * (eta_max + M_PI / 2)};
}

double w_epsilon(const SystemState& x, const SystemState& xbar, const EpsilonParameters& eps,
                 const GainSet& gains, const PowerNetwork& net, const TreeCoordinates& tree) {
  const double V = energy_function_V(net, tree, gains, x, xbar);
  const double s2 = gains.sigma * gains.sigma;
  const Eigen::VectorXd phit = x.phi - xbar.phi;
  const Eigen::VectorXd bt = x.b - xbar.b;
  const Eigen::VectorXd Pt = x.Pg - xbar.Pg;
  const double lt = x.lambda - xbar.lambda;
  const double cross =
      eps.eps0 * eps.eps1 * phit.dot(tree.Dt_pinv * (net.M.array() * x.omega.array()).matrix()) -
      eps.eps0 * eps.eps2 / s2 * bt.dot((gains.tau_g.array() * Pt.array()).matrix()) -
      eps.eps0 * eps.eps3 / s2 * lt * (gains.tau_g.array() * Pt.array()).sum();
  return V + cross;
}

Eigen::VectorXd grad_w_epsilon(const SystemState& x, const SystemState& xbar,
                               const EpsilonParameters& eps, const GainSet& gains,
                               const PowerNetwork& net, const TreeCoordinates& tree) {
  const int n = net.n;
  const double s2 = gains.sigma * gains.sigma;
  const double e0 = eps.eps0, e1 = eps.eps1, e2 = eps.eps2, e3 = eps.eps3;
  const Eigen::VectorXd phit = x.phi - xbar.phi;
  const Eigen::VectorXd bt = x.b - xbar.b;
  const Eigen::VectorXd Pt = x.Pg - xbar.Pg;
  const double lt = x.lambda - xbar.lambda;

  Eigen::VectorXd g(4 * n);
  g.head(n - 1) = potential_gradient(net, tree, x.phi) -
                  potential_gradient(net, tree, xbar.phi) +
                  e0 * e1 * (tree.Dt_pinv * (net.M.array() * x.omega.array()).matrix());
  g.segment(n - 1, n) =
      (net.M.array() * x.omega.array()).matrix() +
      e0 * e1 * (net.M.array() * (tree.Dt_pinv.transpose() * phit).array()).matrix();
  g.segment(2 * n - 1, n) = (gains.tau_b.array() * bt.array() / s2 -
                             e0 * e2 / s2 * gains.tau_g.array() * Pt.array())
                                .matrix();
  g.segment(3 * n - 1, n) = (gains.tau_g.array() * Pt.array() / s2 -
                             e0 * e2 / s2 * gains.tau_g.array() * bt.array() -
                             e0 * e3 / s2 * lt * gains.tau_g.array())
                                .matrix();
  g(4 * n - 1) = gains.tau_lambda * lt / s2 -
                 e0 * e3 / s2 * (gains.tau_g.array() * Pt.array()).sum();
  return g;
}

HessianBlocks hessian_blocks(const EpsilonParameters& eps, double gamma,
                             const PowerNetwork& net, const TreeCoordinates& tree,
                             const GainSet& gains) {
  const int n = net.n, nm1 = n - 1;
  const double e0 = eps.eps0, e1 = eps.eps1, e2 = eps.eps2, e3 = eps.eps3;
  const Eigen::MatrixXd Delta = e0 * e1 * tree.Dt_pinv * net.M.asDiagonal();
  const Eigen::MatrixXd Ug =
      scr_U(net, tree, Eigen::VectorXd::Constant(net.m, gamma));
  const Eigen::MatrixXd U0 = scr_U(net, tree, Eigen::VectorXd::Zero(net.m));

  HessianBlocks hb;
  hb.K1.setZero(nm1 + n, nm1 + n);
  hb.K1.topLeftCorner(nm1, nm1) = Ug;
  hb.K1.topRightCorner(nm1, n) = Delta;
  hb.K1.bottomLeftCorner(n, nm1) = Delta.transpose();
  hb.K1.bottomRightCorner(n, n) = net.M.asDiagonal();
  hb.K2 = hb.K1;
  hb.K2.topLeftCorner(nm1, nm1) = U0;

  const double s2 = gains.sigma * gains.sigma;
  hb.H2.setZero(2 * n + 1, 2 * n + 1);
  hb.H2.block(0, 0, n, n) = gains.tau_b.asDiagonal();
  hb.H2.block(0, n, n, n) = (-e0 * e2 * gains.tau_g).asDiagonal();
  hb.H2.block(n, 0, n, n) = (-e0 * e2 * gains.tau_g).asDiagonal();
  hb.H2.block(n, n, n, n) = gains.tau_g.asDiagonal();
  hb.H2.block(n, 2 * n, n, 1) = -e0 * e3 * gains.tau_g;
  hb.H2.block(2 * n, n, 1, n) = -e0 * e3 * gains.tau_g.transpose();
  hb.H2(2 * n, 2 * n) = gains.tau_lambda;
  hb.H2 /= s2;
  return hb;
}

Eigen::MatrixXd assemble_xi_matrix(const EpsilonParameters& eps, double gamma,
                                   const PowerNetwork& net, const TreeCoordinates& tree,
                                   const CostModel& cost, const GainSet& gains,
                                   bool drop_eps0_terms) {
  const int n = net.n, nm1 = n - 1;
  const int dim = 3 * n + 1 + nm1;
  const double e0 = eps.eps0, e1 = eps.eps1, e2 = eps.eps2, e3 = eps.eps3;
  const double sig = gains.sigma;
  const double two_over_e0 = drop_eps0_terms ? 0.0 : 2.0 / e0;

  const Eigen::VectorXd tgb = gains.tau_g.array() / gains.tau_b.array();
  const Eigen::VectorXd tgl = gains.tau_g / gains.tau_lambda;
  const Eigen::MatrixXd Msc =
      net.M.asDiagonal() * tree.Dt_pinv.transpose() * tree.Dt.transpose() +
      tree.Dt * tree.Dt_pinv * net.M.asDiagonal();
  const Eigen::MatrixXd Tsc = tgl * Eigen::RowVectorXd::Ones(n) +
                              Eigen::VectorXd::Ones(n) * tgl.transpose();
  const Eigen::MatrixXd Ug = scr_U(net, tree, Eigen::VectorXd::Constant(net.m, gamma));

  const int iw = 0, ib = n, iP = 2 * n, il = 3 * n, iphi = 3 * n + 1;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(dim, dim);
  X.block(iw, iw, n, n) =
      two_over_e0 * Eigen::MatrixXd(net.A.asDiagonal()) - e1 * Msc;
  X.block(iw, ib, n, n) = -e2 * sig * Eigen::MatrixXd::Identity(n, n);
  X.block(ib, iw, n, n) = X.block(iw, ib, n, n).transpose();
  X.block(iw, il, n, 1) = -e3 * sig * Eigen::VectorXd::Ones(n);
  X.block(il, iw, 1, n) = X.block(iw, il, n, 1).transpose();
  X.block(iw, iphi, n, nm1) = e1 * net.A.asDiagonal() * tree.Dt_pinv.transpose();
  X.block(iphi, iw, nm1, n) = X.block(iw, iphi, n, nm1).transpose();
  X.block(ib, ib, n, n) =
      -2.0 * e2 * Eigen::MatrixXd::Identity(n, n) +
      two_over_e0 * Eigen::MatrixXd((1.0 / cost.q.array()).matrix().asDiagonal());
  const Eigen::MatrixXd Gbp =
      -e2 * (Eigen::MatrixXd((tgb.array() / cost.q.array()).matrix().asDiagonal()) +
             gains.rho * Eigen::MatrixXd::Ones(n, n));
  X.block(ib, iP, n, n) = Gbp;
  X.block(iP, ib, n, n) = Gbp.transpose();
  X.block(ib, il, n, 1) = (e2 - e3) * Eigen::VectorXd::Ones(n);
  X.block(il, ib, 1, n) = X.block(ib, il, n, 1).transpose();
  X.block(iP, iP, n, n) = 2.0 * e2 * Eigen::MatrixXd(tgb.asDiagonal()) +
                          two_over_e0 * gains.rho * Eigen::MatrixXd::Ones(n, n) -
                          e3 * Tsc;
  X.block(iP, il, n, 1) = -e3 * n * gains.rho * Eigen::VectorXd::Ones(n);
  X.block(il, iP, 1, n) = X.block(iP, il, n, 1).transpose();
  X.block(iP, iphi, n, nm1) = -e1 * sig * tree.Dt_pinv.transpose();
  X.block(iphi, iP, nm1, n) = X.block(iP, iphi, n, nm1).transpose();
  X(il, il) = 2.0 * n * e3;
  X.block(iphi, iphi, nm1, nm1) = 2.0 * e1 * Ug;
  return X;
}

Eigen::MatrixXd xi_projection(const PowerNetwork& net, const GainSet& gains) {
  const int n = net.n, nm1 = n - 1;
  const int dim = 4 * n;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(3 * n + 1 + nm1, dim);
  P.block(0, nm1, n, n) = Eigen::MatrixXd::Identity(n, n);
  P.block(n, nm1 + n, n, n) = Eigen::MatrixXd::Identity(n, n) / gains.sigma;
  P.block(2 * n, nm1 + 2 * n, n, n) = Eigen::MatrixXd::Identity(n, n) / gains.sigma;
  P(3 * n, dim - 1) = 1.0 / gains.sigma;
  P.block(3 * n + 1, 0, nm1, nm1) = Eigen::MatrixXd::Identity(nm1, nm1);
  return P;
}

Eps0Conditions eps0_conditions(const EpsilonParameters& eps, double gamma,
                               const PowerNetwork& net, const TreeCoordinates& tree,
                               const GainSet& gains) {
  const double e0 = eps.eps0, e1 = eps.eps1, e2 = eps.eps2, e3 = eps.eps3;
  const Eigen::MatrixXd Ug = scr_U(net, tree, Eigen::VectorXd::Constant(net.m, gamma));
  const Eigen::MatrixXd C1 =
      Ug - e0 * e0 * e1 * e1 * tree.Dt_pinv * net.M.asDiagonal() * tree.Dt_pinv.transpose();
  Eps0Conditions out;
  out.cond_phi = min_eig(C1);
  const Eigen::ArrayXd c2v = gains.tau_b.array() - e0 * e0 * e2 * e2 * gains.tau_g.array();
  out.cond_b = c2v.minCoeff();
  if (out.cond_b > 0.0)
    out.cond_lam = gains.tau_lambda -
                   e0 * e0 * e3 * e3 *
                       (gains.tau_b.array() * gains.tau_g.array() / c2v).sum();
  else
    out.cond_lam = -1.0;
  return out;
}

LyapunovCertificate find_epsilon(const PowerNetwork& net, const TreeCoordinates& tree,
                                 const CostModel& cost, const GainSet& gains, double gamma) {
  const int n = net.n;
  EpsilonParameters eps;  // eps1 = eps3 = 1
  eps.eps2 = 1.0;

  // stage 1: grow eps2 until the trailing (Pg, lambda, phi) block of Xi is PD
  bool block_pd = false;
  for (int i = 0; i < 60; ++i) {
    const Eigen::MatrixXd X =
        assemble_xi_matrix(eps, gamma, net, tree, cost, gains, /*drop_eps0_terms=*/true);
    const int dim = static_cast<int>(X.rows());
    if (min_eig(X.bottomRightCorner(dim - 2 * n, dim - 2 * n)) > 0.0) {
      block_pd = true;
      break;
    }
    eps.eps2 *= 2.0;
  }
  if (!block_pd)
    throw std::runtime_error(
        "no certificate found for given gamma/gains: trailing Xi block not positive "
        "definite after 60 doublings of eps2");

  // stage 2: shrink eps0 until Xi > 0 and all three eps0 conditions hold
  const double tol = 1e-10;
  eps.eps0 = 1.0;
  std::string last_violation;
  for (int i = 0; i < 200; ++i) {
    const Eigen::MatrixXd X = assemble_xi_matrix(eps, gamma, net, tree, cost, gains);
    const double lmin = min_eig(X);
    const Eps0Conditions cond = eps0_conditions(eps, gamma, net, tree, gains);
    if (lmin > tol && cond.cond_phi > tol && cond.cond_b > tol && cond.cond_lam > tol) {
      LyapunovCertificate cert;
      cert.eps = eps;
      cert.gamma = gamma;
      cert.xi_matrix_min_eig = lmin;
      const HessianBlocks hb = hessian_blocks(eps, gamma, net, tree, gains);
      cert.c1 = std::min(min_eig(hb.K1), min_eig(hb.H2));
      cert.c2 = std::max(max_eig(hb.K2), max_eig(hb.H2));
      const Eigen::MatrixXd P = xi_projection(net, gains);
      cert.alpha_hat = 0.5 * eps.eps0 * min_eig(P.transpose() * X * P);
      const double L_W = cert.c2;  // gradient-Lipschitz constant of W_eps on Omega
      const double normB = 1.0;    // identity disturbance channel
      cert.chi = 0.5 * cert.alpha_hat / (L_W * normB);
      cert.alpha = cert.alpha_hat - L_W * normB * cert.chi;
      return cert;
    }
    if (lmin <= tol)
      last_violation = "Xi_eps not positive definite";
    else if (cond.cond_phi <= tol)
      last_violation = "phi-block condition scrU(gamma 1) - (eps0 eps1)^2 Dt+ M Dt+' <= 0";
    else if (cond.cond_b <= tol)
      last_violation = "bid condition tau_b - (eps0 eps2)^2 tau_g <= 0";
    else
      last_violation = "lambda Schur-complement condition <= 0";
    eps.eps0 *= 0.5;
  }
  throw std::runtime_error("no certificate found for given gamma/gains: " + last_violation +
                           " after 200 halvings of eps0");
}

LipschitzConstants lipschitz_constants(const PowerNetwork& net, const TreeCoordinates& tree,
                                       const CostModel& cost, const GainSet& gains,
                                       const LyapunovCertificate& cert) {
  const int n = net.n, nm1 = n - 1;
  // f: swing part over (phi, omega) with the Hessian bound cos -> 1 entrywise
  const Eigen::MatrixXd DtpD = tree.Dt_pinv * net.D;
  const Eigen::MatrixXd Uup = DtpD * net.gamma.asDiagonal() * DtpD.transpose();
  Eigen::MatrixXd Jf = Eigen::MatrixXd::Zero(nm1 + n, nm1 + n);
  Jf.block(0, nm1, nm1, n) = tree.Dt.transpose();
  Jf.block(nm1, 0, n, nm1) =
      -(net.M.cwiseInverse().asDiagonal() * (tree.Dt * Uup));
  Jf.block(nm1, nm1, n, n) = (-net.A.array() / net.M.array()).matrix().asDiagonal();

  // g: market part (b', Pg', lambda') as a linear map of (omega, b, Pg, lambda)
  Eigen::MatrixXd Jg = Eigen::MatrixXd::Zero(2 * n + 1, 3 * n + 1);
  Jg.block(0, n, n, n) =
      (-1.0 / (gains.tau_b.array() * cost.q.array())).matrix().asDiagonal();
  Jg.block(0, 2 * n, n, n) = gains.tau_b.cwiseInverse().asDiagonal();
  Jg.block(n, 0, n, n) =
      (-gains.sigma * gains.sigma / gains.tau_g.array()).matrix().asDiagonal();
  Jg.block(n, n, n, n) = (-1.0 / gains.tau_g.array()).matrix().asDiagonal();
  Jg.block(n, 2 * n, n, n) =
      -gains.rho * gains.tau_g.cwiseInverse() * Eigen::RowVectorXd::Ones(n);
  Jg.block(n, 3 * n, n, 1) = gains.tau_g.cwiseInverse();
  Jg.block(2 * n, 2 * n, 1, n) =
      -Eigen::RowVectorXd::Ones(n) / gains.tau_lambda;

  LipschitzConstants lc;
  lc.L_f = op_norm(Jf);
  lc.L_g = op_norm(Jg);
  lc.L_h = net.M.cwiseInverse().maxCoeff();  // ||M^{-1}||, h = M^{-1} Pg injection
  lc.L = lc.L_f + lc.L_g + lc.L_h;
  lc.L_W = cert.c2;
  return lc;
}

StepBounds step_bounds(const LipschitzConstants& k, double alpha, double beta) {
  if (!(beta > 0.0) || !(beta < alpha))
    throw std::invalid_argument("step_bounds: beta must satisfy 0 < beta < alpha");
  StepBounds sb;
  // log1p keeps the bounds strictly positive even when the certificate is so
  // conservative that the log arguments are below double rounding of 1 + x
  sb.xi_bar = std::log1p(beta * (k.L_f + k.L_g) / (k.L * (k.L_W * k.L_h + beta))) /
              (k.L_f + k.L_g);
  sb.zeta_bar = std::log1p(k.L_f * (alpha - beta) /
                           (k.L_g * (k.L * k.L_W + alpha) +
                            (alpha - beta) * (k.L_f + k.L_g))) /
                k.L_f;
  return sb;
}

std::string certificate_report(const LyapunovCertificate& cert,
                               const LipschitzConstants& consts, const StepBounds& bounds) {
  std::ostringstream os;
  os.precision(12);
  os << "epsilon: eps0=" << cert.eps.eps0 << " eps1=" << cert.eps.eps1
     << " eps2=" << cert.eps.eps2 << " eps3=" << cert.eps.eps3 << "\n"
     << "gamma: " << cert.gamma << "\n"
     << "xi_matrix_min_eig: " << cert.xi_matrix_min_eig << "\n"
     << "c1: " << cert.c1 << "\n"
     << "c2: " << cert.c2 << "\n"
     << "alpha_hat: " << cert.alpha_hat << "\n"
     << "chi: " << cert.chi << "\n"
     << "alpha: " << cert.alpha << "\n"
     << "L_f: " << consts.L_f << "\n"
     << "L_g: " << consts.L_g << "\n"
     << "L_h: " << consts.L_h << "\n"
     << "L: " << consts.L << "\n"
     << "L_W: " << consts.L_W << "\n"
     << "xi_bar: " << bounds.xi_bar << "\n"
     << "zeta_bar: " << bounds.zeta_bar << "\n";
  return os.str();
}

}  // namespace gridmarket
