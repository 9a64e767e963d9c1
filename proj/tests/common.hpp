#pragma once

#include <random>
#include <string>

#include "gridmarket/case_io.hpp"
#include "gridmarket/certificates.hpp"
#include "gridmarket/hybrid_sim.hpp"

namespace gmtest {

inline std::string data_path(const std::string& name) {
  return std::string(GRIDMARKET_DATA_DIR) + "/" + name;
}

inline gridmarket::CaseData twobus() { return gridmarket::load_case(data_path("twobus.case")); }
inline gridmarket::CaseData ieee14() { return gridmarket::load_case(data_path("ieee14.case")); }

/// Random state in Omega: gaussian deviation from xbar, rejected until
/// |E phi|_inf <= gamma.
inline gridmarket::SystemState random_state_in_omega(
    const gridmarket::PowerNetwork& net, const gridmarket::TreeCoordinates& tree,
    const gridmarket::SystemState& xbar, double gamma, std::mt19937_64& rng,
    double phi_scale = 0.1, double omega_scale = 0.5, double market_scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = net.n;
  while (true) {
    Eigen::VectorXd dx(4 * n);
    for (int i = 0; i < 4 * n; ++i) dx(i) = gauss(rng);
    dx.head(n - 1) *= phi_scale;
    dx.segment(n - 1, n) *= omega_scale;
    dx.tail(2 * n + 1) *= market_scale;
    const Eigen::VectorXd x = xbar.pack() + dx;
    gridmarket::SystemState s = gridmarket::SystemState::unpack(x, n);
    if ((tree.E * s.phi).array().abs().maxCoeff() <= gamma) return s;
  }
}

/// Fixed-step RK4 integration of the full continuous closed loop.
inline gridmarket::SystemState integrate_continuous(
    const gridmarket::PowerNetwork& net, const gridmarket::TreeCoordinates& tree,
    const gridmarket::CostModel& cost, const gridmarket::GainSet& gains,
    gridmarket::SystemState x, double T, double h,
    const Eigen::VectorXd* d = nullptr) {
  using gridmarket::SystemState;
  const int n = net.n;
  auto f = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd out =
        gridmarket::vector_field(net, tree, cost, gains, SystemState::unpack(v, n)).pack();
    if (d) out += *d;
    return out;
  };
  Eigen::VectorXd v = x.pack();
  const long steps = std::lround(T / h);
  for (long i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = f(v);
    const Eigen::VectorXd k2 = f(v + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(v + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return SystemState::unpack(v, n);
}

}  // namespace gmtest
