#include "gridmarket/hybrid_sim.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace gridmarket {

double TriggerSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& r : rounds)
    for (double g : r.gaps) total += g;
  return total;
}

TriggerSchedule generate_schedule(const SchedulePolicy& policy, double horizon,
                                  std::uint64_t seed) {
  TriggerSchedule sched;
  if (policy.kind == SchedulePolicy::Kind::Periodic) {
    if (policy.xi <= 0.0 || policy.N < 1)
      throw std::invalid_argument("generate_schedule: periodic policy needs xi > 0, N >= 1");
    double total = 0.0;
    while (total < horizon - 1e-12) {
      TriggerSchedule::Round r;
      r.gaps.assign(policy.N, policy.xi);
      total += policy.xi * policy.N;
      sched.rounds.push_back(std::move(r));
    }
  } else {
    if (policy.xi_lo <= 0.0 || policy.xi_hi < policy.xi_lo || policy.N_lo < 1 ||
        policy.N_hi < policy.N_lo)
      throw std::invalid_argument("generate_schedule: invalid random policy bounds");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> gap(policy.xi_lo, policy.xi_hi);
    std::uniform_int_distribution<int> count(policy.N_lo, policy.N_hi);
    double total = 0.0;
    while (total < horizon - 1e-12) {
      TriggerSchedule::Round r;
      const int N = count(rng);
      r.gaps.reserve(N);
      for (int k = 0; k < N; ++k) {
        const double g = gap(rng);
        r.gaps.push_back(g);
        total += g;
      }
      sched.rounds.push_back(std::move(r));
    }
  }
  return sched;
}

Eigen::VectorXd bid_update_step(const CostModel& cost, const GainSet& gains,
                                const Eigen::VectorXd& b_k, const Eigen::VectorXd& Pg_k,
                                double dt) {
  if (dt <= 0.0) throw std::invalid_argument("bid_update_step: dt must be positive");
  return b_k.array() +
         dt / gains.tau_b.array() *
             (Pg_k.array() - (b_k.array() - cost.c.array()) / cost.q.array());
}

std::pair<Eigen::VectorXd, double> iso_update_step(const GainSet& gains,
                                                   const Eigen::VectorXd& b_k,
                                                   const Eigen::VectorXd& omega_sample,
                                                   const Eigen::VectorXd& Pg_k,
                                                   double lambda_k,
                                                   const Eigen::VectorXd& Pd, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("iso_update_step: dt must be positive");
  const double imbalance = (Pd - Pg_k).sum();
  Eigen::VectorXd Pg_next =
      Pg_k.array() + dt / gains.tau_g.array() *
                         (lambda_k - b_k.array() -
                          gains.sigma * gains.sigma * omega_sample.array() +
                          gains.rho * imbalance);
  const double lambda_next = lambda_k + dt / gains.tau_lambda * imbalance;
  return {std::move(Pg_next), lambda_next};
}

namespace {

struct DivergenceError : std::runtime_error {
  double t;
  explicit DivergenceError(double t_)
      : std::runtime_error("divergence detected at t=" + std::to_string(t_)), t(t_) {}
};

void rk4_span(const PowerNetwork& net, const TreeCoordinates& tree,
              const Eigen::VectorXd& held_Pg, const Eigen::VectorXd& Pd,
              Eigen::VectorXd& phi, Eigen::VectorXd& omega, double t0, double dt_span,
              double dt_max, double guard) {
  auto rhs = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& w,
                 Eigen::VectorXd& dp, Eigen::VectorXd& dw) {
    const Eigen::VectorXd eta = tree.E * p;
    dp = tree.Dt.transpose() * w;
    dw = (-(net.D * (net.gamma.array() * eta.array().sin()).matrix()).array() -
          net.A.array() * w.array() + held_Pg.array() - Pd.array()) /
         net.M.array();
  };
  double s = 0.0;
  Eigen::VectorXd k1p, k1w, k2p, k2w, k3p, k3w, k4p, k4w;
  while (s < dt_span - 1e-15) {
    const double h = std::min(dt_max, dt_span - s);
    rhs(phi, omega, k1p, k1w);
    rhs(phi + 0.5 * h * k1p, omega + 0.5 * h * k1w, k2p, k2w);
    rhs(phi + 0.5 * h * k2p, omega + 0.5 * h * k2w, k3p, k3w);
    rhs(phi + h * k3p, omega + h * k3w, k4p, k4w);
    phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    omega += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    s += h;
    if (!phi.allFinite() || !omega.allFinite() ||
        std::max(phi.array().abs().maxCoeff(), omega.array().abs().maxCoeff()) > guard)
      throw DivergenceError(t0 + s);
  }
}

}  // namespace

void integrate_physical(const PowerNetwork& net, const TreeCoordinates& tree,
                        const Eigen::VectorXd& held_Pg, Eigen::VectorXd& phi,
                        Eigen::VectorXd& omega, double dt_span, double dt_max,
                        double guard) {
  if (dt_span <= 0.0) throw std::invalid_argument("integrate_physical: dt_span must be positive");
  rk4_span(net, tree, held_Pg, net.Pd, phi, omega, 0.0, dt_span, dt_max, guard);
}

Trajectory simulate(const PowerNetwork& net_in, const TreeCoordinates& tree,
                    const CostModel& cost_in, const GainSet& gains,
                    const TriggerSchedule& schedule,
                    const std::vector<ScenarioEvent>& scenario,
                    const SystemState& initial_state, const SimOptions& options) {
  PowerNetwork net = net_in;  // loads mutate under scenario events
  CostModel cost = cost_in;
  Trajectory traj;

  SystemState x = initial_state;
  Eigen::VectorXd held_Pg = x.Pg;

  // per-regime diagnostics: equilibrium, and certificate eps when enabled
  SystemState xbar;
  EpsilonParameters eps;
  bool have_cert = false;
  auto refresh_regime = [&]() {
    xbar = find_equilibrium(net, tree, cost, gains);
    traj.regime_equilibria.push_back(xbar);
    have_cert = false;
    if (options.certificate_diagnostics) {
      const double gamma =
          options.gamma > 0.0 ? options.gamma : default_region(net, tree, xbar).gamma;
      try {
        const LyapunovCertificate cert = find_epsilon(net, tree, cost, gains, gamma);
        eps = cert.eps;
        have_cert = true;
      } catch (const std::runtime_error&) {
        have_cert = false;  // diagnostics only: W column stays zero
      }
    }
  };
  refresh_regime();
  int regime = 0;

  auto record = [&](double t, int a_k, int a_0) {
    TrajectorySample s;
    s.t = t;
    s.state = x;
    s.V = energy_function_V(net, tree, gains, x, xbar);
    s.W_eps = have_cert ? w_epsilon(x, xbar, eps, gains, net, tree) : 0.0;
    traj.samples.push_back(std::move(s));
    traj.anchor_k.push_back(a_k);
    traj.anchor_0.push_back(a_0);
    traj.regime_of_sample.push_back(regime);
  };
  record(0.0, 0, 0);

  double t = 0.0;
  std::size_t next_event = 0;
  const double guard = options.divergence_guard;

  auto check_guard = [&](double when) {
    const Eigen::VectorXd v = x.pack();
    if (!v.allFinite() || v.array().abs().maxCoeff() > guard) throw DivergenceError(when);
  };

  try {
    for (const auto& round : schedule.rounds) {
      held_Pg = x.Pg;  // market clearing: setpoints applied to the grid at t_0^l
      traj.events.push_back({t, "market-clear"});
      const int anchor0 = static_cast<int>(traj.samples.size()) - 1;
      for (double gap : round.gaps) {
        if (gap <= 0.0) throw std::invalid_argument("simulate: nonpositive schedule gap");
        const int anchork = static_cast<int>(traj.samples.size()) - 1;
        // market derivatives sampled at t_k (omega(t_k^l), current loads)
        const Eigen::VectorXd b_next = bid_update_step(cost, gains, x.b, x.Pg, gap);
        const auto [Pg_next, lambda_next] =
            iso_update_step(gains, x.b, x.omega, x.Pg, x.lambda, net.Pd, gap);
        // integrate the swing subsystem over (t_k, t_{k+1}], cutting at scenario events
        double remaining = gap;
        while (remaining > 1e-15) {
          double span = remaining;
          bool hit_event = false;
          if (next_event < scenario.size()) {
            const double te = scenario[next_event].t;
            if (te > t + 1e-15 && te < t + remaining - 1e-15) {
              span = te - t;
              hit_event = true;
            } else if (te <= t + 1e-15) {
              hit_event = true;
              span = 0.0;
            }
          }
          if (span > 0.0)
            rk4_span(net, tree, held_Pg, net.Pd, x.phi, x.omega, t, span, options.dt_max,
                     guard);
          t += span;
          remaining -= span;
          if (hit_event) {
            for (const auto& a : scenario[next_event].actions) {
              switch (a.kind) {
                case ScenarioAction::Kind::ScaleAllLoads:
                  net.Pd *= a.factor;
                  break;
                case ScenarioAction::Kind::SetLoad:
                  net.Pd(a.bus - 1) = a.Pd;
                  break;
                case ScenarioAction::Kind::SetCost:
                  cost.q(a.bus - 1) = a.q;
                  cost.c(a.bus - 1) = a.c;
                  break;
              }
            }
            traj.events.push_back({scenario[next_event].t, "scenario-event"});
            ++next_event;
            refresh_regime();
            ++regime;
          }
        }
        x.b = b_next;
        x.Pg = Pg_next;
        x.lambda = lambda_next;
        check_guard(t);
        traj.events.push_back({t, "bid-update"});
        traj.events.push_back({t, "iso-update"});
        record(t, anchork, anchor0);
      }
    }
  } catch (const DivergenceError& e) {
    traj.diverged = true;
    traj.t_divergence = e.t;
  }
  return traj;
}

MismatchReport mismatch_bound_check(const Trajectory& traj, const LipschitzConstants& k) {
  MismatchReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  const double Lfg = k.L_f + k.L_g;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    const auto& sk = traj.samples[traj.anchor_k[i]];
    const auto& s0 = traj.samples[traj.anchor_0[i]];
    if (traj.regime_of_sample[i] != traj.regime_of_sample[traj.anchor_0[i]])
      continue;  // regime changed mid-round; the stationary bounds do not apply
    const SystemState& xbar = traj.regime_equilibria[traj.regime_of_sample[i]];
    const Eigen::VectorXd xv = s.state.pack();
    const double dist = (xv - xbar.pack()).norm();
    const double zeta = s.t - sk.t;
    const double xi = s.t - s0.t;
    const double ez = std::expm1(k.L_f * zeta);
    const double ex = std::expm1(Lfg * xi);
    const double den_k = k.L_f - Lfg * ez;
    const double den_0 = Lfg - k.L * ex;
    ++rep.checked;
    if (den_k <= 0.0 || den_0 <= 0.0) {
      ++rep.inapplicable;
      continue;
    }
    const double bound_0 = k.L * ex / den_0 * dist;
    const double bound_k = (k.L_h * ez / den_k) * (Lfg / den_0) * dist + Lfg * ez / den_k * dist;
    const double obs_k = (xv - sk.state.pack()).norm();
    const double obs_0 = (xv - s0.state.pack()).norm();
    const double slack = std::min(bound_k - obs_k, bound_0 - obs_0);
    rep.max_slack = std::max(rep.max_slack, slack);
    rep.min_slack = std::min(rep.min_slack, slack);
    if (obs_k > bound_k * (1.0 + 1e-12) + 1e-15 || obs_0 > bound_0 * (1.0 + 1e-12) + 1e-15)
      ++rep.violations;
  }
  if (rep.checked == rep.inapplicable) rep.min_slack = 0.0;
  return rep;
}

std::vector<MonitorPoint> lyapunov_monitor(const Trajectory& traj,
                                           const LyapunovCertificate& cert,
                                           const GainSet& gains, const PowerNetwork& net,
                                           const TreeCoordinates& tree,
                                           const SystemState& xbar, double rel_tol) {
  std::vector<MonitorPoint> out;
  out.reserve(traj.samples.size());
  double prev = 0.0;
  bool first = true;
  for (const auto& s : traj.samples) {
    MonitorPoint p;
    p.t = s.t;
    p.W = w_epsilon(s.state, xbar, cert.eps, gains, net, tree);
    p.in_omega = (tree.E * s.state.phi).array().abs().maxCoeff() <= cert.gamma;
    p.increased = !first && p.W > prev * (1.0 + rel_tol) + rel_tol * std::abs(prev);
    prev = p.W;
    first = false;
    out.push_back(p);
  }
  return out;
}

}  // namespace gridmarket
