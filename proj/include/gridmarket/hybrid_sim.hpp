#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridmarket/certificates.hpp"
#include "gridmarket/coupled_dynamics.hpp"

namespace gridmarket {

/// Two-level event schedule {t_k^l}: rounds of inner bidding gaps.
struct TriggerSchedule {
  struct Round {
    std::vector<double> gaps;  ///< N_l positive inner gaps
  };
  std::vector<Round> rounds;
  double total_duration() const;
};

struct SchedulePolicy {
  enum class Kind { Periodic, Random } kind = Kind::Periodic;
  double xi = 0.0;               ///< periodic: inner gap
  int N = 1;                     ///< periodic: inner steps per round
  double xi_lo = 0.0, xi_hi = 0.0;  ///< random: gap bounds
  int N_lo = 1, N_hi = 1;           ///< random: inner-count bounds
};

TriggerSchedule generate_schedule(const SchedulePolicy& policy, double horizon,
                                  std::uint64_t seed);

/// Scenario events mutate loads and costs at fixed times.
struct ScenarioAction {
  enum class Kind { ScaleAllLoads, SetLoad, SetCost } kind = Kind::ScaleAllLoads;
  double factor = 1.0;  ///< ScaleAllLoads
  int bus = 0;          ///< 1-based, SetLoad / SetCost
  double Pd = 0.0;      ///< SetLoad
  double q = 0.0, c = 0.0;  ///< SetCost
};

struct ScenarioEvent {
  double t = 0.0;
  std::vector<ScenarioAction> actions;
};

struct EventRecord {
  double t = 0.0;
  std::string kind;  ///< bid-update | iso-update | market-clear | scenario-event
};

struct TrajectorySample {
  double t = 0.0;
  SystemState state;
  double V = 0.0;      ///< energy function w.r.t. the active-regime equilibrium
  double W_eps = 0.0;  ///< W_eps w.r.t. the active-regime certificate (0 if disabled)
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<EventRecord> events;
  bool diverged = false;
  double t_divergence = 0.0;
  /// Anchor bookkeeping for the mismatch-bound check: for each sample, the
  /// index of the sample at the last inner event t_k and last clearing t_0,
  /// plus the active-regime equilibrium at that time.
  std::vector<int> anchor_k, anchor_0, regime_of_sample;
  std::vector<SystemState> regime_equilibria;
};

struct SimOptions {
  double divergence_guard = 1e9;
  double dt_max = 5e-4;               ///< internal integrator step cap
  bool certificate_diagnostics = true;  ///< compute W_eps column (needs eps search)
  double gamma = -1.0;                  ///< Omega radius; < 0 -> default per regime
};

Eigen::VectorXd bid_update_step(const CostModel& cost, const GainSet& gains,
                                const Eigen::VectorXd& b_k, const Eigen::VectorXd& Pg_k,
                                double dt);

std::pair<Eigen::VectorXd, double> iso_update_step(const GainSet& gains,
                                                   const Eigen::VectorXd& b_k,
                                                   const Eigen::VectorXd& omega_sample,
                                                   const Eigen::VectorXd& Pg_k,
                                                   double lambda_k,
                                                   const Eigen::VectorXd& Pd, double dt);

/// Integrate the swing subsystem (phi, omega) with held P_g over dt_span using
/// classic fixed-step RK4 with internal step <= min(dt_max, dt_span).
/// Throws std::runtime_error("divergence detected...") past the guard.
void integrate_physical(const PowerNetwork& net, const TreeCoordinates& tree,
                        const Eigen::VectorXd& held_Pg, Eigen::VectorXd& phi,
                        Eigen::VectorXd& omega, double dt_span, double dt_max = 5e-4,
                        double guard = 1e9);

Trajectory simulate(const PowerNetwork& net, const TreeCoordinates& tree,
                    const CostModel& cost, const GainSet& gains,
                    const TriggerSchedule& schedule,
                    const std::vector<ScenarioEvent>& scenario,
                    const SystemState& initial_state, const SimOptions& options = {});

struct MismatchReport {
  int checked = 0;
  int violations = 0;
  int inapplicable = 0;  ///< samples where a bound denominator is nonpositive
  double max_slack = 0.0;  ///< max of (bound - observed), over applicable samples
  double min_slack = 0.0;
};

/// Empirical check of the inter-event trajectory mismatch bounds
/// (||x(t)-x(t_k)|| and ||x(t)-x(t_0)|| against their certified envelopes).
MismatchReport mismatch_bound_check(const Trajectory& traj, const LipschitzConstants& consts);

struct MonitorPoint {
  double t = 0.0;
  double W = 0.0;
  bool in_omega = true;
  bool increased = false;
};

std::vector<MonitorPoint> lyapunov_monitor(const Trajectory& traj,
                                           const LyapunovCertificate& cert,
                                           const GainSet& gains, const PowerNetwork& net,
                                           const TreeCoordinates& tree,
                                           const SystemState& xbar,
                                           double rel_tol = 1e-12);

}  // namespace gridmarket
