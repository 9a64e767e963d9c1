#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gridmarket/case_io.hpp"
#include "gridmarket/certificates.hpp"
#include "gridmarket/hybrid_sim.hpp"

namespace gm = gridmarket;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

gm::SchedulePolicy parse_schedule_spec(const std::string& spec) {
  gm::SchedulePolicy p;
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--schedule", "expected periodic:xi,N or random:xlo,xhi,Nlo,Nhi");
  const std::string kind = spec.substr(0, colon);
  std::vector<double> vals;
  std::string rest = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    if (comma == std::string::npos) comma = rest.size();
    vals.push_back(std::stod(rest.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (kind == "periodic" && vals.size() == 2) {
    p.kind = gm::SchedulePolicy::Kind::Periodic;
    p.xi = vals[0];
    p.N = static_cast<int>(vals[1]);
  } else if (kind == "random" && vals.size() == 4) {
    p.kind = gm::SchedulePolicy::Kind::Random;
    p.xi_lo = vals[0];
    p.xi_hi = vals[1];
    p.N_lo = static_cast<int>(vals[2]);
    p.N_hi = static_cast<int>(vals[3]);
  } else {
    throw CLI::ValidationError("--schedule", "expected periodic:xi,N or random:xlo,xhi,Nlo,Nhi");
  }
  return p;
}

int run_dispatch(const std::string& case_path) {
  const gm::CaseData cs = gm::load_case(case_path);
  const gm::DispatchSolution sol = gm::solve_economic_dispatch(cs.cost, cs.network.Pd);
  std::printf("lambda_star: %.12g\n", sol.lambda_star);
  std::printf("Pg_star:");
  for (int i = 0; i < sol.Pg_star.size(); ++i) std::printf(" %.12g", sol.Pg_star(i));
  std::printf("\nb_star:");
  for (int i = 0; i < sol.b_star.size(); ++i) std::printf(" %.12g", sol.b_star(i));
  const double balance = sol.Pg_star.sum() - cs.network.Pd.sum();
  const Eigen::VectorXd stat =
      (cs.cost.q.array() * sol.Pg_star.array() + cs.cost.c.array() - sol.lambda_star);
  std::printf("\nbalance_residual: %.3e\n", balance);
  std::printf("stationarity_residual: %.3e\n", stat.array().abs().maxCoeff());
  std::printf("total_cost: %.12g\n", gm::total_cost(cs.cost, sol.Pg_star));
  return 0;
}

int run_certify(const std::string& case_path, double gamma, double beta) {
  const gm::CaseData cs = gm::load_case(case_path);
  const gm::TreeCoordinates tree = gm::select_spanning_tree(cs.network);
  const gm::SystemState xbar =
      gm::find_equilibrium(cs.network, tree, cs.cost, cs.gains);
  if (gamma <= 0.0) gamma = gm::default_region(cs.network, tree, xbar).gamma;
  const gm::LyapunovCertificate cert =
      gm::find_epsilon(cs.network, tree, cs.cost, cs.gains, gamma);
  const gm::LipschitzConstants lc =
      gm::lipschitz_constants(cs.network, tree, cs.cost, cs.gains, cert);
  if (beta <= 0.0) beta = cert.alpha / 2.0;
  if (beta >= cert.alpha) {
    std::fprintf(stderr, "error: --beta must satisfy 0 < beta < alpha = %.6e\n", cert.alpha);
    return 2;
  }
  const gm::StepBounds sb = gm::step_bounds(lc, cert.alpha, beta);
  std::printf("%s", gm::certificate_report(cert, lc, sb).c_str());
  std::printf("beta: %.12g\n", beta);
  return 0;
}

int run_simulate(const std::string& case_path, const std::string& scenario_path,
                 const std::string& schedule_spec, double horizon, std::uint64_t seed,
                 const std::string& out_dir) {
  const gm::CaseData cs = gm::load_case(case_path);
  const gm::TreeCoordinates tree = gm::select_spanning_tree(cs.network);
  std::vector<gm::ScenarioEvent> scenario;
  if (!scenario_path.empty()) scenario = gm::load_scenario(scenario_path);
  const gm::SchedulePolicy policy = parse_schedule_spec(schedule_spec);
  const gm::TriggerSchedule schedule = gm::generate_schedule(policy, horizon, seed);
  const gm::SystemState x0 = gm::find_equilibrium(cs.network, tree, cs.cost, cs.gains);

  const gm::Trajectory traj =
      gm::simulate(cs.network, tree, cs.cost, cs.gains, schedule, scenario, x0);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "trajectory.csv", gm::trajectory_csv(traj));
  write_file(dir / "events.csv", gm::events_csv(traj));

  const int n = cs.network.n;
  std::vector<gm::PlotSeries> freq(n), pg(n), bids(n + 1);
  for (int i = 0; i < n; ++i) {
    freq[i].label = "omega_" + std::to_string(i + 1);
    pg[i].label = "Pg_" + std::to_string(i + 1);
    bids[i].label = "b_" + std::to_string(i + 1);
  }
  bids[n].label = "lambda";
  gm::PlotSeries cost_series, cost_opt;
  cost_series.label = "total cost";
  cost_opt.label = "optimal cost";
  gm::CostModel cost_now = cs.cost;
  Eigen::VectorXd pd_now = cs.network.Pd;
  std::size_t next_ev = 0;
  double opt_cost =
      gm::total_cost(cost_now, gm::solve_economic_dispatch(cost_now, pd_now).Pg_star);
  for (const auto& s : traj.samples) {
    while (next_ev < scenario.size() && scenario[next_ev].t <= s.t) {
      for (const auto& a : scenario[next_ev].actions) {
        if (a.kind == gm::ScenarioAction::Kind::ScaleAllLoads)
          pd_now *= a.factor;
        else if (a.kind == gm::ScenarioAction::Kind::SetLoad)
          pd_now(a.bus - 1) = a.Pd;
        else {
          cost_now.q(a.bus - 1) = a.q;
          cost_now.c(a.bus - 1) = a.c;
        }
      }
      opt_cost =
          gm::total_cost(cost_now, gm::solve_economic_dispatch(cost_now, pd_now).Pg_star);
      ++next_ev;
    }
    for (int i = 0; i < n; ++i) {
      freq[i].t.push_back(s.t);
      freq[i].y.push_back(s.state.omega(i));
      pg[i].t.push_back(s.t);
      pg[i].y.push_back(s.state.Pg(i));
      bids[i].t.push_back(s.t);
      bids[i].y.push_back(s.state.b(i));
    }
    bids[n].t.push_back(s.t);
    bids[n].y.push_back(s.state.lambda);
    cost_series.t.push_back(s.t);
    cost_series.y.push_back(gm::total_cost(cost_now, s.state.Pg));
    cost_opt.t.push_back(s.t);
    cost_opt.y.push_back(opt_cost);
  }
  write_file(dir / "freq.svg",
             gm::render_svg_plot("Frequency deviations", "t [s]", "omega [rad/s]", freq));
  write_file(dir / "pg.svg", gm::render_svg_plot("Generation setpoints", "t [s]", "Pg [MW]", pg));
  write_file(dir / "bids.svg", gm::render_svg_plot("Bids and price", "t [s]", "b, lambda", bids));
  write_file(dir / "cost.svg",
             gm::render_svg_plot("Total cost vs optimal", "t [s]", "cost",
                                 {cost_series, cost_opt}));

  if (traj.diverged) {
    std::fprintf(stderr, "divergence detected at t=%.6f; outputs written to %s\n",
                 traj.t_divergence, out_dir.c_str());
    return 3;
  }
  std::printf("simulated %zu events over %.6g s; outputs in %s\n", traj.events.size(),
              traj.samples.back().t, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled electricity-market / power-network simulation workbench"};
  app.require_subcommand(1);

  std::string case_path, scenario_path, schedule_spec, out_dir = "out";
  double gamma = -1.0, beta = -1.0, horizon = 10.0;
  std::uint64_t seed = 0;

  auto* dispatch = app.add_subcommand("dispatch", "Solve the economic dispatch for a case");
  dispatch->add_option("--case", case_path, "case file")->required();

  auto* certify = app.add_subcommand("certify", "Compute the stability certificate and step bounds");
  certify->add_option("--case", case_path, "case file")->required();
  certify->add_option("--gamma", gamma, "region radius (default: midpoint to pi/2)");
  certify->add_option("--beta", beta, "rate split, 0 < beta < alpha (default alpha/2)");

  auto* simulate = app.add_subcommand("simulate", "Run the time-triggered simulation");
  simulate->add_option("--case", case_path, "case file")->required();
  simulate->add_option("--scenario", scenario_path, "scenario file");
  simulate->add_option("--schedule", schedule_spec,
                       "periodic:xi,N or random:xlo,xhi,Nlo,Nhi")->required();
  simulate->add_option("--horizon", horizon, "simulation horizon [s]")->required();
  simulate->add_option("--seed", seed, "schedule RNG seed");
  simulate->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dispatch->parsed()) return run_dispatch(case_path);
    if (certify->parsed()) return run_certify(case_path, gamma, beta);
    if (simulate->parsed())
      return run_simulate(case_path, scenario_path, schedule_spec, horizon, seed, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
