#pragma once

#include <string>
#include <vector>

#include "gridmarket/coupled_dynamics.hpp"
#include "gridmarket/hybrid_sim.hpp"

namespace gridmarket {

struct CaseData {
  PowerNetwork network;
  CostModel cost;
  GainSet gains;
};

/// Parse a structured-text case file; errors carry the file path and line number.
CaseData load_case(const std::string& path);
CaseData parse_case(const std::string& text, const std::string& origin = "<string>");
std::string serialize_case(const CaseData& data);

std::vector<ScenarioEvent> load_scenario(const std::string& path);
std::vector<ScenarioEvent> parse_scenario(const std::string& text,
                                          const std::string& origin = "<string>");

std::string trajectory_csv(const Trajectory& traj);
std::string events_csv(const Trajectory& traj);

/// Minimal multi-series SVG line chart.
struct PlotSeries {
  std::string label;
  std::vector<double> t, y;
};
std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace gridmarket
