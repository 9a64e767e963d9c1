#include "gridmarket/case_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridmarket {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double to_num(const std::string& s, const std::string& origin, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    parse_fail(origin, line, "expected a number, got '" + s + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

CaseData parse_case(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string section;

  struct BusRow {
    BusRecord bus;
    double q, c, tau_b, tau_g;
    int line;
  };
  std::vector<BusRow> buses;
  std::vector<EdgeRecord> lines;
  std::vector<int> line_lineno;
  double tau_lambda = -1.0, rho = -1.0, sigma = -1.0;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = strip(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') parse_fail(origin, lineno, "malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "gains" && section != "buses" && section != "lines")
        parse_fail(origin, lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto tk = tokens(s);
    if (section == "gains") {
      if (tk.size() != 2) parse_fail(origin, lineno, "gains entries are 'name value'");
      const double v = to_num(tk[1], origin, lineno);
      if (tk[0] == "tau_lambda")
        tau_lambda = v;
      else if (tk[0] == "rho")
        rho = v;
      else if (tk[0] == "sigma")
        sigma = v;
      else
        parse_fail(origin, lineno, "unknown gain '" + tk[0] + "'");
      if (v <= 0.0) parse_fail(origin, lineno, "gains." + tk[0] + " must be positive");
    } else if (section == "buses") {
      if (tk.size() != 9)
        parse_fail(origin, lineno,
                   "bus rows are 'id M A V Pd q c tau_b tau_g' (9 columns)");
      BusRow row;
      row.line = lineno;
      row.bus.id = static_cast<int>(to_num(tk[0], origin, lineno));
      row.bus.M = to_num(tk[1], origin, lineno);
      row.bus.A = to_num(tk[2], origin, lineno);
      row.bus.V = to_num(tk[3], origin, lineno);
      row.bus.Pd = to_num(tk[4], origin, lineno);
      row.q = to_num(tk[5], origin, lineno);
      row.c = to_num(tk[6], origin, lineno);
      row.tau_b = to_num(tk[7], origin, lineno);
      row.tau_g = to_num(tk[8], origin, lineno);
      if (row.q <= 0.0)
        parse_fail(origin, lineno, "buses.q: must be strictly positive (strong convexity)");
      if (row.c < 0.0) parse_fail(origin, lineno, "buses.c: must be nonnegative");
      if (row.tau_b <= 0.0 || row.tau_g <= 0.0)
        parse_fail(origin, lineno, "buses.tau_b/tau_g: must be positive");
      buses.push_back(row);
    } else if (section == "lines") {
      if (tk.size() != 3) parse_fail(origin, lineno, "line rows are 'from to B' (3 columns)");
      EdgeRecord e;
      e.from = static_cast<int>(to_num(tk[0], origin, lineno));
      e.to = static_cast<int>(to_num(tk[1], origin, lineno));
      e.B = to_num(tk[2], origin, lineno);
      lines.push_back(e);
      line_lineno.push_back(lineno);
    } else {
      parse_fail(origin, lineno, "content before any section header");
    }
  }
  if (tau_lambda <= 0.0 || rho <= 0.0 || sigma <= 0.0)
    parse_fail(origin, lineno, "gains section must set tau_lambda, rho and sigma");
  if (buses.size() < 2) parse_fail(origin, lineno, "need at least 2 buses");

  std::sort(buses.begin(), buses.end(),
            [](const BusRow& a, const BusRow& b) { return a.bus.id < b.bus.id; });
  CaseData data;
  std::vector<BusRecord> bus_records;
  const int n = static_cast<int>(buses.size());
  data.cost.q.resize(n);
  data.cost.c.resize(n);
  data.gains.tau_b.resize(n);
  data.gains.tau_g.resize(n);
  for (int i = 0; i < n; ++i) {
    if (buses[i].bus.id != i + 1)
      parse_fail(origin, buses[i].line, "buses.id: ids must be exactly 1..n");
    bus_records.push_back(buses[i].bus);
    data.cost.q(i) = buses[i].q;
    data.cost.c(i) = buses[i].c;
    data.gains.tau_b(i) = buses[i].tau_b;
    data.gains.tau_g(i) = buses[i].tau_g;
  }
  data.gains.tau_lambda = tau_lambda;
  data.gains.rho = rho;
  data.gains.sigma = sigma;
  try {
    data.network = build_network(bus_records, lines);
  } catch (const std::exception& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  return data;
}

CaseData load_case(const std::string& path) { return parse_case(read_file(path), path); }

std::string serialize_case(const CaseData& d) {
  std::ostringstream os;
  os << "[gains]\n"
     << "tau_lambda " << fmt(d.gains.tau_lambda) << "\n"
     << "rho " << fmt(d.gains.rho) << "\n"
     << "sigma " << fmt(d.gains.sigma) << "\n\n[buses]\n";
  os << "# id M A V Pd q c tau_b tau_g\n";
  for (int i = 0; i < d.network.n; ++i) {
    os << (i + 1) << " " << fmt(d.network.M(i)) << " " << fmt(d.network.A(i)) << " "
       << fmt(d.network.V(i)) << " " << fmt(d.network.Pd(i)) << " " << fmt(d.cost.q(i))
       << " " << fmt(d.cost.c(i)) << " " << fmt(d.gains.tau_b(i)) << " "
       << fmt(d.gains.tau_g(i)) << "\n";
  }
  os << "\n[lines]\n# from to B\n";
  for (const auto& [i, j, B] : d.network.edges)
    os << i << " " << j << " " << fmt(B) << "\n";
  return os.str();
}

std::vector<ScenarioEvent> parse_scenario(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::vector<ScenarioEvent> events;
  bool in_block = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = strip(s);
    if (s.empty()) continue;
    const auto tk = tokens(s);
    if (tk[0] == "at") {
      if (in_block) parse_fail(origin, lineno, "nested 'at' block (missing 'end'?)");
      if (tk.size() != 2) parse_fail(origin, lineno, "'at' takes one time argument");
      ScenarioEvent ev;
      ev.t = to_num(tk[1], origin, lineno);
      if (!events.empty() && ev.t <= events.back().t)
        parse_fail(origin, lineno, "event times must be strictly increasing");
      events.push_back(ev);
      in_block = true;
    } else if (tk[0] == "end") {
      if (!in_block) parse_fail(origin, lineno, "'end' without 'at'");
      if (events.back().actions.empty())
        parse_fail(origin, lineno, "event block has no actions");
      in_block = false;
    } else {
      if (!in_block) parse_fail(origin, lineno, "action outside an 'at ... end' block");
      ScenarioAction a;
      if (tk[0] == "scale_all_loads" && tk.size() == 2) {
        a.kind = ScenarioAction::Kind::ScaleAllLoads;
        a.factor = to_num(tk[1], origin, lineno);
      } else if (tk[0] == "set_load" && tk.size() == 3) {
        a.kind = ScenarioAction::Kind::SetLoad;
        a.bus = static_cast<int>(to_num(tk[1], origin, lineno));
        a.Pd = to_num(tk[2], origin, lineno);
      } else if (tk[0] == "set_cost" && tk.size() == 4) {
        a.kind = ScenarioAction::Kind::SetCost;
        a.bus = static_cast<int>(to_num(tk[1], origin, lineno));
        a.q = to_num(tk[2], origin, lineno);
        a.c = to_num(tk[3], origin, lineno);
        if (a.q <= 0.0) parse_fail(origin, lineno, "set_cost: q must be positive");
      } else {
        parse_fail(origin, lineno, "unknown action '" + tk[0] + "'");
      }
      events.back().actions.push_back(a);
    }
  }
  if (in_block) parse_fail(origin, lineno, "unterminated 'at' block");
  return events;
}

std::vector<ScenarioEvent> load_scenario(const std::string& path) {
  return parse_scenario(read_file(path), path);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples[0].state.omega.size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",omega_" << i;
  for (int i = 1; i <= n; ++i) os << ",Pg_" << i;
  for (int i = 1; i <= n; ++i) os << ",b_" << i;
  os << ",lambda,V,W_eps\n";
  for (const auto& s : traj.samples) {
    os << fmt(s.t);
    for (int i = 0; i < n; ++i) os << "," << fmt(s.state.omega(i));
    for (int i = 0; i < n; ++i) os << "," << fmt(s.state.Pg(i));
    for (int i = 0; i < n; ++i) os << "," << fmt(s.state.b(i));
    os << "," << fmt(s.state.lambda) << "," << fmt(s.V) << "," << fmt(s.W_eps) << "\n";
  }
  return os.str();
}

std::string events_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,kind\n";
  for (const auto& e : traj.events) os << fmt(e.t) << "," << e.kind << "\n";
  return os.str();
}

std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
  const double W = 840, H = 520, ml = 80, mr = 20, mt = 40, mb = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!std::isfinite(s.t[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.t[i];
        ymin = ymax = s.y[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.t[i]);
        xmax = std::max(xmax, s.t[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                 "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5"};
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
     << "' viewBox='0 0 " << W << " " << H << "'>\n"
     << "<rect width='100%' height='100%' fill='white'/>\n"
     << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
     << "</text>\n";
  // axes
  os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
     << "' stroke='black'/>\n"
     << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
     << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + i * (xmax - xmin) / 5;
    const double yv = ymin + i * (ymax - ymin) / 5;
    char xb[32], yb[32];
    std::snprintf(xb, sizeof(xb), "%.4g", xv);
    std::snprintf(yb, sizeof(yb), "%.4g", yv);
    os << "<text x='" << px(xv) << "' y='" << H - mb + 18
       << "' text-anchor='middle' font-size='11'>" << xb << "</text>\n"
       << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
       << "' text-anchor='end' font-size='11'>" << yb << "</text>\n"
       << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << W - mr << "' y2='" << py(yv)
       << "' stroke='#dddddd'/>\n";
  }
  os << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12
     << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
     << "<text x='18' y='" << (mt + H - mb) / 2
     << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
     << (mt + H - mb) / 2 << ")'>" << y_label << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    os << "<polyline fill='none' stroke='" << colors[si % 15] << "' stroke-width='1.2' points='";
    // decimate very long series for file-size sanity
    const std::size_t stride = std::max<std::size_t>(1, s.t.size() / 4000);
    for (std::size_t i = 0; i < s.t.size(); i += stride)
      os << px(s.t[i]) << "," << py(s.y[i]) << " ";
    if (!s.t.empty() && (s.t.size() - 1) % stride != 0)
      os << px(s.t.back()) << "," << py(s.y.back());
    os << "'/>\n";
    if (!s.label.empty())
      os << "<text x='" << W - mr - 6 << "' y='" << mt + 14 + 14 * si
         << "' text-anchor='end' font-size='11' fill='" << colors[si % 15] << "'>" << s.label
         << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gridmarket
