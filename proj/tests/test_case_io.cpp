#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "common.hpp"

using namespace gridmarket;

namespace {

const char* kMiniCase = R"(# minimal two-bus case
[gains]
tau_lambda 1
rho 1
sigma 1

[buses]
# id M A V Pd q c tau_b tau_g
1 1 1 1 0   1 1 1 1
2 1 1.2 1 1 2 1 1 1

[lines]
1 2 2
)";

}  // namespace

TEST_CASE("load_case: bundled benchmark files") {
  const CaseData c14 = gmtest::ieee14();
  CHECK(c14.network.n == 14);
  CHECK(c14.network.m == 20);
  CHECK(c14.gains.rho == doctest::Approx(900.0));
  CHECK(c14.gains.sigma == doctest::Approx(17.0));
  CHECK(c14.cost.q(0) == doctest::Approx(22.0));
  CHECK(c14.network.Pd.sum() > 0.0);

  const CaseData rho4 = load_case(gmtest::data_path("ieee14_rho4.case"));
  CHECK(rho4.gains.rho == doctest::Approx(4.0));
  CHECK((rho4.network.Pd - c14.network.Pd).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  const CaseData c2 = gmtest::twobus();
  CHECK(c2.network.n == 2);
  CHECK(c2.network.gamma(0) == doctest::Approx(2.0));

  CHECK_THROWS_WITH_AS(load_case(gmtest::data_path("missing.case")),
                       doctest::Contains("cannot open file"), std::runtime_error);
}

TEST_CASE("parse_case: comments, bus reordering and numeric values") {
  const CaseData c = parse_case(kMiniCase, "mini");
  CHECK(c.network.n == 2);
  CHECK(c.network.Pd(1) == doctest::Approx(1.0));
  CHECK(c.cost.q(1) == doctest::Approx(2.0));
  CHECK(c.network.A(1) == doctest::Approx(1.2));

  // buses listed out of order parse identically
  std::string swapped = kMiniCase;
  const auto p1 = swapped.find("1 1 1 1 0   1 1 1 1");
  const auto p2 = swapped.find("2 1 1.2 1 1 2 1 1 1");
  REQUIRE(p1 != std::string::npos);
  REQUIRE(p2 != std::string::npos);
  swapped = swapped.substr(0, p1) + "2 1 1.2 1 1 2 1 1 1\n1 1 1 1 0   1 1 1 1" +
            swapped.substr(p2 + std::string("2 1 1.2 1 1 2 1 1 1").size());
  const CaseData cswap = parse_case(swapped, "mini-swapped");
  CHECK(serialize_case(cswap) == serialize_case(c));
}

TEST_CASE("parse_case: diagnostics carry the origin and line number") {
  // nonconvex cost
  std::string bad = kMiniCase;
  const auto pos = bad.find("2 1 1.2 1 1 2 1 1 1");
  bad.replace(pos, std::string("2 1 1.2 1 1 2 1 1 1").size(), "2 1 1.2 1 1 0 1 1 1");
  CHECK_THROWS_WITH_AS(parse_case(bad, "bad.case"),
                       doctest::Contains("strictly positive (strong convexity)"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_case(bad, "bad.case"), doctest::Contains("bad.case:10"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(parse_case("[buses]\nnot a bus row\n", "x"),
                       doctest::Contains("9 columns"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_case("stray content\n", "x"),
                       doctest::Contains("before any section"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_case("[what]\n", "x"), doctest::Contains("unknown section"),
                       std::runtime_error);

  // disconnected graph surfaces the network validation error with the origin
  std::string disc2 = R"([gains]
tau_lambda 1
rho 1
sigma 1
[buses]
1 1 1 1 0 1 1 1 1
2 1 1 1 1 1 1 1 1
3 1 1 1 0 1 1 1 1
[lines]
1 2 1
)";
  CHECK_THROWS_WITH_AS(parse_case(disc2, "disc.case"), doctest::Contains("disconnected"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_case(disc2, "disc.case"), doctest::Contains("disc.case"),
                       std::runtime_error);
}

TEST_CASE("serialize_case: exact round trip") {
  for (const char* name : {"twobus.case", "ieee14.case", "ieee14_rho4.case"}) {
    const CaseData a = load_case(gmtest::data_path(name));
    const std::string text = serialize_case(a);
    const CaseData b = parse_case(text, name);
    CHECK(serialize_case(b) == text);  // idempotent
    CHECK((a.network.Pd - b.network.Pd).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.cost.q - b.cost.q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.gains.tau_b - b.gains.tau_b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.gains.rho == b.gains.rho);
  }
}

TEST_CASE("scenario parsing: bundled file and error paths") {
  const auto events = load_scenario(gmtest::data_path("staged_changes.scenario"));
  REQUIRE(events.size() == 2);
  CHECK(events[0].t == doctest::Approx(1.0));
  CHECK(events[1].t == doctest::Approx(15.0));
  CHECK(!events[0].actions.empty());
  CHECK(events[0].actions[0].kind == ScenarioAction::Kind::ScaleAllLoads);

  CHECK_THROWS_WITH_AS(parse_scenario("at 2\nscale_all_loads 1.1\nend\nat 1\nset_load 1 2\nend\n", "s"),
                       doctest::Contains("strictly increasing"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_scenario("at 1\nfrobnicate 3\nend\n", "s"),
                       doctest::Contains("unknown action"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_scenario("at 1\nset_load 1 2\n", "s"),
                       doctest::Contains("unterminated"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_scenario("at 1\nend\n", "s"), doctest::Contains("no actions"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_scenario("set_load 1 2\n", "s"),
                       doctest::Contains("outside"), std::runtime_error);
}

TEST_CASE("trajectory and event CSV: schema and exact numeric round trip") {
  const CaseData cs = gmtest::twobus();
  const TreeCoordinates tree = select_spanning_tree(cs.network);
  const SystemState xbar = find_equilibrium(cs.network, tree, cs.cost, cs.gains);
  SystemState x0 = xbar;
  x0.omega.array() += 0.05;
  SchedulePolicy p;
  p.xi = 0.001;
  p.N = 10;
  const Trajectory traj = simulate(cs.network, tree, cs.cost, cs.gains,
                                   generate_schedule(p, 0.05, 0), {}, x0);

  const std::string csv = trajectory_csv(traj);
  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,omega_1,omega_2,Pg_1,Pg_2,b_1,b_2,lambda,V,W_eps");

  // values round-trip exactly through the %.17g formatting
  std::string line;
  std::size_t row = 0;
  double prev_t = -1.0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 10);
    const auto& s = traj.samples[row];
    CHECK(vals[0] == s.t);
    CHECK(vals[1] == s.state.omega(0));
    CHECK(vals[3] == s.state.Pg(0));
    CHECK(vals[5] == s.state.b(0));
    CHECK(vals[7] == s.state.lambda);
    CHECK(vals[8] == s.V);
    CHECK(vals[9] == s.W_eps);
    CHECK(vals[0] > prev_t);  // strictly increasing timestamps
    prev_t = vals[0];
    ++row;
  }
  CHECK(row == traj.samples.size());

  const std::string ecsv = events_csv(traj);
  CHECK(ecsv.rfind("t,kind\n", 0) == 0);
  CHECK(ecsv.find("market-clear") != std::string::npos);
  CHECK(ecsv.find("bid-update") != std::string::npos);
  CHECK(ecsv.find("iso-update") != std::string::npos);
}

TEST_CASE("render_svg_plot: well-formed output with one polyline per series") {
  std::vector<PlotSeries> series(2);
  series[0].label = "a";
  series[1].label = "b";
  for (int i = 0; i < 100; ++i) {
    series[0].t.push_back(0.01 * i);
    series[0].y.push_back(std::sin(0.1 * i));
    series[1].t.push_back(0.01 * i);
    series[1].y.push_back(std::cos(0.1 * i));
  }
  const std::string svg = render_svg_plot("demo", "time", "value", series);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0, at = 0;
  while ((at = svg.find("<polyline", at)) != std::string::npos) {
    ++polylines;
    ++at;
  }
  CHECK(polylines == 2);
  CHECK(svg.find(">demo<") != std::string::npos);
  CHECK(svg.find(">a<") != std::string::npos);
  CHECK(svg.find(">b<") != std::string::npos);
}
