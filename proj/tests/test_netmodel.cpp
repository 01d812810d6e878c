#include <doctest.h>

#include "helpers.hpp"
#include "voltsense/native_io.hpp"
#include "voltsense/netmodel.hpp"
#include "voltsense/sampling.hpp"

using namespace vsp;
using namespace vsp::net;

namespace {

const char* kTwoBusCase = R"(
function mpc = case2
% two-bus example
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0   0  0 0 1 1 0 23 1 1.05 0.90;
  2 1 100 20 0 0 1 1 0 23 1 1.05 0.90;
];
mpc.branch = [
  1 2 0.01 0.02 0 0 0 0 0 0 1 -360 360;
];
)";

}  // namespace

TEST_CASE("matpower: minimal two-bus case maps loads to negative injections") {
  Network net = parse_matpower(kTwoBusCase);
  REQUIRE(net.size() == 2);
  CHECK(net.base_mva() == 100.0);
  CHECK(net.buses()[0].kind == BusKind::slack);
  CHECK(net.buses()[1].kind == BusKind::pq);
  CHECK(net.buses()[1].p_nom == doctest::Approx(-1.0));
  CHECK(net.buses()[1].q_nom == doctest::Approx(-0.2));
  CHECK(net.buses()[1].v_min == doctest::Approx(0.90));
  CHECK(net.buses()[1].v_max == doctest::Approx(1.05));
  CHECK(net.n_pq() == 1);
}

TEST_CASE("matpower: branch status zero opens the line") {
  std::string text = kTwoBusCase;
  // second branch row, status column 0; keeps connectivity through row 1
  text.insert(text.find("];", text.find("mpc.branch")),
              "  1 2 0.05 0.05 0 0 0 0 0 0 0 -360 360;\n");
  Network net = parse_matpower(text);
  REQUIRE(net.lines().size() == 2);
  CHECK(net.lines()[0].status == LineStatus::closed);
  CHECK(net.lines()[1].status == LineStatus::open);
}

TEST_CASE("matpower: missing matrix is named in the error") {
  CHECK_THROWS_WITH_AS(parse_matpower("mpc.baseMVA = 100;\nmpc.bus = [1 3 0 0];"),
                       doctest::Contains("mpc.branch"), Error);
}

TEST_CASE("matpower: two slack buses fail validation") {
  std::string text = kTwoBusCase;
  auto pos = text.find("2 1 100");
  text.replace(pos, 7, "2 3 100");
  CHECK_THROWS_WITH_AS(parse_matpower(text), doctest::Contains("slack"), Error);
}

TEST_CASE("matpower: non-numeric token reports the line number") {
  std::string text = kTwoBusCase;
  text.replace(text.find("0.01"), 4, "zz01");
  try {
    parse_matpower(text);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
    CHECK(std::string(e.what()).find("zz01") != std::string::npos);
  }
}

TEST_CASE("admittance: single line with x = 0.1") {
  std::vector<Bus> buses(2);
  buses[0] = {1, BusKind::slack, 0.9, 1.1, 0, 0, {}};
  buses[1] = {2, BusKind::pq, 0.9, 1.1, 0, 0, {}};
  Network net({buses}, {{1, 2, 0.0, 0.1, 0.0}}, 1.0);
  auto y = build_admittance(net);
  CHECK(std::abs(y(0, 1) - std::complex<double>(0.0, 10.0)) < 1e-12);
  CHECK(std::abs(y(0, 0) - std::complex<double>(0.0, -10.0)) < 1e-12);
}

TEST_CASE("admittance: open lines contribute nothing") {
  std::vector<Bus> buses(2);
  buses[0] = {1, BusKind::slack, 0.9, 1.1, 0, 0, {}};
  buses[1] = {2, BusKind::pq, 0.9, 1.1, 0, 0, {}};
  std::vector<Line> lines = {{1, 2, 0.0, 0.1, 0.0},
                             {1, 2, 0.0, 0.2, 0.0, LineStatus::open}};
  Network net({buses}, std::move(lines), 1.0);
  auto y = build_admittance(net);
  CHECK(std::abs(y(0, 1) - std::complex<double>(0.0, 10.0)) < 1e-12);
}

TEST_CASE("admittance: star network row sums vanish without shunts") {
  std::vector<Bus> buses(4);
  for (int i = 0; i < 4; ++i)
    buses[i] = {i + 1, i == 0 ? BusKind::slack : BusKind::pq, 0.9, 1.1, 0, 0, {}};
  std::vector<Line> lines = {{1, 2, 0.01, 0.03, 0.0},
                             {1, 3, 0.02, 0.05, 0.0},
                             {1, 4, 0.015, 0.04, 0.0}};
  Network net({buses}, std::move(lines), 1.0);
  auto y = build_admittance(net);
  CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(y.row(i).sum()) < 1e-12);
}

TEST_CASE("apply_configuration: identity, purity, composition") {
  Network net = testutil::chain_network(5);
  Configuration empty{"empty", {}};
  Network same = apply_configuration(net, empty);
  CHECK(same.lines().size() == net.lines().size());

  // add a parallel standby line, then toggle it via a configuration
  std::vector<Line> lines = net.lines();
  lines.push_back({1, 5, 0.05, 0.1, 0.0, LineStatus::open});
  Network with_tie(net.buses(), lines, net.base_mva());
  Configuration tie_on{"tie_on", {{lines.size() - 1, LineStatus::closed}}};
  Network switched = apply_configuration(with_tie, tie_on);
  CHECK(switched.lines().back().status == LineStatus::closed);
  CHECK(with_tie.lines().back().status == LineStatus::open);  // input untouched

  Network twice = apply_configuration(switched, empty);
  for (std::size_t i = 0; i < twice.lines().size(); ++i)
    CHECK(twice.lines()[i].status == switched.lines()[i].status);
}

TEST_CASE("apply_configuration: disconnection is rejected by name") {
  Network net = testutil::chain_network(4);
  Configuration cut{"cut_middle", {{1, LineStatus::open}}};
  CHECK_THROWS_WITH_AS(apply_configuration(net, cut),
                       doctest::Contains("cut_middle"), Error);
}

TEST_CASE("leaves: chain has one leaf, star has several") {
  Network chain = testutil::chain_network(6);
  CHECK(leaf_buses(chain) == std::vector<int>{6});
  CHECK(is_radial(chain));
}

TEST_CASE("native: matpower -> native -> load round trip") {
  Network net = parse_matpower(kTwoBusCase);
  auto range = sampling::range_from_fractions(net, 0.5, 1.5);
  std::string text = serialize_native(net, {Configuration{"nominal", {}}}, range);
  NativeCase back = load_native(text);
  REQUIRE(back.network.size() == net.size());
  CHECK(back.network.base_mva() == net.base_mva());
  for (std::size_t i = 0; i < net.size(); ++i) {
    CHECK(back.network.buses()[i].id == net.buses()[i].id);
    CHECK(back.network.buses()[i].p_nom == net.buses()[i].p_nom);
    CHECK(back.network.buses()[i].q_nom == net.buses()[i].q_nom);
    CHECK(back.network.buses()[i].v_min == net.buses()[i].v_min);
  }
  REQUIRE(back.network.lines().size() == net.lines().size());
  CHECK(back.network.lines()[0].r == net.lines()[0].r);
  CHECK(back.network.lines()[0].x == net.lines()[0].x);
  CHECK(back.range.p_min == range.p_min);
  CHECK(back.configurations.size() == 1);
}

TEST_CASE("native: zero configurations default to the given topology") {
  const char* doc = R"({
    "network": {
      "base_mva": 1.0,
      "buses": [
        {"id": 1, "kind": "slack"},
        {"id": 2, "kind": "pq", "p_nom": -0.1, "q_nom": -0.05}
      ],
      "lines": [{"from": 1, "to": 2, "r": 0.01, "x": 0.02}]
    }
  })";
  NativeCase c = load_native(doc);
  REQUIRE(c.configurations.size() == 1);
  CHECK(c.configurations[0].name == "nominal");
  CHECK(c.configurations[0].line_status_overrides.empty());
}

TEST_CASE("native: schema violations carry the field path") {
  const char* doc = R"({
    "network": {
      "base_mva": 1.0,
      "buses": [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq"}],
      "lines": [{"from": 1, "to": 2, "r": 0.01}]
    }
  })";
  CHECK_THROWS_WITH_AS(load_native(doc), doctest::Contains("network.lines[0].x"),
                       Error);
}

TEST_CASE("native: line referencing an undeclared bus is rejected") {
  const char* doc = R"({
    "network": {
      "base_mva": 1.0,
      "buses": [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq"}],
      "lines": [{"from": 1, "to": 7, "r": 0.01, "x": 0.02}]
    }
  })";
  CHECK_THROWS_WITH_AS(load_native(doc), doctest::Contains("undeclared bus"), Error);
}

TEST_CASE("native: limits override bus values") {
  const char* doc = R"({
    "network": {
      "base_mva": 1.0,
      "buses": [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq", "v_min": 0.9}],
      "lines": [{"from": 1, "to": 2, "r": 0.01, "x": 0.02}]
    },
    "limits": {"v_min": 0.91, "v_max": 1.05}
  })";
  NativeCase c = load_native(doc);
  CHECK(c.network.buses()[1].v_min == doctest::Approx(0.91));
  CHECK(c.network.buses()[1].v_max == doctest::Approx(1.05));
}
