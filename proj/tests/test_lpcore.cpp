#include <doctest.h>

#include "helpers.hpp"
#include "voltsense/lpcore.hpp"

using namespace vsp::lp;
using testutil::Rand;

TEST_CASE("lp: single bound row") {
  LinearModel m;
  int x = m.add_var("x", -kInf, kInf);
  m.add_constraint("lb", {{x, 1.0}}, Relation::ge, 3.0);
  m.set_objective(Sense::minimize, {{x, 1.0}});
  SolveResult r = solve_lp(m);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.duals[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lp: infeasible pair") {
  LinearModel m;
  int x = m.add_var("x", -kInf, kInf);
  m.add_constraint("a", {{x, 1.0}}, Relation::ge, 1.0);
  m.add_constraint("b", {{x, 1.0}}, Relation::le, 0.0);
  m.set_objective(Sense::minimize, {{x, 1.0}});
  CHECK(solve_lp(m).status == SolveStatus::infeasible);
}

TEST_CASE("lp: unbounded") {
  LinearModel m;
  int x = m.add_var("x", 0.0, kInf);
  m.set_objective(Sense::maximize, {{x, 1.0}});
  CHECK(solve_lp(m).status == SolveStatus::unbounded);
}

TEST_CASE("lp: maximize with equality and bounds") {
  // max 3a + 2b s.t. a + b = 4, a in [0, 3], b in [0, 3]
  LinearModel m;
  int a = m.add_var("a", 0.0, 3.0);
  int b = m.add_var("b", 0.0, 3.0);
  m.add_constraint("sum", {{a, 1.0}, {b, 1.0}}, Relation::eq, 4.0);
  m.set_objective(Sense::maximize, {{a, 3.0}, {b, 2.0}});
  SolveResult r = solve_lp(m);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(11.0));
  CHECK(r.x[a] == doctest::Approx(3.0));
  CHECK(r.x[b] == doctest::Approx(1.0));
}

TEST_CASE("lp: vertex enumeration oracle on random instances") {
  Rand rng(20240601);
  for (int inst = 0; inst < 40; ++inst) {
    LinearModel m = testutil::random_lp(rng);
    SolveResult r = solve_lp(m);
    REQUIRE_MESSAGE(r.status == SolveStatus::optimal, "instance ", inst);
    double oracle = testutil::enumerate_lp_optimum(m);
    CHECK_MESSAGE(std::abs(r.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)),
                  "instance ", inst, " solver=", r.objective, " oracle=", oracle);
    CHECK(r.duality_gap <= 1e-8 * std::max(1.0, std::abs(r.objective)));
    CHECK(r.primal_infeas <= 1e-7);
  }
}

TEST_CASE("lp: determinism") {
  Rand rng(7);
  LinearModel m = testutil::random_lp(rng, 6, 9);
  SolveResult a = solve_lp(m);
  SolveResult b = solve_lp(m);
  REQUIRE(a.status == SolveStatus::optimal);
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("milp: fixed binaries reduce to lp") {
  LinearModel m;
  int z = m.add_var("z", 1.0, 1.0, VarKind::binary);
  int x = m.add_var("x", 0.0, 10.0);
  m.add_constraint("c", {{x, 1.0}, {z, -4.0}}, Relation::ge, 0.0);
  m.set_objective(Sense::minimize, {{x, 1.0}});
  SolveResult r = solve_milp(m);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(4.0));
}

TEST_CASE("milp: exhaustive enumeration oracle on random instances") {
  Rand rng(99123);
  for (int inst = 0; inst < 30; ++inst) {
    LinearModel m = testutil::random_milp(rng, 8);
    MilpOptions opts;
    opts.gap = 1e-9;
    SolveResult r = solve_milp(m, opts);
    double oracle = testutil::enumerate_milp_optimum(m);
    if (!std::isfinite(oracle)) {
      CHECK_MESSAGE(r.status == SolveStatus::infeasible, "instance ", inst);
      continue;
    }
    REQUIRE_MESSAGE(r.status == SolveStatus::optimal, "instance ", inst);
    CHECK_MESSAGE(std::abs(r.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)),
                  "instance ", inst, " solver=", r.objective, " oracle=", oracle);
  }
}

TEST_CASE("milp: identical knapsack items keep a unique objective") {
  // max sum x_i, each weight 3, capacity 7 -> any 2 items
  LinearModel m;
  std::vector<Term> w, obj;
  for (int i = 0; i < 5; ++i) {
    int v = m.add_var("item" + std::to_string(i), 0.0, 1.0, VarKind::binary);
    w.push_back({v, 3.0});
    obj.push_back({v, 1.0});
  }
  m.add_constraint("cap", std::move(w), Relation::le, 7.0);
  m.set_objective(Sense::maximize, std::move(obj));
  SolveResult r = solve_milp(m);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(2.0));
  int picked = 0;
  for (double v : r.x) picked += v > 0.5 ? 1 : 0;
  CHECK(picked == 2);
}

TEST_CASE("mccormick: exact for binary factors") {
  LinearModel m;
  int x = m.add_var("x", 0.0, 2.0);
  int y = m.add_var("y", 0.0, 1.0, VarKind::binary);
  int z = add_binary_product(m, "z", x, y);

  SUBCASE("y = 0 forces z = 0") {
    m.add_constraint("fix_x", {{x, 1.0}}, Relation::eq, 1.3);
    m.add_constraint("fix_y", {{y, 1.0}}, Relation::eq, 0.0);
    m.set_objective(Sense::maximize, {{z, 1.0}});
    SolveResult r = solve_milp(m);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[z] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("y = 1 forces z = x") {
    m.add_constraint("fix_x", {{x, 1.0}}, Relation::eq, 1.3);
    m.add_constraint("fix_y", {{y, 1.0}}, Relation::eq, 1.0);
    m.set_objective(Sense::minimize, {{z, 1.0}});
    SolveResult r = solve_milp(m);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[z] == doctest::Approx(1.3));
  }
}

TEST_CASE("mccormick: grid check against the exact product") {
  for (int yv = 0; yv <= 1; ++yv) {
    for (int k = 0; k <= 1000; ++k) {  // x grid over [-5, 5] at 1e-2 resolution
      double xv = -5.0 + k * 0.01;
      LinearModel m;
      int x = m.add_var("x", -5.0, 5.0);
      int y = m.add_var("y", 0.0, 1.0, VarKind::binary);
      int z = add_binary_product(m, "z", x, y);
      m.add_constraint("fx", {{x, 1.0}}, Relation::eq, xv);
      m.add_constraint("fy", {{y, 1.0}}, Relation::eq, static_cast<double>(yv));
      m.set_objective(Sense::maximize, {{z, 1.0}});
      SolveResult hi = solve_milp(m);
      REQUIRE(hi.status == SolveStatus::optimal);
      CHECK(hi.x[z] == doctest::Approx(xv * yv).epsilon(1e-7));
      m.set_objective(Sense::minimize, {{z, 1.0}});
      SolveResult lo = solve_milp(m);
      REQUIRE(lo.status == SolveStatus::optimal);
      CHECK(lo.x[z] == doctest::Approx(xv * yv).epsilon(1e-7));
    }
  }
}

TEST_CASE("mccormick: unbounded factor is rejected") {
  LinearModel m;
  int x = m.add_var("x", 0.0, kInf);
  int y = m.add_var("y", 0.0, 1.0, VarKind::binary);
  CHECK_THROWS_AS(add_binary_product(m, "z", x, y), vsp::Error);
}

TEST_CASE("export: empty model gives a valid mps skeleton") {
  LinearModel m;
  std::string mps = export_model(m, "mps");
  for (const char* section : {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"})
    CHECK_MESSAGE(mps.find(section) != std::string::npos, "missing ", section);
}

TEST_CASE("export: integrality markers bracket binary columns") {
  LinearModel m;
  m.add_var("x", 0.0, 1.0);
  m.add_var("b", 0.0, 1.0, VarKind::binary);
  m.add_constraint("r", {{0, 1.0}, {1, 2.0}}, Relation::le, 2.0);
  m.set_objective(Sense::minimize, {{0, 1.0}, {1, 1.0}});
  std::string mps = export_model(m, "mps");
  CHECK(mps.find("'INTORG'") != std::string::npos);
  CHECK(mps.find("'INTEND'") != std::string::npos);
  CHECK(mps.find("BV") != std::string::npos);
}

TEST_CASE("export: bilinear terms only travel through model_json") {
  LinearModel m;
  int a = m.add_var("a", 0.0, 1.0);
  int b = m.add_var("b", 0.0, 1.0);
  m.add_bilinear_constraint("bl", {{a, 1.0}}, {{a, b, 1.0}}, Relation::le, 1.0);
  m.set_objective(Sense::minimize, {{a, 1.0}});
  CHECK_THROWS_WITH_AS(export_model(m, "mps"),
                       doctest::Contains("model_json"), vsp::Error);
  std::string dump = export_model(m, "model_json");
  LinearModel back = import_model_json(dump);
  CHECK(back.has_bilinear());
  CHECK(export_model(back, "model_json") == dump);
}

TEST_CASE("model_json: round trip preserves the solve result") {
  Rand rng(5150);
  LinearModel m = testutil::random_lp(rng, 7, 10);
  LinearModel back = import_model_json(export_model(m, "model_json"));
  SolveResult a = solve_lp(m);
  SolveResult b = solve_lp(back);
  REQUIRE(a.status == SolveStatus::optimal);
  REQUIRE(b.status == SolveStatus::optimal);
  CHECK(a.objective == b.objective);
  CHECK(a.x == b.x);
}
