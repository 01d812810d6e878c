#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "voltsense/lpcore.hpp"
#include "voltsense/netmodel.hpp"

namespace testutil {

// Deterministic uniform doubles from the standardized mt19937_64 stream.
class Rand {
 public:
  explicit Rand(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Radial chain 1-2-...-n with identical segments and uniform loads.
inline vsp::net::Network chain_network(int n, double r = 0.02, double x = 0.04,
                                       double load_p = -0.05,
                                       double load_q = -0.02) {
  std::vector<vsp::net::Bus> buses;
  for (int i = 1; i <= n; ++i) {
    vsp::net::Bus b;
    b.id = i;
    b.kind = i == 1 ? vsp::net::BusKind::slack : vsp::net::BusKind::pq;
    b.v_min = 0.9;
    b.v_max = 1.1;
    b.p_nom = i == 1 ? 0.0 : load_p;
    b.q_nom = i == 1 ? 0.0 : load_q;
    buses.push_back(b);
  }
  std::vector<vsp::net::Line> lines;
  for (int i = 1; i < n; ++i) lines.push_back({i, i + 1, r, x, 0.0});
  return vsp::net::Network(std::move(buses), std::move(lines), 1.0);
}

// Feasible-by-construction random LP with nonnegative costs (never
// unbounded): min c'x over x >= 0 subject to mixed <= / >= rows.
inline vsp::lp::LinearModel random_lp(Rand& rng, int rows = 8, int cols = 12) {
  vsp::lp::LinearModel m;
  std::vector<double> x0(cols);
  for (int j = 0; j < cols; ++j) {
    m.add_var("x" + std::to_string(j), 0.0, vsp::lp::kInf);
    x0[j] = rng.uniform(0.0, 1.0);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<vsp::lp::Term> terms;
    double act = 0.0;
    for (int j = 0; j < cols; ++j) {
      double a = rng.uniform(-1.0, 2.0);
      if (std::abs(a) < 0.15) continue;  // keep some sparsity
      terms.push_back({j, a});
      act += a * x0[j];
    }
    if (terms.empty()) terms.push_back({0, 1.0});
    bool le = rng.uniform(0.0, 1.0) < 0.5;
    double slack = rng.uniform(0.1, 2.0);
    m.add_constraint("r" + std::to_string(i), std::move(terms),
                     le ? vsp::lp::Relation::le : vsp::lp::Relation::ge,
                     le ? act + slack : act - slack);
  }
  std::vector<vsp::lp::Term> obj;
  for (int j = 0; j < cols; ++j) obj.push_back({j, rng.uniform(0.2, 2.0)});
  m.set_objective(vsp::lp::Sense::minimize, std::move(obj), rng.uniform(-1.0, 1.0));
  return m;
}

// Brute-force vertex enumeration for the random_lp family (all nonbasic
// columns sit at zero). Returns the optimal objective value.
double enumerate_lp_optimum(const vsp::lp::LinearModel& m);

// Random MILP with <= max_bin binaries plus a few bounded continuous vars,
// feasible by construction.
vsp::lp::LinearModel random_milp(Rand& rng, int max_bin = 12);

// Exhaustive 2^k oracle: fixes every binary pattern and solves the remaining
// LP. Returns the optimal objective (infinity when all patterns infeasible).
double enumerate_milp_optimum(const vsp::lp::LinearModel& m);

}  // namespace testutil
