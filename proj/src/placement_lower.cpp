#include <algorithm>
#include <cmath>

#include "placement_internal.hpp"

namespace vsp::place {

using cla::CLA;
using cla::CLABundle;

namespace detail {

std::pair<double, double> affine_range(const std::vector<double>& a1, double a0,
                                       const sampling::InjectionRange& range) {
  const std::size_t m = range.size();
  double lo = a0, hi = a0;
  for (std::size_t j = 0; j < m; ++j) {
    double c = a1[j];
    lo += c * (c >= 0 ? range.p_min[j] : range.p_max[j]);
    hi += c * (c >= 0 ? range.p_max[j] : range.p_min[j]);
    double cq = a1[m + j];
    lo += cq * (cq >= 0 ? range.q_min[j] : range.q_max[j]);
    hi += cq * (cq >= 0 ? range.q_max[j] : range.q_min[j]);
  }
  return {lo, hi};
}

GridSlots lower_grid(double v_min, double eps, int d, bool collapse) {
  GridSlots g;
  g.volts.push_back(0.0);
  if (collapse) {
    g.volts.push_back(v_min);
    return g;
  }
  for (int t = 0; t < d; ++t) g.volts.push_back(v_min + t * eps);
  return g;
}

GridSlots upper_grid(double v_max, double eps, int d, bool collapse) {
  GridSlots g;
  g.volts.push_back(0.0);
  if (collapse) {
    g.volts.push_back(v_max);
    return g;
  }
  for (int t = 0; t < d; ++t) g.volts.push_back(v_max - t * eps);
  return g;
}

double min_sampled_v(const ConfigCase& cc, std::size_t bus_index) {
  double mn = kInfVolt;
  for (const auto& sol : cc.samples->solutions) mn = std::min(mn, sol.v[bus_index]);
  if (cc.extra_samples)
    for (const auto& sol : cc.extra_samples->solutions)
      mn = std::min(mn, sol.v[bus_index]);
  return mn;
}

double max_sampled_v(const ConfigCase& cc, std::size_t bus_index) {
  double mx = -kInfVolt;
  for (const auto& sol : cc.samples->solutions) mx = std::max(mx, sol.v[bus_index]);
  if (cc.extra_samples)
    for (const auto& sol : cc.extra_samples->solutions)
      mx = std::max(mx, sol.v[bus_index]);
  return mx;
}

}  // namespace detail

void PlacementSpec::validate() const {
  if (configs.empty()) fail(ErrorCode::validation, "placement: no configurations");
  if (!(epsilon > 0)) fail(ErrorCode::validation, "placement: epsilon must be positive");
  if (d_steps < 2) fail(ErrorCode::validation, "placement: need at least 2 grid steps");
  if (delta < 0) fail(ErrorCode::validation, "placement: delta must be nonnegative");
  if (!(big_m > 0)) fail(ErrorCode::validation, "placement: big_m must be positive");
  if (!(dual_bound > 0)) fail(ErrorCode::validation, "placement: dual_bound must be positive");
  const std::size_t m = configs.front().network.n_pq();
  for (const auto& cc : configs) {
    if (cc.network.n_pq() != m)
      fail(ErrorCode::validation, "placement: configurations disagree on PQ count");
    if (cc.bundle.size() != m)
      fail(ErrorCode::validation,
           "placement: bundle for '" + cc.name + "' does not cover every PQ bus");
    if (!cc.samples || cc.samples->size() == 0)
      fail(ErrorCode::validation,
           "placement: configuration '" + cc.name + "' has no screening samples");
  }
  if (range.size() != m)
    fail(ErrorCode::validation, "placement: injection range does not match PQ count");
}

RiskSets screen_risk(const ConfigCase& cc, double margin) {
  RiskSets out;
  const auto& pq = cc.network.pq_indices();
  for (std::size_t a = 0; a < pq.size(); ++a) {
    const net::Bus& bus = cc.network.buses()[pq[a]];
    if (detail::min_sampled_v(cc, pq[a]) < bus.v_min + margin) out.lower.push_back(a);
    if (detail::max_sampled_v(cc, pq[a]) > bus.v_max - margin) out.upper.push_back(a);
  }
  return out;
}

DualData build_dual_data(const CLABundle& bundle,
                         const sampling::InjectionRange& range,
                         const net::Network& net) {
  const std::size_t m = net.n_pq();
  if (bundle.size() != m)
    fail(ErrorCode::validation, "dual data: bundle does not cover every PQ bus");
  const std::size_t xdim = 2 * m;
  DualData dd;
  dd.n_pq = m;
  dd.a = Eigen::MatrixXd::Zero(xdim, 4 * m + 2 * m);
  dd.b_const = Eigen::VectorXd::Zero(4 * m + 2 * m);

  // Box blocks: -I against the upper bounds, I against the lower bounds.
  for (std::size_t t = 0; t < xdim; ++t) {
    dd.a(t, t) = -1.0;
    dd.a(t, xdim + t) = 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) {
    dd.b_const[j] = -range.p_max[j];
    dd.b_const[m + j] = -range.q_max[j];
    dd.b_const[xdim + j] = range.p_min[j];
    dd.b_const[xdim + m + j] = range.q_min[j];
  }
  // Sensor blocks: over coefficients, then negated under coefficients.
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t t = 0; t < xdim; ++t) {
      dd.a(t, 2 * xdim + j) = bundle.over[j].a1[t];
      dd.a(t, 2 * xdim + m + j) = -bundle.under[j].a1[t];
    }
    dd.b_const[dd.lower_entry(j)] = -bundle.over[j].a0;
    dd.b_const[dd.upper_entry(j)] = bundle.under[j].a0;
  }
  return dd;
}

LowerLevelResult solve_lower_level(const net::Network& net,
                                   const CLABundle& bundle,
                                   const sampling::InjectionRange& range,
                                   const Thresholds& thr, int bus, bool upper,
                                   OwnRowMode own_row) {
  const std::size_t m = net.n_pq();
  const std::size_t target = net.pq_position(net.index_of(bus));
  if (target == net::Network::npos)
    fail(ErrorCode::validation, "lower level: bus " + std::to_string(bus) +
                                    " is not a PQ bus");

  lp::LinearModel model;
  model.set_name("lower_level");
  for (std::size_t j = 0; j < m; ++j)
    model.add_var("p" + std::to_string(j), range.p_min[j], range.p_max[j]);
  for (std::size_t j = 0; j < m; ++j)
    model.add_var("q" + std::to_string(j), range.q_min[j], range.q_max[j]);

  auto add_row = [&](const CLA& c, lp::Relation rel, double rhs_native,
                     const std::string& name) {
    std::vector<lp::Term> terms;
    terms.reserve(2 * m);
    for (std::size_t t = 0; t < 2 * m; ++t)
      if (c.a1[t] != 0.0) terms.push_back({static_cast<int>(t), c.a1[t]});
    model.add_constraint(name, std::move(terms), rel, rhs_native - c.a0);
    return static_cast<int>(model.constraints().size()) - 1;
  };

  std::vector<int> lower_rows(m, -1), upper_rows(m, -1);
  for (std::size_t j = 0; j < m; ++j) {
    bool own = j == target;
    if (own && own_row == OwnRowMode::excluded) continue;
    if (thr.lower[j]) {
      const CLA& c = own && own_row == OwnRowMode::anchored && !upper
                         ? bundle.under[j]
                         : bundle.over[j];
      lower_rows[j] = add_row(c, lp::Relation::ge, *thr.lower[j],
                              "lo" + std::to_string(j));
    }
    if (thr.upper[j]) {
      const CLA& c = own && own_row == OwnRowMode::anchored && upper
                         ? bundle.over[j]
                         : bundle.under[j];
      upper_rows[j] = add_row(c, lp::Relation::le, *thr.upper[j],
                              "up" + std::to_string(j));
    }
  }

  const CLA& objective_cla = upper ? bundle.over[target] : bundle.under[target];
  std::vector<lp::Term> obj;
  for (std::size_t t = 0; t < 2 * m; ++t)
    if (objective_cla.a1[t] != 0.0)
      obj.push_back({static_cast<int>(t), objective_cla.a1[t]});
  model.set_objective(upper ? lp::Sense::maximize : lp::Sense::minimize,
                      std::move(obj), objective_cla.a0);

  lp::SolveResult res = lp::solve_lp(model);
  LowerLevelResult out;
  out.lower_row_duals.assign(m, 0.0);
  out.upper_row_duals.assign(m, 0.0);
  if (res.status == lp::SolveStatus::infeasible) {
    // No alarm-free operating point exists; certification is vacuous.
    out.feasible = false;
    out.value = upper ? -lp::kInf : lp::kInf;
    return out;
  }
  if (res.status != lp::SolveStatus::optimal)
    fail(ErrorCode::numeric, "lower level LP did not solve to optimality");
  out.value = res.objective;
  for (std::size_t j = 0; j < m; ++j) {
    if (lower_rows[j] >= 0) out.lower_row_duals[j] = res.duals[lower_rows[j]];
    if (upper_rows[j] >= 0) out.upper_row_duals[j] = res.duals[upper_rows[j]];
  }
  return out;
}

double solve_dual_route(const DualData& dd, const CLABundle& bundle,
                        const Thresholds& thr, std::size_t pq_pos, bool upper) {
  const std::size_t m = dd.n_pq;
  const std::size_t xdim = 2 * m;
  Eigen::VectorXd b = dd.b_const;
  std::vector<int> cols;  // active dual components
  for (std::size_t t = 0; t < 2 * xdim; ++t) cols.push_back(static_cast<int>(t));
  for (std::size_t j = 0; j < m; ++j) {
    if (thr.lower[j]) {
      b[dd.lower_entry(j)] += *thr.lower[j];
      cols.push_back(static_cast<int>(dd.lower_entry(j)));
    }
    if (thr.upper[j]) {
      b[dd.upper_entry(j)] -= *thr.upper[j];
      cols.push_back(static_cast<int>(dd.upper_entry(j)));
    }
  }

  const CLA& objective_cla = upper ? bundle.over[pq_pos] : bundle.under[pq_pos];
  lp::LinearModel model;
  model.set_name("lower_level_dual");
  // Lower problems carry nonnegative duals, upper problems nonpositive.
  for (int c : cols)
    model.add_var("y" + std::to_string(c), upper ? -lp::kInf : 0.0,
                  upper ? 0.0 : lp::kInf);
  for (std::size_t t = 0; t < xdim; ++t) {
    std::vector<lp::Term> terms;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double coeff = dd.a(t, cols[k]);
      if (coeff != 0.0) terms.push_back({static_cast<int>(k), coeff});
    }
    model.add_constraint("s" + std::to_string(t), std::move(terms),
                         lp::Relation::eq, objective_cla.a1[t]);
  }
  std::vector<lp::Term> obj;
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (b[cols[k]] != 0.0) obj.push_back({static_cast<int>(k), b[cols[k]]});
  model.set_objective(upper ? lp::Sense::minimize : lp::Sense::maximize,
                      std::move(obj), objective_cla.a0);
  lp::SolveResult res = lp::solve_lp(model);
  if (res.status != lp::SolveStatus::optimal)
    fail(ErrorCode::numeric, "dual-route lower level did not solve to optimality");
  return res.objective;
}

}  // namespace vsp::place
