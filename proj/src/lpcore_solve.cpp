#include <algorithm>
#include <cmath>
#include <queue>

#include "voltsense/lpcore_internal.hpp"

namespace vsp::lp {

namespace detail {

namespace {

double primal_infeasibility(const LinearModel& m, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < m.vars().size(); ++j) {
    const Variable& v = m.vars()[j];
    double scale = 1.0 + std::abs(x[j]);
    if (std::isfinite(v.lower)) worst = std::max(worst, (v.lower - x[j]) / scale);
    if (std::isfinite(v.upper)) worst = std::max(worst, (x[j] - v.upper) / scale);
  }
  for (const Constraint& c : m.constraints()) {
    double act = 0.0, mag = 0.0;
    for (const Term& t : c.terms) {
      act += t.coeff * x[t.var];
      mag += std::abs(t.coeff * x[t.var]);
    }
    double scale = 1.0 + std::abs(c.rhs) + mag;
    double viol = 0.0;
    switch (c.rel) {
      case Relation::le: viol = act - c.rhs; break;
      case Relation::ge: viol = c.rhs - act; break;
      case Relation::eq: viol = std::abs(act - c.rhs); break;
    }
    worst = std::max(worst, viol / scale);
  }
  return worst;
}

}  // namespace

SolveResult finalize_lp_result(const LinearModel& m, const StandardForm& f,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& up,
                               const RawResult& raw, bool audit) {
  SolveResult res;
  res.status = raw.status;
  res.iterations = raw.iterations;
  if (raw.status != SolveStatus::optimal) return res;

  const double sgn = m.sense() == Sense::maximize ? -1.0 : 1.0;
  res.x.assign(raw.x.data(), raw.x.data() + f.n_struct);

  double obj_user = m.objective_constant();
  for (const Term& t : m.objective()) obj_user += t.coeff * res.x[t.var];
  res.objective = obj_user;

  res.duals.resize(f.m);
  for (int i = 0; i < f.m; ++i) res.duals[i] = sgn * raw.y[i];
  res.reduced_costs.resize(f.n_struct);
  for (int j = 0; j < f.n_struct; ++j) res.reduced_costs[j] = sgn * raw.d[j];

  res.primal_infeas = primal_infeasibility(m, res.x);

  // Strong duality in the computational form: the dual objective adds the
  // bound contributions of nonbasic columns to y^T b.
  double primal_int = f.c.dot(raw.x.head(f.n_struct));
  double dual_int = raw.y.dot(f.b);
  for (int j = 0; j < f.n_struct + f.m; ++j) {
    if (std::abs(raw.d[j]) < 1e-14) continue;
    dual_int += raw.d[j] * raw.x[j];
  }
  res.duality_gap = std::abs(primal_int - dual_int);

  if (audit) {
    if (res.primal_infeas > 1e-7)
      fail(ErrorCode::numeric, "lp solve: optimal result violates primal feasibility");
    if (res.duality_gap > 1e-8 * std::max(1.0, std::abs(primal_int)))
      fail(ErrorCode::numeric, "lp solve: strong duality audit failed");
    double compl_worst = 0.0;
    for (int i = 0; i < f.m; ++i) {
      const Constraint& c = m.constraints()[i];
      if (c.rel == Relation::eq) continue;
      double act = 0.0, mag = 0.0;
      for (const Term& t : c.terms) {
        act += t.coeff * res.x[t.var];
        mag += std::abs(t.coeff * res.x[t.var]);
      }
      double slack = c.rhs - act;
      compl_worst = std::max(
          compl_worst, std::abs(res.duals[i] * slack) /
                           ((1.0 + std::abs(res.duals[i])) * (1.0 + std::abs(c.rhs) + mag)));
    }
    if (compl_worst > 1e-6)
      fail(ErrorCode::numeric, "lp solve: complementary slackness audit failed");
  }
  (void)lo;
  (void)up;
  return res;
}

}  // namespace detail

SolveResult solve_lp(const LinearModel& m, const LpOptions& opts) {
  if (m.has_binaries())
    fail(ErrorCode::validation, "solve_lp: model contains binary variables");
  detail::StandardForm f = detail::standardize(m);
  detail::RawResult raw = detail::solve_standard_form(f, f.lo, f.up, opts);
  return detail::finalize_lp_result(m, f, f.lo, f.up, raw, true);
}

namespace {

struct Node {
  double bound;
  std::int64_t id;
  std::vector<std::pair<int, double>> fixes;  // binary var -> 0/1
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

SolveResult solve_milp(const LinearModel& m, const MilpOptions& opts) {
  if (opts.gap < 0) fail(ErrorCode::validation, "solve_milp: gap must be nonnegative");
  if (!m.has_binaries()) {
    SolveResult r = solve_lp(m, opts.lp);
    r.mip_gap = 0.0;
    return r;
  }
  detail::StandardForm f = detail::standardize(m);
  const double sgn = m.sense() == Sense::maximize ? -1.0 : 1.0;

  std::vector<int> binaries;
  for (std::size_t j = 0; j < m.vars().size(); ++j)
    if (m.vars()[j].kind == VarKind::binary) binaries.push_back(static_cast<int>(j));

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push({-kInf, next_id++, {}});

  double incumbent = kInf;  // internal (minimize) objective
  detail::RawResult best_raw;
  SolveResult res;
  res.nodes = 0;
  res.iterations = 0;

  Eigen::VectorXd lo(f.lo.size()), up(f.up.size());
  bool root = true;
  double best_open_bound = -kInf;

  while (!open.empty()) {
    if (res.nodes >= opts.node_limit) break;
    Node node = open.top();
    open.pop();
    best_open_bound = open.empty() ? node.bound : std::min(node.bound, open.top().bound);

    if (std::isfinite(incumbent)) {
      double glb = std::min(node.bound, best_open_bound);
      double gap = (incumbent - glb) / std::max(1e-10, std::abs(incumbent));
      if (gap <= opts.gap) break;  // proven within target
      if (node.bound >= incumbent - 1e-12) continue;
    }

    lo = f.lo;
    up = f.up;
    for (const auto& [var, val] : node.fixes) {
      lo[var] = val;
      up[var] = val;
    }

    detail::RawResult raw = detail::solve_standard_form(f, lo, up, opts.lp);
    ++res.nodes;
    res.iterations += raw.iterations;

    if (raw.status == SolveStatus::unbounded) {
      if (root) {
        res.status = SolveStatus::unbounded;
        return res;
      }
      fail(ErrorCode::numeric, "milp: bounded node relaxation reported unbounded");
    }
    root = false;
    if (raw.status == SolveStatus::infeasible) continue;
    if (raw.status != SolveStatus::optimal)
      fail(ErrorCode::numeric, "milp: node relaxation hit the iteration limit");

    double bound = f.c.dot(raw.x.head(f.n_struct));
    if (std::isfinite(incumbent) && bound >= incumbent - 1e-12) continue;

    int frac_var = -1;
    double frac_score = 1e-6;  // integrality tolerance
    for (int j : binaries) {
      double v = raw.x[j];
      double frac = v - std::floor(v);
      double score = std::min(frac, 1.0 - frac);
      if (score > frac_score) {
        frac_score = score;
        frac_var = j;
      }
    }

    if (frac_var < 0) {
      // Integral point: new incumbent.
      if (bound < incumbent - 1e-12) {
        incumbent = bound;
        best_raw = raw;
      }
      continue;
    }

    // Most fractional first; ties already resolved toward the lowest index
    // because the scan keeps the first maximizer.
    Node down{bound, next_id++, node.fixes};
    down.fixes.emplace_back(frac_var, 0.0);
    Node upn{bound, next_id++, node.fixes};
    upn.fixes.emplace_back(frac_var, 1.0);
    open.push(std::move(down));
    open.push(std::move(upn));
  }

  if (!std::isfinite(incumbent)) {
    res.status = open.empty() ? SolveStatus::infeasible : SolveStatus::iteration_limit;
    return res;
  }

  double glb = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
  double gap = (incumbent - glb) / std::max(1e-10, std::abs(incumbent));
  gap = std::max(0.0, gap);

  res.x.assign(best_raw.x.data(), best_raw.x.data() + f.n_struct);
  double obj_user = m.objective_constant();
  for (const Term& t : m.objective()) obj_user += t.coeff * res.x[t.var];
  res.objective = obj_user;
  res.mip_gap = gap;
  res.primal_infeas = detail::primal_infeasibility(m, res.x);
  if (res.primal_infeas > 1e-7)
    fail(ErrorCode::numeric, "milp: incumbent violates primal feasibility");
  res.status = gap <= opts.gap ? SolveStatus::optimal : SolveStatus::gap_limit;
  (void)sgn;
  return res;
}

}  // namespace vsp::lp
