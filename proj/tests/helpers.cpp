#include "helpers.hpp"

#include <Eigen/Dense>

namespace testutil {

using namespace vsp::lp;

double enumerate_lp_optimum(const LinearModel& m) {
  const int n = static_cast<int>(m.vars().size());
  const int rows = static_cast<int>(m.constraints().size());
  const int total = n + rows;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, total);
  Eigen::VectorXd b(rows);
  std::vector<int> logical_sign(rows);  // +1 slack >= 0 (le), -1 slack <= 0 (ge)
  for (int i = 0; i < rows; ++i) {
    const Constraint& c = m.constraints()[i];
    for (const Term& t : c.terms) a(i, t.var) += t.coeff;
    a(i, n + i) = 1.0;
    b[i] = c.rhs;
    logical_sign[i] = c.rel == Relation::le ? 1 : -1;
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  for (const Term& t : m.objective()) cost[t.var] += t.coeff;

  double best = kInf;
  std::vector<int> pick(rows);
  // Iterate all basis subsets of size `rows` out of `total` columns.
  std::vector<int> idx(rows);
  for (int i = 0; i < rows; ++i) idx[i] = i;
  Eigen::MatrixXd basis(rows, rows);
  for (;;) {
    for (int i = 0; i < rows; ++i) basis.col(i) = a.col(idx[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
    if (udiag.minCoeff() > 1e-10 * std::max(1.0, udiag.maxCoeff())) {
      Eigen::VectorXd xb = lu.solve(b);
      bool ok = xb.allFinite();
      double obj = m.objective_constant();
      for (int i = 0; ok && i < rows; ++i) {
        int col = idx[i];
        if (col < n) {
          if (xb[i] < -1e-9) ok = false;
        } else {
          int sign = logical_sign[col - n];
          if (sign > 0 && xb[i] < -1e-9) ok = false;
          if (sign < 0 && xb[i] > 1e-9) ok = false;
        }
        if (col < n) obj += cost[col] * xb[i];
      }
      if (ok && obj < best) best = obj;
    }
    // next combination
    int k = rows - 1;
    while (k >= 0 && idx[k] == total - rows + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < rows; ++i) idx[i] = idx[i - 1] + 1;
  }
  return best;
}

LinearModel random_milp(Rand& rng, int max_bin) {
  LinearModel m;
  const int nb = rng.integer(3, max_bin);
  const int nc = rng.integer(1, 3);
  std::vector<double> ref;
  for (int j = 0; j < nb; ++j) {
    m.add_var("b" + std::to_string(j), 0.0, 1.0, VarKind::binary);
    ref.push_back(rng.uniform(0.0, 1.0) < 0.5 ? 0.0 : 1.0);
  }
  for (int j = 0; j < nc; ++j) {
    m.add_var("x" + std::to_string(j), 0.0, 5.0);
    ref.push_back(rng.uniform(0.0, 5.0));
  }
  const int total = nb + nc;
  const int rows = rng.integer(3, 6);
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    double act = 0.0;
    for (int j = 0; j < total; ++j) {
      double a = rng.uniform(-2.0, 2.0);
      if (std::abs(a) < 0.3) continue;
      terms.push_back({j, a});
      act += a * ref[j];
    }
    if (terms.empty()) terms.push_back({0, 1.0}), act = ref[0];
    bool le = rng.uniform(0.0, 1.0) < 0.6;
    double slack = rng.uniform(0.0, 1.5);
    m.add_constraint("r" + std::to_string(i), std::move(terms),
                     le ? Relation::le : Relation::ge,
                     le ? act + slack : act - slack);
  }
  std::vector<Term> obj;
  for (int j = 0; j < total; ++j) obj.push_back({j, rng.uniform(-2.0, 2.0)});
  m.set_objective(Sense::minimize, std::move(obj), 0.0);
  return m;
}

double enumerate_milp_optimum(const LinearModel& m) {
  std::vector<int> binaries;
  for (std::size_t j = 0; j < m.vars().size(); ++j)
    if (m.vars()[j].kind == VarKind::binary) binaries.push_back(static_cast<int>(j));
  const int k = static_cast<int>(binaries.size());
  double best = kInf;
  for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
    LinearModel fixed;
    for (std::size_t j = 0; j < m.vars().size(); ++j) {
      const Variable& v = m.vars()[j];
      if (v.kind == VarKind::binary) {
        int pos = static_cast<int>(
            std::find(binaries.begin(), binaries.end(), static_cast<int>(j)) -
            binaries.begin());
        double val = (mask >> pos) & 1 ? 1.0 : 0.0;
        fixed.add_var(v.name, val, val);
      } else {
        fixed.add_var(v.name, v.lower, v.upper);
      }
    }
    for (const Constraint& c : m.constraints())
      fixed.add_constraint(c.name, c.terms, c.rel, c.rhs);
    fixed.set_objective(m.sense(), m.objective(), m.objective_constant());
    SolveResult r = solve_lp(fixed);
    if (r.status == SolveStatus::optimal && r.objective < best) best = r.objective;
  }
  return best;
}

}  // namespace testutil
