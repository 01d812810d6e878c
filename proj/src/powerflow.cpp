#include "voltsense/powerflow.hpp"

#include <cmath>

#include <Eigen/LU>

namespace vsp::pflow {

namespace {

void check_dimensions(const net::Network& net, const InjectionVector& inj) {
  if (inj.p.size() != net.n_pq() || inj.q.size() != net.n_pq())
    fail(ErrorCode::validation, "injection vector length does not match PQ bus count");
}

struct Mismatch {
  Eigen::VectorXd dp, dq;  // spec minus calculated, PQ order
  Eigen::VectorXd p_calc, q_calc;
  double max_abs = 0.0;
};

Mismatch mismatch(const net::Network& net, const Eigen::MatrixXd& g,
                  const Eigen::MatrixXd& b, const InjectionVector& inj,
                  const std::vector<double>& v, const std::vector<double>& th) {
  const auto& pq = net.pq_indices();
  const std::size_t n = net.size();
  Mismatch m;
  m.dp.resize(pq.size());
  m.dq.resize(pq.size());
  m.p_calc.resize(pq.size());
  m.q_calc.resize(pq.size());
  for (std::size_t a = 0; a < pq.size(); ++a) {
    std::size_t j = pq[a];
    double pc = 0.0, qc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double gjk = g(j, k), bjk = b(j, k);
      if (gjk == 0.0 && bjk == 0.0) continue;
      double t = th[j] - th[k];
      double ct = std::cos(t), st = std::sin(t);
      pc += v[j] * v[k] * (gjk * ct + bjk * st);
      qc += v[j] * v[k] * (gjk * st - bjk * ct);
    }
    m.p_calc[a] = pc;
    m.q_calc[a] = qc;
    m.dp[a] = inj.p[a] - pc;
    m.dq[a] = inj.q[a] - qc;
    m.max_abs = std::max({m.max_abs, std::abs(m.dp[a]), std::abs(m.dq[a])});
  }
  return m;
}

}  // namespace

PFSolution solve_pf(const net::Network& net, const InjectionVector& inj,
                    const PFOptions& opts) {
  check_dimensions(net, inj);
  if (!(opts.tol > 0)) fail(ErrorCode::validation, "power flow tolerance must be positive");

  const Eigen::MatrixXcd y = net::build_admittance(net);
  const Eigen::MatrixXd g = y.real();
  const Eigen::MatrixXd b = y.imag();
  const auto& pq = net.pq_indices();
  const std::size_t m = pq.size();
  const std::size_t n = net.size();

  PFSolution sol;
  sol.v.assign(n, 1.0);  // flat start, slack pinned at 1∠0
  sol.theta.assign(n, 0.0);

  Eigen::MatrixXd jac(2 * m, 2 * m);
  for (int it = 0; it <= opts.max_iter; ++it) {
    Mismatch mis = mismatch(net, g, b, inj, sol.v, sol.theta);
    sol.max_mismatch = mis.max_abs;
    sol.iterations = it;
    if (mis.max_abs <= opts.tol) {
      sol.converged = true;
      return sol;
    }
    if (it == opts.max_iter) break;

    jac.setZero();
    for (std::size_t a = 0; a < m; ++a) {
      std::size_t j = pq[a];
      for (std::size_t c = 0; c < m; ++c) {
        std::size_t k = pq[c];
        double gjk = g(j, k), bjk = b(j, k);
        if (j == k) {
          jac(a, c) = -mis.q_calc[a] - bjk * sol.v[j] * sol.v[j];
          jac(a, m + c) = mis.p_calc[a] / sol.v[j] + gjk * sol.v[j];
          jac(m + a, c) = mis.p_calc[a] - gjk * sol.v[j] * sol.v[j];
          jac(m + a, m + c) = mis.q_calc[a] / sol.v[j] - bjk * sol.v[j];
        } else {
          if (gjk == 0.0 && bjk == 0.0) continue;
          double t = sol.theta[j] - sol.theta[k];
          double ct = std::cos(t), st = std::sin(t);
          jac(a, c) = sol.v[j] * sol.v[k] * (gjk * st - bjk * ct);
          jac(a, m + c) = sol.v[j] * (gjk * ct + bjk * st);
          jac(m + a, c) = -sol.v[j] * sol.v[k] * (gjk * ct + bjk * st);
          jac(m + a, m + c) = sol.v[j] * (gjk * st - bjk * ct);
        }
      }
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
    if (udiag.minCoeff() < 1e-12 * std::max(1.0, udiag.maxCoeff()))
      fail(ErrorCode::numeric, "power flow Jacobian is singular");

    Eigen::VectorXd rhs(2 * m);
    rhs.head(m) = mis.dp;
    rhs.tail(m) = mis.dq;
    Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite())
      fail(ErrorCode::numeric, "power flow Jacobian is singular");

    for (std::size_t a = 0; a < m; ++a) {
      sol.theta[pq[a]] += step[a];
      sol.v[pq[a]] += step[m + a];
      if (sol.v[pq[a]] < 1e-4) sol.v[pq[a]] = 1e-4;  // keep V/V divisions sane
    }
  }
  sol.converged = false;
  return sol;
}

PFSolution solve_pf_voltvar(const net::Network& net, const InjectionVector& inj,
                            std::span<const std::optional<VoltVarCurve>> curves,
                            const PFOptions& opts, int max_outer,
                            double damping) {
  check_dimensions(net, inj);
  if (curves.size() != net.size())
    fail(ErrorCode::validation, "volt-VAR curve list must cover every bus");

  bool any = false;
  for (const auto& c : curves)
    if (c) any = true;
  if (!any) return solve_pf(net, inj, opts);

  const auto& pq = net.pq_indices();
  std::vector<double> q_inv(pq.size(), 0.0);
  InjectionVector eff = inj;
  PFSolution sol;
  for (int outer = 0; outer < max_outer; ++outer) {
    for (std::size_t a = 0; a < pq.size(); ++a)
      eff.q[a] = inj.q[a] + q_inv[a];
    sol = solve_pf(net, eff, opts);
    if (!sol.converged) return sol;

    double shift = 0.0;
    for (std::size_t a = 0; a < pq.size(); ++a) {
      const auto& curve = curves[pq[a]];
      if (!curve) continue;
      double target = curve->evaluate(sol.v[pq[a]]);
      double next = q_inv[a] + damping * (target - q_inv[a]);
      shift = std::max(shift, std::abs(next - q_inv[a]));
      q_inv[a] = next;
    }
    if (shift <= std::max(opts.tol, 1e-10)) {
      sol.converged = true;
      return sol;
    }
  }
  sol.converged = false;
  return sol;
}

std::vector<std::optional<VoltVarCurve>> curves_of(const net::Network& net) {
  std::vector<std::optional<VoltVarCurve>> out(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) out[i] = net.buses()[i].voltvar;
  return out;
}

double max_mismatch(const net::Network& net, const InjectionVector& inj,
                    const PFSolution& sol) {
  check_dimensions(net, inj);
  const Eigen::MatrixXcd y = net::build_admittance(net);
  return mismatch(net, y.real(), y.imag(), inj, sol.v, sol.theta).max_abs;
}

}  // namespace vsp::pflow
