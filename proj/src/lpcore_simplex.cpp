#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "voltsense/lpcore_internal.hpp"

namespace vsp::lp::detail {

namespace {

enum VStat : unsigned char { kBasic, kAtLower, kAtUpper, kFreeNb };

class Simplex {
 public:
  Simplex(const StandardForm& f, const Eigen::VectorXd& lo,
          const Eigen::VectorXd& up, const LpOptions& opts)
      : f_(f), lo_(lo), up_(up), opts_(opts), m_(f.m), n_(f.n_struct),
        total_(f.n_struct + f.m) {}

  RawResult run();

 private:
  double lob(int j) const { return lo_[j]; }
  double upb(int j) const { return up_[j]; }

  // Column j of the computational-form matrix applied to a vector slot.
  // Structural columns live in f_.A; logicals are unit columns.
  Eigen::VectorXd btran(const Eigen::VectorXd& cb) const { return binv_.transpose() * cb; }

  Eigen::VectorXd ftran_col(int j) const {
    if (j < n_) return binv_ * f_.A.col(j);
    return binv_.col(j - n_);
  }

  double col_dot(int j, const Eigen::VectorXd& y) const {
    if (j < n_) return f_.A.col(j).dot(y);
    return y[j - n_];
  }

  void refactor();
  void compute_basic_values();
  double infeasibility(Eigen::VectorXd& c1) const;
  bool price(const Eigen::VectorXd& cb, bool phase1, int& q, int& sigma);
  int iterate(bool phase1, int q, int sigma);  // 0 ok, 1 unbounded, 2 stall

  const StandardForm& f_;
  Eigen::VectorXd lo_, up_;
  LpOptions opts_;
  int m_, n_, total_;

  std::vector<VStat> stat_;
  std::vector<int> basis_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd binv_;
  int iters_ = 0;
  int degen_streak_ = 0;
  bool bland_ = false;
  int since_refactor_ = 0;
};

void Simplex::refactor() {
  Eigen::MatrixXd b(m_, m_);
  for (int i = 0; i < m_; ++i) {
    int j = basis_[i];
    if (j < n_)
      b.col(i) = f_.A.col(j);
    else {
      b.col(i).setZero();
      b(j - n_, i) = 1.0;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
  if (m_ > 0 && udiag.minCoeff() < 1e-13 * std::max(1.0, udiag.maxCoeff()))
    fail(ErrorCode::numeric, "simplex basis became singular");
  binv_ = lu.inverse();
  since_refactor_ = 0;
}

void Simplex::compute_basic_values() {
  Eigen::VectorXd rhs = f_.b;
  for (int j = 0; j < total_; ++j) {
    if (stat_[j] == kBasic) continue;
    double v = x_[j];
    if (v == 0.0) continue;
    if (j < n_)
      rhs -= f_.A.col(j) * v;
    else
      rhs[j - n_] -= v;
  }
  Eigen::VectorXd xb = binv_ * rhs;
  for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
}

double Simplex::infeasibility(Eigen::VectorXd& c1) const {
  double total = 0.0;
  c1.setZero();
  for (int i = 0; i < m_; ++i) {
    int j = basis_[i];
    if (x_[j] < lob(j) - opts_.feas_tol) {
      total += lob(j) - x_[j];
      c1[i] = -1.0;
    } else if (x_[j] > upb(j) + opts_.feas_tol) {
      total += x_[j] - upb(j);
      c1[i] = 1.0;
    }
  }
  return total;
}

bool Simplex::price(const Eigen::VectorXd& cb, bool phase1, int& q, int& sigma) {
  Eigen::VectorXd y = btran(cb);
  // Reduced costs: structural block in one product, logicals from y directly.
  Eigen::VectorXd d_struct = -(f_.A.transpose() * y);
  if (!phase1) {
    for (int j = 0; j < n_; ++j) d_struct[j] += f_.c[j];
  }
  q = -1;
  sigma = 0;
  double best = opts_.opt_tol;
  for (int j = 0; j < total_; ++j) {
    if (stat_[j] == kBasic) continue;
    if (lob(j) == upb(j)) continue;  // fixed, nothing to gain
    double d = j < n_ ? d_struct[j] : (phase1 ? -y[j - n_] : -y[j - n_]);
    int sig = 0;
    if (stat_[j] == kAtLower) {
      if (d < -opts_.opt_tol) sig = 1;
    } else if (stat_[j] == kAtUpper) {
      if (d > opts_.opt_tol) sig = -1;
    } else {  // free at zero
      if (d < -opts_.opt_tol)
        sig = 1;
      else if (d > opts_.opt_tol)
        sig = -1;
    }
    if (sig == 0) continue;
    if (bland_) {
      q = j;
      sigma = sig;
      return true;  // lowest index wins
    }
    double score = std::abs(d);
    if (score > best) {
      best = score;
      q = j;
      sigma = sig;
    }
  }
  return q >= 0;
}

int Simplex::iterate(bool phase1, int q, int sigma) {
  Eigen::VectorXd alpha = ftran_col(q);

  double t_best = kInf;
  int leave = -1;
  VStat leave_to = kAtLower;
  double best_pivot = 0.0;

  double span = upb(q) - lob(q);
  if (std::isfinite(span)) t_best = span;

  for (int i = 0; i < m_; ++i) {
    double a = alpha[i];
    if (std::abs(a) < 1e-11) continue;
    int j = basis_[i];
    double delta = -sigma * a;  // change of x_B[i] per unit step
    double xb = x_[j], l = lob(j), u = upb(j);
    double t = kInf;
    VStat to = kAtLower;
    if (phase1 && xb < l - opts_.feas_tol) {
      if (delta > 0) {
        t = (l - xb) / delta;
        to = kAtLower;
      }
    } else if (phase1 && xb > u + opts_.feas_tol) {
      if (delta < 0) {
        t = (u - xb) / delta;
        to = kAtUpper;
      }
    } else {
      if (delta < 0 && std::isfinite(l)) {
        t = (xb - l) / (-delta);
        to = kAtLower;
      } else if (delta > 0 && std::isfinite(u)) {
        t = (u - xb) / delta;
        to = kAtUpper;
      }
    }
    if (!std::isfinite(t)) continue;
    if (t < 0) t = 0;
    bool better;
    if (t < t_best - 1e-12) {
      better = true;
    } else if (t <= t_best + 1e-12 && leave >= 0) {
      better = bland_ ? basis_[i] < basis_[leave] : std::abs(a) > best_pivot;
    } else {
      better = false;
    }
    if (better) {
      t_best = t;
      leave = i;
      leave_to = to;
      best_pivot = std::abs(a);
    }
  }

  if (!std::isfinite(t_best)) return 1;  // unbounded direction

  degen_streak_ = t_best <= 1e-10 ? degen_streak_ + 1 : 0;
  if (degen_streak_ > 1000) bland_ = true;  // anti-cycling fallback

  // Move the entering variable and update basic values.
  x_[q] += sigma * t_best;
  if (t_best > 0) {
    for (int i = 0; i < m_; ++i) {
      double a = alpha[i];
      if (std::abs(a) < 1e-11) continue;
      x_[basis_[i]] -= sigma * t_best * a;
    }
  }

  if (leave < 0) {
    // Bound flip, no basis change.
    stat_[q] = sigma > 0 ? kAtUpper : kAtLower;
    x_[q] = sigma > 0 ? upb(q) : lob(q);
    return 0;
  }

  int lv = basis_[leave];
  double pivot = alpha[leave];
  if (std::abs(pivot) < 1e-10) return 2;  // numerically unusable pivot

  stat_[lv] = leave_to;
  x_[lv] = leave_to == kAtLower ? lob(lv) : upb(lv);
  stat_[q] = kBasic;
  basis_[leave] = q;

  // Product-form update of the explicit inverse.
  binv_.row(leave) /= pivot;
  for (int i = 0; i < m_; ++i) {
    if (i == leave) continue;
    double a = alpha[i];
    if (std::abs(a) < 1e-13) continue;
    binv_.row(i) -= a * binv_.row(leave);
  }
  ++since_refactor_;
  return 0;
}

RawResult Simplex::run() {
  stat_.assign(total_, kAtLower);
  basis_.resize(m_);
  x_ = Eigen::VectorXd::Zero(total_);

  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lob(j))) {
      stat_[j] = kAtLower;
      x_[j] = lob(j);
    } else if (std::isfinite(upb(j))) {
      stat_[j] = kAtUpper;
      x_[j] = upb(j);
    } else {
      stat_[j] = kFreeNb;
      x_[j] = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    stat_[n_ + i] = kBasic;
  }
  binv_ = Eigen::MatrixXd::Identity(m_, m_);
  compute_basic_values();

  int max_iters = opts_.max_iters > 0
                      ? opts_.max_iters
                      : std::max(5000, 40 * (m_ + n_));

  RawResult res;
  Eigen::VectorXd c1(m_), cb(m_);
  for (iters_ = 0; iters_ < max_iters; ++iters_) {
    if (since_refactor_ >= 100) {
      refactor();
      compute_basic_values();
    }
    double inf = infeasibility(c1);
    bool phase1 = inf > opts_.feas_tol * (1.0 + f_.b.cwiseAbs().sum());
    if (phase1) {
      cb = c1;
    } else {
      for (int i = 0; i < m_; ++i)
        cb[i] = basis_[i] < n_ ? f_.c[basis_[i]] : 0.0;
    }
    int q, sigma;
    if (!price(cb, phase1, q, sigma)) {
      if (phase1) {
        res.status = SolveStatus::infeasible;
        res.iterations = iters_;
        return res;
      }
      break;  // optimal
    }
    int rc = iterate(phase1, q, sigma);
    if (rc == 1) {
      if (phase1) fail(ErrorCode::numeric, "phase 1 claims an unbounded direction");
      res.status = SolveStatus::unbounded;
      res.iterations = iters_;
      return res;
    }
    if (rc == 2) {
      refactor();
      compute_basic_values();
    }
  }
  if (iters_ >= max_iters) {
    res.status = SolveStatus::iteration_limit;
    res.iterations = iters_;
    return res;
  }

  // Clean up and report the optimal basis.
  refactor();
  compute_basic_values();

  res.status = SolveStatus::optimal;
  res.iterations = iters_;
  res.x = x_;
  for (int i = 0; i < m_; ++i)
    cb[i] = basis_[i] < n_ ? f_.c[basis_[i]] : 0.0;
  Eigen::VectorXd y = btran(cb);
  res.y = y;
  res.d.resize(total_);
  for (int j = 0; j < total_; ++j) {
    if (stat_[j] == kBasic) {
      res.d[j] = 0.0;
      continue;
    }
    double cj = j < n_ ? f_.c[j] : 0.0;
    res.d[j] = cj - col_dot(j, y);
  }
  return res;
}

}  // namespace

RawResult solve_standard_form(const StandardForm& f, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& up, const LpOptions& opts) {
  Simplex s(f, lo, up, opts);
  return s.run();
}

StandardForm standardize(const LinearModel& m) {
  m.validate();
  if (m.has_bilinear())
    fail(ErrorCode::validation,
         "model has bilinear terms; export via model_json or discretize first");
  StandardForm f;
  f.n_struct = static_cast<int>(m.vars().size());
  f.m = static_cast<int>(m.constraints().size());
  f.A = Eigen::MatrixXd::Zero(f.m, f.n_struct);
  f.b.resize(f.m);
  f.c = Eigen::VectorXd::Zero(f.n_struct);
  f.lo.resize(f.n_struct + f.m);
  f.up.resize(f.n_struct + f.m);

  const double sgn = m.sense() == Sense::maximize ? -1.0 : 1.0;
  for (const Term& t : m.objective()) f.c[t.var] += sgn * t.coeff;
  for (int j = 0; j < f.n_struct; ++j) {
    f.lo[j] = m.vars()[j].lower;
    f.up[j] = m.vars()[j].upper;
  }
  for (int i = 0; i < f.m; ++i) {
    const Constraint& c = m.constraints()[i];
    for (const Term& t : c.terms) f.A(i, t.var) += t.coeff;
    f.b[i] = c.rhs;
    int s = f.n_struct + i;
    switch (c.rel) {
      case Relation::le:
        f.lo[s] = 0.0;
        f.up[s] = kInf;
        break;
      case Relation::ge:
        f.lo[s] = -kInf;
        f.up[s] = 0.0;
        break;
      case Relation::eq:
        f.lo[s] = 0.0;
        f.up[s] = 0.0;
        break;
    }
  }
  return f;
}

}  // namespace vsp::lp::detail
