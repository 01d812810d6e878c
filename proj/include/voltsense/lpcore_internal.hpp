#pragma once

#include <Eigen/Dense>

#include "voltsense/lpcore.hpp"

// Shared between the simplex engine, the LP front end, and branch-and-bound.

namespace vsp::lp::detail {

struct StandardForm {
  // minimize c^T x  s.t.  A x + s = b, bounds on x and the logicals s.
  // Maximization is folded into c; logicals carry the row relations.
  Eigen::MatrixXd A;  // m x n_struct
  Eigen::VectorXd b, c;
  Eigen::VectorXd lo, up;  // length n_struct + m
  int n_struct = 0;
  int m = 0;
};

struct RawResult {
  SolveStatus status = SolveStatus::iteration_limit;
  Eigen::VectorXd x;  // length n_struct + m
  Eigen::VectorXd y;  // simplex multipliers per row
  Eigen::VectorXd d;  // reduced costs per column
  int iterations = 0;
};

StandardForm standardize(const LinearModel& m);

RawResult solve_standard_form(const StandardForm& f, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& up, const LpOptions& opts);

// Maps a raw result back to the user's model, computing the audit numbers.
SolveResult finalize_lp_result(const LinearModel& m, const StandardForm& f,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& up,
                               const RawResult& raw, bool audit);

}  // namespace vsp::lp::detail
