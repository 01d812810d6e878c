#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "voltsense/common.hpp"

namespace vsp::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Relation { le, eq, ge };
enum class Sense { minimize, maximize };

struct Term {
  int var = 0;
  double coeff = 0.0;
};

struct BilinearTerm {
  int x = 0;
  int y = 0;
  double coeff = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::continuous;
  std::string category;  // accounting label, free-form
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation rel = Relation::le;
  double rhs = 0.0;
  std::vector<BilinearTerm> bilinear;  // export-only; solvers reject these
  std::string category;
};

class LinearModel {
 public:
  int add_var(std::string name, double lower, double upper,
              VarKind kind = VarKind::continuous, std::string category = "");
  int add_constraint(std::string name, std::vector<Term> terms, Relation rel,
                     double rhs, std::string category = "");
  int add_bilinear_constraint(std::string name, std::vector<Term> terms,
                              std::vector<BilinearTerm> bilinear, Relation rel,
                              double rhs, std::string category = "");

  void set_objective(Sense sense, std::vector<Term> terms, double constant = 0.0);

  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  Sense sense() const { return sense_; }
  const std::vector<Term>& objective() const { return objective_; }
  double objective_constant() const { return obj_constant_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  bool has_binaries() const;
  bool has_bilinear() const;
  void validate() const;

 private:
  std::string name_ = "model";
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  Sense sense_ = Sense::minimize;
  std::vector<Term> objective_;
  double obj_constant_ = 0.0;
};

enum class SolveStatus { optimal, infeasible, unbounded, gap_limit, iteration_limit };

struct SolveResult {
  SolveStatus status = SolveStatus::iteration_limit;
  std::vector<double> x;             // primal values per variable
  std::vector<double> duals;         // per constraint (LP only)
  std::vector<double> reduced_costs; // per variable (LP only)
  double objective = 0.0;
  double mip_gap = 0.0;      // MILP: proven relative gap
  std::int64_t nodes = 0;    // MILP: nodes explored
  int iterations = 0;        // simplex pivots (LP) / total pivots (MILP)
  double primal_infeas = 0.0;
  double duality_gap = 0.0;  // |primal obj - dual obj|, LP optimal only
};

struct LpOptions {
  int max_iters = 0;          // 0 = automatic
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
};

// Bounded revised simplex with a composite phase 1. Optimal results carry
// duals and reduced costs and are audited for primal feasibility,
// complementary slackness, and strong duality.
SolveResult solve_lp(const LinearModel& m, const LpOptions& opts = {});

struct MilpOptions {
  double gap = 1e-9;             // relative MIP gap target
  std::int64_t node_limit = 2'000'000;
  LpOptions lp;
};

// Best-bound branch and bound, branching on the most fractional binary with
// index tie-break. Termination within the gap target reports optimal and
// records the proven gap; hitting the node limit reports gap_limit when an
// incumbent exists.
SolveResult solve_milp(const LinearModel& m, const MilpOptions& opts = {});

// z = x * y for binary y and bounded continuous x, via the four McCormick
// rows (exact for binary y). Returns the index of the new variable z.
int add_binary_product(LinearModel& m, const std::string& z_name, int x, int y);

// Fixed-format MPS (linear models only) or the documented model_json dump,
// which also carries explicit bilinear terms.
std::string export_model(const LinearModel& m, const std::string& format);
LinearModel import_model_json(const std::string& text);

}  // namespace vsp::lp
