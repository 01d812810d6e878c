#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voltsense/cla.hpp"
#include "voltsense/lpcore.hpp"

namespace vsp::place {

enum class Formulation { kkt, bilinear, milp };

// One topology configuration with its fitted approximations and the training
// samples used for risk screening and slot pruning.
struct ConfigCase {
  std::string name;
  net::Network network;
  cla::CLABundle bundle;
  std::shared_ptr<const sampling::SampleSet> samples;        // base draw
  std::shared_ptr<const sampling::SampleSet> extra_samples;  // selection draw
};

struct PlacementSpec {
  std::vector<ConfigCase> configs;
  sampling::InjectionRange range;
  Formulation formulation = Formulation::milp;
  double delta = 0.02;      // cost of placing a sensor
  double big_m = 2.0;       // threshold translation constant, volts
  double epsilon = 5e-4;    // threshold grid step, volts
  int d_steps = 41;         // grid slots above the limit (plus the no-sensor slot)
  bool bvr = true;          // sample-driven slot pruning
  double dual_bound = 1e3;  // bound on linearized dual variables
  double mip_gap = 0.005;
  bool exclude_own_bus = false;  // drop the objective bus's own sensor row
  int jobs = 0;

  void validate() const;
};

// How the objective bus's own sensor row enters its lower-level problem.
//   weak:     the over/under pair as for every other bus
//   anchored: the objective-side approximation bounds its own threshold
//   excluded: no own row at all
enum class OwnRowMode { weak, anchored, excluded };

// Dual structure of one configuration's lower-level problems: A y = a1 with
// column blocks [-I | I | over-coeffs | -under-coeffs] and b carrying the box
// bounds plus the translated-threshold entries.
struct DualData {
  Eigen::MatrixXd a;            // 2m x (4m + 2n) with m = n = PQ count
  Eigen::VectorXd b_const;      // b with all thresholds at zero
  std::size_t n_pq = 0;
  // b = b_const + sum_j u_lo[j] * e_{4m+j} - sum_j u_up[j] * e_{5m+j}
  std::size_t lower_entry(std::size_t pq_pos) const { return 4 * n_pq + pq_pos; }
  std::size_t upper_entry(std::size_t pq_pos) const { return 5 * n_pq + pq_pos; }
};

DualData build_dual_data(const cla::CLABundle& bundle,
                         const sampling::InjectionRange& range,
                         const net::Network& net);

// Translated thresholds in the bundle's native output domain; absent entries
// mean "no sensor" (vacuous band).
struct Thresholds {
  std::vector<std::optional<double>> lower;  // by PQ position, native domain
  std::vector<std::optional<double>> upper;
};

struct LowerLevelResult {
  bool feasible = true;
  double value = 0.0;                    // native domain
  std::vector<double> lower_row_duals;   // by PQ position (zero if no row)
  std::vector<double> upper_row_duals;
};

// Extreme-value problem for one bus under the no-alarm constraints, solved
// directly as a linear program. This is the certification oracle.
LowerLevelResult solve_lower_level(const net::Network& net,
                                   const cla::CLABundle& bundle,
                                   const sampling::InjectionRange& range,
                                   const Thresholds& thr, int bus, bool upper,
                                   OwnRowMode own_row);

// Same optimum through the dual data (strong duality route).
double solve_dual_route(const DualData& dd, const cla::CLABundle& bundle,
                        const Thresholds& thr, std::size_t pq_pos, bool upper);

struct ConfigThresholds {
  std::string config;
  std::map<int, double> lower;  // bus id -> volts
  std::map<int, double> upper;
};

struct CertifiedBound {
  int bus = 0;
  double lower = 0.0;  // volts
  double upper = 0.0;
};

struct PlacementSolution {
  std::vector<int> sensor_buses;  // ascending external ids
  std::vector<ConfigThresholds> thresholds;
  double objective = 0.0;
  std::vector<std::vector<CertifiedBound>> certified;  // [config][pq]
  std::string formulation;
  double solve_seconds = 0.0;
  int master_iterations = 0;
  std::int64_t nodes = 0;
  double mip_gap = 0.0;
  std::vector<std::string> notes;
};

// Sensor-count and threshold-restrictiveness cost; the per-sensor charge
// counts once, threshold terms average over configurations.
double cost(const PlacementSolution& sol, const PlacementSpec& spec);

// Single-level model builders (also used for export and statistics).
lp::LinearModel build_bilinear(const PlacementSpec& spec);
lp::LinearModel build_milp(const PlacementSpec& spec);
lp::LinearModel build_kkt(const PlacementSpec& spec);

struct ModelStats {
  std::map<std::string, std::size_t> variables;    // by category
  std::map<std::string, std::size_t> constraints;  // by category
  std::size_t n_buses = 0;              // PQ buses (b)
  std::size_t n_risk_problems = 0;      // lower-level problems built (r)
  std::size_t decision_variables = 0;   // injections + duals + thresholds + sensors
  std::size_t removed_constraints = 0;  // stationarity + sensor rows + bound pairs
  std::string to_json() const;
};

ModelStats model_stats(const lp::LinearModel& model);

// Exact cut-generation solve over the discretized (milp) or continuous (kkt)
// threshold space; certification re-audited per bus by independent LPs.
PlacementSolution solve_placement(const PlacementSpec& spec);

enum class HeuristicMode { first_config, all_configs };

// Sensors at branch ends with thresholds at the voltage limits.
PlacementSolution heuristic_placement(const PlacementSpec& spec,
                                      HeuristicMode mode);

std::string solution_to_json(const PlacementSolution& sol);
PlacementSolution solution_from_json(const std::string& text);

// Per-direction at-risk screen from sampled voltages (margin in volts).
struct RiskSets {
  std::vector<std::size_t> lower;  // PQ positions
  std::vector<std::size_t> upper;
};
RiskSets screen_risk(const ConfigCase& cc, double margin);

}  // namespace vsp::place
