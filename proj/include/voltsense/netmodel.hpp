#pragma once

#include <complex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "voltsense/common.hpp"
#include "voltsense/voltvar.hpp"

namespace vsp::net {

enum class BusKind { slack, pq };
enum class LineStatus { closed, open };

struct Bus {
  int id = 0;  // external id, as given in the case file
  BusKind kind = BusKind::pq;
  double v_min = 0.9;   // pu
  double v_max = 1.05;  // pu
  double p_nom = 0.0;   // pu net injection (generation positive, loads negative)
  double q_nom = 0.0;   // pu
  std::optional<pflow::VoltVarCurve> voltvar;
};

struct Line {
  int from = 0;  // external bus ids
  int to = 0;
  double r = 0.0;     // pu
  double x = 0.0;     // pu
  double b_sh = 0.0;  // total shunt susceptance, pu
  LineStatus status = LineStatus::closed;
};

// Immutable after construction; share freely across workers.
class Network {
 public:
  Network() = default;
  Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double base_mva() const { return base_mva_; }

  std::size_t size() const { return buses_.size(); }
  std::size_t slack_index() const { return slack_index_; }

  // Internal contiguous index for an external bus id.
  std::size_t index_of(int bus_id) const;
  int id_of(std::size_t index) const { return buses_[index].id; }

  // Non-slack bus indices in declaration order; injection vectors follow it.
  const std::vector<std::size_t>& pq_indices() const { return pq_indices_; }
  std::size_t n_pq() const { return pq_indices_.size(); }

  // Position of `index` within pq_indices(), or npos for the slack bus.
  std::size_t pq_position(std::size_t index) const { return pq_position_[index]; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void validate();

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double base_mva_ = 100.0;
  std::size_t slack_index_ = 0;
  std::vector<std::size_t> pq_indices_;
  std::vector<std::size_t> pq_position_;
  std::unordered_map<int, std::size_t> id_index_;
};

struct ConfigurationOverride {
  std::size_t line = 0;  // index into Network::lines()
  LineStatus status = LineStatus::closed;
};

struct Configuration {
  std::string name;
  std::vector<ConfigurationOverride> line_status_overrides;
};

// MATPOWER case subset: mpc.baseMVA, mpc.bus, mpc.branch. Loads become
// negative injections; bus type 3 is the slack, type 1 PQ.
Network parse_matpower(const std::string& text);

// Nodal admittance table, internal bus indexing. Open lines contribute
// nothing; diagonals carry series sums plus half line charging per end.
Eigen::MatrixXcd build_admittance(const Network& net);

// New network with statuses overridden; the input is untouched.
Network apply_configuration(const Network& net, const Configuration& cfg);

// Degree-one non-slack buses over closed lines (external ids, ascending).
std::vector<int> leaf_buses(const Network& net);

bool is_radial(const Network& net);

}  // namespace vsp::net
