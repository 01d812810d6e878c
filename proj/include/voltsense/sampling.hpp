#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "voltsense/powerflow.hpp"

namespace vsp::sampling {

// Per-PQ-bus injection box, ordered as Network::pq_indices().
struct InjectionRange {
  std::vector<double> p_min, p_max, q_min, q_max;

  std::size_t size() const { return p_min.size(); }
  void validate() const;
};

struct SampleSet {
  std::uint64_t seed = 0;
  std::string config;  // configuration label
  InjectionRange range;
  std::vector<pflow::InjectionVector> injections;
  std::vector<pflow::PFSolution> solutions;  // parallel to injections

  std::size_t size() const { return injections.size(); }
};

// Box bounds as {lo, hi} x nominal injection; the pair swaps for negative
// nominals. Overrides replace the active-power fractions at chosen buses.
InjectionRange range_from_fractions(
    const net::Network& net, double lo, double hi,
    const std::map<int, std::pair<double, double>>& p_overrides = {});

struct DrawOptions {
  pflow::PFOptions pf;
  bool voltvar = false;  // use curves attached to the network's buses
  int jobs = 0;          // 0 = hardware default
};

// n i.i.d. uniform draws from the box, each solved to convergence.
// Deterministic per seed and independent of worker count; a non-converged
// draw aborts with its sample index.
SampleSet draw_samples(const net::Network& net, const InjectionRange& range,
                       std::size_t n, std::uint64_t seed,
                       const DrawOptions& opts = {});

// Columnar CSV (injections then voltages) plus a JSON sidecar holding seed,
// range, and configuration label.
void save_samples_csv(const SampleSet& s, const net::Network& net,
                      const std::string& csv_path,
                      const std::string& sidecar_path);
SampleSet load_samples_csv(const net::Network& net, const std::string& csv_path,
                           const std::string& sidecar_path);

}  // namespace vsp::sampling
