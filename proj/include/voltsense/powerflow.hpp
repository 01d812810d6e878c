#pragma once

#include <optional>
#include <span>
#include <vector>

#include "voltsense/netmodel.hpp"
#include "voltsense/voltvar.hpp"

namespace vsp::pflow {

// Injections at PQ buses, ordered as Network::pq_indices().
struct InjectionVector {
  std::vector<double> p;  // pu
  std::vector<double> q;  // pu
};

struct PFSolution {
  std::vector<double> v;      // pu, all buses, internal order
  std::vector<double> theta;  // rad
  int iterations = 0;
  bool converged = false;
  double max_mismatch = 0.0;  // pu power
};

struct PFOptions {
  double tol = 1e-8;  // pu, max |P/Q mismatch|
  int max_iter = 30;
};

// Full-Jacobian Newton in polar form from a flat start. Non-convergence is
// reported through the flag; a singular Jacobian throws.
PFSolution solve_pf(const net::Network& net, const InjectionVector& inj,
                    const PFOptions& opts = {});

// Damped fixed-point loop around solve_pf: each inverter's reactive output
// must match its curve at the solved voltage.
PFSolution solve_pf_voltvar(const net::Network& net, const InjectionVector& inj,
                            std::span<const std::optional<VoltVarCurve>> curves,
                            const PFOptions& opts = {}, int max_outer = 50,
                            double damping = 0.5);

// Curves attached to the network's buses, if any.
std::vector<std::optional<VoltVarCurve>> curves_of(const net::Network& net);

// Recomputed power mismatch of a candidate solution (independent of the
// solver path).
double max_mismatch(const net::Network& net, const InjectionVector& inj,
                    const PFSolution& sol);

}  // namespace vsp::pflow
