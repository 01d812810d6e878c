#pragma once

#include <array>
#include <utility>

namespace vsp::pflow {

// Piecewise-linear volt-VAR droop: five (voltage pu, output fraction)
// breakpoints, flat extrapolation outside, output scaled by q_capacity.
struct VoltVarCurve {
  std::array<std::pair<double, double>, 5> breakpoints{{{0.92, 1.0},
                                                        {0.98, 0.0},
                                                        {1.00, 0.0},
                                                        {1.02, 0.0},
                                                        {1.08, -1.0}}};
  double q_capacity = 0.0;  // pu

  // Reactive output (pu) at voltage v.
  double evaluate(double v) const {
    const auto& bp = breakpoints;
    if (v <= bp.front().first) return bp.front().second * q_capacity;
    if (v >= bp.back().first) return bp.back().second * q_capacity;
    for (std::size_t k = 1; k < bp.size(); ++k) {
      if (v <= bp[k].first) {
        double t = (v - bp[k - 1].first) / (bp[k].first - bp[k - 1].first);
        double f = bp[k - 1].second + t * (bp[k].second - bp[k - 1].second);
        return f * q_capacity;
      }
    }
    return bp.back().second * q_capacity;
  }

  bool valid() const {
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (!(breakpoints[k].first > breakpoints[k - 1].first)) return false;
    for (const auto& [v, f] : breakpoints)
      if (f < -1.0 || f > 1.0) return false;
    return true;
  }
};

}  // namespace vsp::pflow
