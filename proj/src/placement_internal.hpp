#pragma once

#include <cmath>
#include <limits>

#include "voltsense/placement.hpp"

namespace vsp::place::detail {

inline constexpr double kInfVolt = std::numeric_limits<double>::infinity();

// Values cross into the fit's native output domain at this boundary.
inline double native(cla::OutputKind kind, double volts) {
  return kind == cla::OutputKind::V_squared ? volts * volts : volts;
}

inline double volts_from_native(cla::OutputKind kind, double value) {
  if (kind != cla::OutputKind::V_squared) return value;
  return value < 0.0 ? 0.0 : std::sqrt(value);
}

// Range of an affine expression over the injection box (interval arithmetic).
std::pair<double, double> affine_range(const std::vector<double>& a1, double a0,
                                       const sampling::InjectionRange& range);

struct GridSlots {
  // Slot 0 is "no sensor"; slots 1.. hold threshold values in volts.
  std::vector<double> volts;  // volts[0] unused
  std::size_t count() const { return volts.size(); }
};

// Lower-threshold grid at a bus: V^min upward in epsilon steps, optionally
// collapsed to {no sensor, V^min} when the samples never enter the band.
GridSlots lower_grid(double v_min, double eps, int d, bool collapse);
GridSlots upper_grid(double v_max, double eps, int d, bool collapse);

double min_sampled_v(const ConfigCase& cc, std::size_t bus_index);
double max_sampled_v(const ConfigCase& cc, std::size_t bus_index);

}  // namespace vsp::place::detail
