#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "voltsense/sampling.hpp"

namespace vsp::cla {

enum class Direction { over, under };
enum class OutputKind { V, V_squared };

// Training data reference: the base draw plus the extras pulled in by the
// selection rounds. Shared, never copied per fit.
struct TrainingRef {
  std::shared_ptr<const sampling::SampleSet> base;
  std::shared_ptr<const sampling::SampleSet> extra;  // may be null
  std::vector<std::uint32_t> extra_used;             // indices into extra
};

// Affine one-sided voltage model: a0 + a1 . (P;Q) over all PQ buses,
// guaranteed on the conservative side of every training sample.
struct CLA {
  int bus = 0;  // external id
  Direction direction = Direction::over;
  OutputKind output_kind = OutputKind::V_squared;
  double a0 = 0.0;
  std::vector<double> a1;  // length 2 * n_pq, (P block, Q block)
  TrainingRef trained_on;
  double l1_error = 0.0;      // mean absolute training residual
  double fit_seconds = 0.0;
  int selection_rounds = 0;
};

struct CLABundle {
  std::string config;
  OutputKind output_kind = OutputKind::V_squared;
  std::vector<CLA> over;   // by PQ position
  std::vector<CLA> under;  // by PQ position

  std::size_t size() const { return over.size(); }
};

// One-sided least-absolute-error fit, solved exactly as a linear program.
// The conservativeness constraints hold on every training sample.
CLA fit_cla(const std::shared_ptr<const sampling::SampleSet>& samples,
            const net::Network& net, int bus, Direction direction,
            OutputKind output_kind);

// Pulls in extras that break conservativeness plus the top_k largest-error
// extras each round, refits, and stops once the extras are clean.
CLA refine_with_selection(const CLA& cla, const net::Network& net,
                          const std::shared_ptr<const sampling::SampleSet>& extra,
                          std::size_t top_k, int max_rounds);

// Prediction in volts (square root applied and clamped for squared fits).
double evaluate_cla(const CLA& cla, const pflow::InjectionVector& inj,
                    bool* clamped = nullptr);

// Prediction in the fit's native output domain.
double evaluate_cla_raw(const CLA& cla, const pflow::InjectionVector& inj);

struct FitOptions {
  OutputKind output_kind = OutputKind::V_squared;
  std::size_t top_k = 100;
  int max_rounds = 5;
  int jobs = 0;
};

// Over/under pair per PQ bus, fits running in a work pool.
CLABundle fit_bundle(const net::Network& net,
                     const std::shared_ptr<const sampling::SampleSet>& samples,
                     const std::shared_ptr<const sampling::SampleSet>& extra,
                     const FitOptions& opts = {});

// Share of samples on the conservative side, per the fit's native domain.
double conservative_share(const CLA& cla, const net::Network& net,
                          const sampling::SampleSet& samples, double tol = 1e-9);

std::string bundle_to_json(const CLABundle& bundle);
CLABundle bundle_from_json(const std::string& text, const net::Network& net);

}  // namespace vsp::cla
