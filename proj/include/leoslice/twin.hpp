#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "leoslice/constellation.hpp"
#include "leoslice/demand.hpp"
#include "leoslice/predictor.hpp"
#include "leoslice/slicer.hpp"

namespace leoslice {

// Historical features of observed slots and the predicted features of the
// current window's remaining slots.
struct FeatureCache {
  std::size_t history_capacity = 256;
  std::deque<DemandFeature> history;
  std::deque<PredictedFeature> predicted;
  int predicted_first = 0;  // window-relative slot of predicted.front()
  int last_revised = -1;
  DemandFeature last_residual;

  void push_history(const DemandFeature &f);
  /// The most recent k observed features, oldest first.
  std::vector<DemandFeature> recent(int k) const;
  /// Replaces the predicted queue with predictions for slots [first, first + n).
  void set_predictions(std::vector<PredictedFeature> predictions, int first);
};

struct TwinPolicy {
  double discount = 0.6;
  double satisfaction = 0.9;
  bool reslice = true;
  double dispersion_tolerance = 0.2;
  // Relative margin by which a re-solve must undercut the emulated cost.
  double cost_tolerance = 1e-3;
};

struct EmulationReport {
  int first_slot = 0;
  double cost = 0.0;
  std::vector<unsigned char> satisfied;  // per remaining slot
  bool any_unexecuted_satellite_remaining = false;

  bool all_satisfied() const;
};

/// Shifts every remaining prediction by discount^(t - t') times the residual
/// observed at t'; a repeated call for the same t' is a no-op.
void revise_features(FeatureCache &cache, const DemandFeature &actual, int observed_slot,
                     double discount);

/// Threshold source for a predicted feature; non-positive means become a zero
/// threshold.
SlotDemand slot_demand(const PredictedFeature &pf, double dispersion_tolerance);

// Everything the twin needs to rebuild the window problem.
struct WindowContext {
  const CoverageSchedule *schedule = nullptr;
  int window = 0;
  LinkParams link;
  double beta_resource = 1e-6;
  double beta_delay = 100.0;
  double big_m = 1e9;
  SolverOptions solver;
};

/// Problem over window slots [first, T) with executed satellites locked.
SliceProblem remaining_problem(const WindowContext &ctx, const SlicingDecision &decision, int first,
                               const std::vector<PredictedFeature> &predictions,
                               const TwinPolicy &policy);

EmulationReport emulate(const SlicingDecision &decision, const WindowContext &ctx,
                        const FeatureCache &cache, const TwinPolicy &policy);

struct Keep {};
struct Resliced {
  SlicingDecision decision;
  std::vector<PredictedFeature> predictions;
};
using TwinAction = std::variant<Keep, Resliced>;

/// Re-predicts and re-solves when the emulation shows an unmet threshold or a
/// cheaper plan for the remaining slots, as long as a satellite has yet to
/// serve the area.
TwinAction maybe_reslice(const EmulationReport &report, const FeatureCache &cache,
                         const BnnModel &model, const SlicingDecision &decision,
                         const WindowContext &ctx, const TwinPolicy &policy, int mc_samples,
                         std::uint64_t seed);

}  // namespace leoslice
