#include "leoslice/twin.hpp"

#include <algorithm>
#include <cmath>

namespace leoslice {

void FeatureCache::push_history(const DemandFeature &f) {
  history.push_back(f);
  while (history.size() > history_capacity) {
    history.pop_front();
  }
}

std::vector<DemandFeature> FeatureCache::recent(int k) const {
  if (k < 0 || static_cast<std::size_t>(k) > history.size()) {
    throw std::out_of_range("FeatureCache::recent: not enough history");
  }
  return {history.end() - k, history.end()};
}

void FeatureCache::set_predictions(std::vector<PredictedFeature> predictions, int first) {
  predicted.assign(predictions.begin(), predictions.end());
  predicted_first = first;
  last_revised = first - 1;
}

bool EmulationReport::all_satisfied() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](unsigned char f) { return f != 0; });
}

void revise_features(FeatureCache &cache, const DemandFeature &actual, int observed_slot,
                     double discount) {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("revise_features: discount must lie in (0, 1)");
  }
  if (observed_slot == cache.last_revised) {
    return;
  }
  if (cache.predicted.empty() || observed_slot != cache.predicted_first) {
    throw std::invalid_argument("revise_features: slot is not the oldest pending prediction");
  }
  const PredictedFeature observed = cache.predicted.front();
  cache.predicted.pop_front();
  cache.predicted_first = observed_slot + 1;
  cache.last_revised = observed_slot;
  cache.last_residual = {actual.mean - observed.mean_feature.mean,
                         actual.variance - observed.mean_feature.variance};
  double weight = 1.0;
  for (auto &pf : cache.predicted) {
    weight *= discount;
    pf.mean_feature.mean += weight * cache.last_residual.mean;
    pf.mean_feature.variance =
        std::max(0.0, pf.mean_feature.variance + weight * cache.last_residual.variance);
  }
}

SlotDemand slot_demand(const PredictedFeature &pf, double dispersion_tolerance) {
  if (!(pf.mean_feature.mean > 0.0)) {
    return 0.0;
  }
  return fit_distribution(pf, dispersion_tolerance);
}

SliceProblem remaining_problem(const WindowContext &ctx, const SlicingDecision &decision, int first,
                               const std::vector<PredictedFeature> &predictions,
                               const TwinPolicy &policy) {
  std::vector<SlotDemand> demand;
  demand.reserve(predictions.size());
  for (const auto &pf : predictions) {
    demand.push_back(slot_demand(pf, policy.dispersion_tolerance));
  }
  SliceProblem p =
      SliceProblem::from_schedule(*ctx.schedule, ctx.window, first, std::move(demand), ctx.link);
  p.beta_resource = ctx.beta_resource;
  p.beta_delay = ctx.beta_delay;
  p.big_m = ctx.big_m;
  p.satisfaction = policy.satisfaction;
  for (std::size_t i = 0; i < p.satellites.size(); ++i) {
    const int k = decision.index_of(p.satellites[i]);
    if (k >= 0 && decision.locked[k]) {
      p.locked[i] = decision.executed[k];
    }
  }
  return p;
}

EmulationReport emulate(const SlicingDecision &decision, const WindowContext &ctx,
                        const FeatureCache &cache, const TwinPolicy &policy) {
  EmulationReport report;
  report.first_slot = cache.predicted_first;
  if (cache.predicted.empty()) {
    return report;
  }
  const std::vector<PredictedFeature> revised(cache.predicted.begin(), cache.predicted.end());
  const SliceProblem p = remaining_problem(ctx, decision, cache.predicted_first, revised, policy);
  std::vector<double> b(p.satellites.size(), 0.0);
  std::vector<int> r(p.satellites.size(), 0);
  for (std::size_t i = 0; i < p.satellites.size(); ++i) {
    const int k = decision.index_of(p.satellites[i]);
    if (k < 0) {
      continue;
    }
    b[i] = decision.locked[k] ? decision.executed[k] : decision.candidate[k];
    r[i] = decision.locked[k] ? (decision.executed[k] > 0.0 ? 1 : 0) : decision.active[k];
    if (!decision.locked[k]) {
      for (int t = 0; t < p.slot_count(); ++t) {
        if (p.visible[t][i]) {
          report.any_unexecuted_satellite_remaining = true;
          break;
        }
      }
    }
  }
  report.cost = window_objective(p, b, r);
  const std::vector<double> thresholds = problem_thresholds(p);
  const std::vector<double> capacity = served_capacity(p, b);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    report.satisfied.push_back(capacity[t] >= thresholds[t] ? 1 : 0);
  }
  return report;
}

TwinAction maybe_reslice(const EmulationReport &report, const FeatureCache &cache,
                         const BnnModel &model, const SlicingDecision &decision,
                         const WindowContext &ctx, const TwinPolicy &policy, int mc_samples,
                         std::uint64_t seed) {
  if (!policy.reslice || !report.any_unexecuted_satellite_remaining || cache.predicted.empty()) {
    return Keep{};
  }
  const int first = cache.predicted_first;
  bool trigger = !report.all_satisfied();
  if (!trigger) {
    const std::vector<PredictedFeature> revised(cache.predicted.begin(), cache.predicted.end());
    try {
      const SlicingDecision alt =
          solve_window(remaining_problem(ctx, decision, first, revised, policy), ctx.solver);
      trigger = alt.objective < report.cost - policy.cost_tolerance * std::abs(report.cost);
    } catch (const Infeasible &) {
      trigger = true;
    }
  }
  if (!trigger) {
    return Keep{};
  }
  const int remaining = static_cast<int>(cache.predicted.size());
  std::vector<PredictedFeature> fresh = multistep_predict(
      model, cache.recent(model.history_length()), remaining, mc_samples, seed);
  const SliceProblem p = remaining_problem(ctx, decision, first, fresh, policy);
  SlicingDecision next;
  try {
    next = solve_window(p, ctx.solver);
  } catch (const Infeasible &) {
    next = best_effort_decision(p);
  }
  return Resliced{std::move(next), std::move(fresh)};
}

}  // namespace leoslice
