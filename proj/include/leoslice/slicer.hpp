#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "leoslice/constellation.hpp"
#include "leoslice/linkmodel.hpp"
#include "leoslice/predictor.hpp"

namespace leoslice {

class DegenerateQuantile : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class Infeasible : public std::runtime_error {
 public:
  Infeasible(const std::string &what, int slot) : std::runtime_error(what), slot_(slot) {}
  int binding_slot() const { return slot_; }

 private:
  int slot_;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic equivalent of Pr{sum C >= A(l~, theta)} >= gamma for the
/// fitted distribution; negative values are clamped to 0.
double demand_threshold(const FittedDemandDistribution &dist, double qos_exponent,
                        double satisfaction);

// Demand of one slot: a fitted distribution (chance constraint) or a fixed
// threshold in packets/s (oracle demand, zero demand).
using SlotDemand = std::variant<FittedDemandDistribution, double>;

struct SliceProblem {
  int window = 0;
  int first_slot = 0;            // window-relative index of slot row 0
  std::vector<int> satellites;   // ids, ascending
  // [slot][satellite index]
  std::vector<std::vector<unsigned char>> visible;
  std::vector<std::vector<double>> distance_km;
  std::vector<SlotDemand> demand;
  LinkParams link;
  double beta_resource = 1e-6;  // per Hz and slot
  double beta_delay = 100.0;    // per second
  double satisfaction = 0.9;
  double big_m = 1e9;
  // Executed fractions of satellites that already served the area.
  std::vector<std::optional<double>> locked;

  int slot_count() const { return static_cast<int>(visible.size()); }
  int satellite_count() const { return static_cast<int>(satellites.size()); }
  void validate() const;

  /// Rows for window-relative slots [first, T) of window w, covering every
  /// satellite in S_w.
  static SliceProblem from_schedule(const CoverageSchedule &schedule, int window, int first,
                                    std::vector<SlotDemand> demand, const LinkParams &link);
};

struct SlicingDecision {
  std::vector<int> satellites;
  std::vector<double> candidate;       // b~
  std::vector<int> active;             // r
  std::vector<double> executed;        // b
  std::vector<unsigned char> locked;
  double objective = 0.0;
  std::vector<double> thresholds;      // per problem slot

  int index_of(int sat_id) const;
};

/// Per-slot thresholds of the problem (packets/s).
std::vector<double> problem_thresholds(const SliceProblem &problem);

/// Queue-plus-propagation delay with the big-M deactivation term.
double big_m_delay(double candidate, int active, bool visible, double distance_km,
                   const LinkParams &link, double big_m);

/// Window objective sum_t beta1 * C_res + beta2 * max_s D^M for given (b~, r).
double window_objective(const SliceProblem &problem, const std::vector<double> &candidate,
                        const std::vector<int> &active);

/// Served effective capacity sum_s C(R, theta) per problem slot.
std::vector<double> served_capacity(const SliceProblem &problem,
                                    const std::vector<double> &candidate);

struct SolverOptions {
  int exact_limit = 12;          // enumerate r exactly up to this many free satellites
  double tolerance = 1e-7;       // relative duality-gap target of the subproblem
};

/// Minimizes the window objective over (b~, r) with locked satellites fixed.
/// Candidate activation sets are evaluated in parallel.
SlicingDecision solve_window(const SliceProblem &problem, const SolverOptions &options = {});

/// Full reservation on every satellite the problem may still change.
SlicingDecision best_effort_decision(const SliceProblem &problem);

namespace reference {
/// Same search evaluated one activation set at a time.
SlicingDecision solve_window_serial(const SliceProblem &problem, const SolverOptions &options = {});
}  // namespace reference

/// Locks every unlocked satellite whose first visible slot of window w is at or
/// before window-relative slot t, executing b = b~.
void execute_on_coverage(SlicingDecision &decision, const CoverageSchedule &schedule, int window,
                         int slot);

}  // namespace leoslice
