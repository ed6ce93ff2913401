#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "leoslice/constellation.hpp"
#include "leoslice/demand.hpp"
#include "leoslice/predictor.hpp"
#include "leoslice/scenario.hpp"
#include "leoslice/slicer.hpp"

namespace leoslice {

struct SlotMetrics {
  int slot = 0;  // horizon slot index
  double resource_hz = 0.0;
  double delay_s = 0.0;
  bool violated = false;
  int active_satellites = 0;
  double capacity = 0.0;        // sum of effective capacities, packets/s
  double required = 0.0;        // actual demand requirement, packets/s
  std::vector<std::pair<int, double>> executed;  // (satellite, b) with b > 0
};

struct TwinEvent {
  int slot = 0;
  double emulated_cost = 0.0;
  int unsatisfied_slots = 0;
  bool resliced = false;
  int repredictions = 0;
};

struct RunReport {
  std::string scheme;
  std::string config_digest;
  std::vector<SlotMetrics> slots;
  std::vector<TwinEvent> events;
  double avg_resource_hz = 0.0;
  double avg_delay_s = 0.0;
  double violation_rate = 0.0;
  int repredictions = 0;
  int infeasible_windows = 0;
};

// Inputs shared by every scheme of one scenario: coverage, demand and the
// predictor trained at the start of each window.
struct SimulationInputs {
  CoverageSchedule schedule;
  DemandTrace trace;
  std::vector<DemandFeature> features;  // per global slot (warm-up first)
  std::vector<BnnModel> models;         // per window
  std::vector<std::vector<double>> training_curves;
};

SimulationInputs prepare_inputs(const ScenarioConfig &config);

/// Same inputs with a new constellation or area; demand and models are reused.
SimulationInputs with_geometry(const SimulationInputs &inputs, const ScenarioConfig &config);

RunReport run(const ScenarioConfig &config);
RunReport run(const ScenarioConfig &config, const SimulationInputs &inputs);

/// Window-start plan of the configured scheme.
SlicingDecision scheme_plan(const ScenarioConfig &config, const SimulationInputs &inputs,
                            int window, std::vector<PredictedFeature> *predictions = nullptr);

std::vector<RunReport> sweep_elevation(const ScenarioConfig &config,
                                       const std::vector<double> &angles_deg);

/// Empirical effective bandwidth (or mean) of the slot's actual samples.
double required_capacity(const ScenarioConfig &config, const DemandTrace &trace, int global_slot);

void write_summary_json(const RunReport &report, std::ostream &out);
RunReport read_summary_json(std::istream &in);
void write_slots_csv(const RunReport &report, std::ostream &out);
void write_events_csv(const RunReport &report, std::ostream &out);

/// Summary CSV, one row per report: scheme,avg_resource_hz,delay_cost_s,violation_rate,repredictions.
void write_summary_table_csv(const std::vector<RunReport> &reports, std::ostream &out);
void print_summary_table(const std::vector<RunReport> &reports, std::ostream &out);

/// Writes <label>.summary.json, <label>.slots.csv and <label>.events.csv.
void save_report(const RunReport &report, const std::filesystem::path &dir);
std::vector<RunReport> load_reports(const std::filesystem::path &dir);

}  // namespace leoslice
