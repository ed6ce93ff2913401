#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "leoslice/constellation.hpp"
#include "leoslice/demand.hpp"
#include "leoslice/linkmodel.hpp"
#include "leoslice/predictor.hpp"
#include "leoslice/slicer.hpp"

namespace leoslice {

enum class Scheme { FRS, FDTRS, ADTRS, PerfectRS };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string &name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Seeds {
  std::uint64_t demand = 1;
  std::uint64_t training = 2;
  std::uint64_t prediction = 3;
};

struct ScenarioConfig {
  ConstellationConfig constellation;
  GroundArea area;
  LinkParams link;

  int windows = 9;
  int window_length = 10;
  double slot_duration_s = 10.0;
  int warmup_slots = 60;

  Scheme scheme = Scheme::ADTRS;
  double beta_resource = 1e-6;  // per Hz and slot (1 per MHz)
  double beta_delay = 100.0;    // per second
  double satisfaction = 0.9;
  double big_m = 1e9;
  SolverOptions solver;

  double discount = 0.6;
  double dispersion_tolerance = 0.2;
  double reslice_cost_tolerance = 1e-3;

  // Judge violations against the slot's mean demand instead of its
  // empirical effective bandwidth.
  bool violation_vs_mean = false;

  std::optional<std::filesystem::path> trace_path;
  double base_rate = 25.0;  // packets/s for the default synthetic regime
  std::optional<RegimeSpec> regime;

  BnnConfig predictor;
  int retrain_every = 1;  // windows

  Seeds seeds;

  int horizon_slots() const { return windows * window_length; }
  int tau() const { return static_cast<int>(slot_duration_s); }
  /// Label like "ADTRS 0.9"; FRS and PerfectRS carry no gamma.
  std::string label() const;
  RegimeSpec effective_regime() const;
  void validate() const;
};

nlohmann::json to_json(const ScenarioConfig &config);
ScenarioConfig config_from_json(const nlohmann::json &j);
ScenarioConfig load_config(const std::filesystem::path &path);

/// FNV-1a 64 over the canonical JSON form, as 16 hex digits.
std::string config_digest(const ScenarioConfig &config);

nlohmann::json to_json(const SliceProblem &problem);
SliceProblem problem_from_json(const nlohmann::json &j);
nlohmann::json to_json(const SlicingDecision &decision);

}  // namespace leoslice
