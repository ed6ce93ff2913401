#include "leoslice/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace leoslice {

using nlohmann::json;

namespace {

template <typename T>
void read(const json &j, const char *key, T &field) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
  }
}

json regime_to_json(const RegimeSpec &r) {
  json segs = json::array();
  for (const auto &s : r.segments) {
    segs.push_back({{"start_s", s.start_s},
                    {"kind", s.kind == RegimeKind::Poisson ? "poisson" : "gaussian"},
                    {"mean_start", s.mean_start},
                    {"mean_end", s.mean_end},
                    {"variance_start", s.variance_start},
                    {"variance_end", s.variance_end}});
  }
  return {{"duration_s", r.duration_s}, {"segments", segs}};
}

RegimeSpec regime_from_json(const json &j) {
  RegimeSpec r;
  read(j, "duration_s", r.duration_s);
  for (const auto &s : j.at("segments")) {
    RegimeSegment seg;
    read(s, "start_s", seg.start_s);
    const std::string kind = s.value("kind", "poisson");
    if (kind == "poisson") {
      seg.kind = RegimeKind::Poisson;
    } else if (kind == "gaussian") {
      seg.kind = RegimeKind::Gaussian;
    } else {
      throw ConfigError("demand.regime: unknown segment kind '" + kind + "'");
    }
    read(s, "mean_start", seg.mean_start);
    seg.mean_end = seg.mean_start;
    read(s, "mean_end", seg.mean_end);
    read(s, "variance_start", seg.variance_start);
    seg.variance_end = seg.variance_start;
    read(s, "variance_end", seg.variance_end);
    r.segments.push_back(seg);
  }
  return r;
}

json fitted_to_json(const FittedDemandDistribution &d) {
  if (const auto *p = std::get_if<PoissonFit>(&d)) {
    return {{"kind", "poisson"}, {"intensity", p->intensity}, {"intensity_std", p->intensity_std}};
  }
  const auto &g = std::get<GaussianFit>(d);
  return {{"kind", "gaussian"},
          {"mean_of_mean", g.mean_of_mean},
          {"std_of_mean", g.std_of_mean},
          {"mean_of_variance", g.mean_of_variance},
          {"std_of_variance", g.std_of_variance}};
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::FRS: return "FRS";
    case Scheme::FDTRS: return "FDTRS";
    case Scheme::ADTRS: return "ADTRS";
    case Scheme::PerfectRS: return "PerfectRS";
  }
  return "?";
}

Scheme scheme_from_string(const std::string &name) {
  if (name == "FRS") return Scheme::FRS;
  if (name == "FDTRS") return Scheme::FDTRS;
  if (name == "ADTRS") return Scheme::ADTRS;
  if (name == "PerfectRS" || name == "Perfect") return Scheme::PerfectRS;
  throw ConfigError("unknown scheme '" + name + "' (expected FRS, FDTRS, ADTRS or PerfectRS)");
}

std::string ScenarioConfig::label() const {
  if (scheme == Scheme::FRS || scheme == Scheme::PerfectRS) {
    return to_string(scheme);
  }
  std::ostringstream out;
  out << to_string(scheme) << ' ' << satisfaction;
  return out.str();
}

RegimeSpec ScenarioConfig::effective_regime() const {
  if (regime) {
    return *regime;
  }
  return default_regime(warmup_slots * tau(), horizon_slots() * tau(), base_rate);
}

void ScenarioConfig::validate() const {
  try {
    constellation.validate();
    area.validate();
    link.validate();
    predictor.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (windows < 1 || window_length < 1) {
    throw ConfigError("horizon: windows and window_length must be >= 1");
  }
  if (!(slot_duration_s >= 1.0) || slot_duration_s != static_cast<double>(tau())) {
    throw ConfigError("horizon: slot duration must be a whole number of seconds");
  }
  if (warmup_slots < predictor.training_slots) {
    throw ConfigError("horizon: warmup_slots must cover predictor.training_slots");
  }
  if (!(satisfaction > 0.0 && satisfaction < 1.0)) {
    throw ConfigError("slicing: satisfaction must lie in (0, 1)");
  }
  if (beta_resource < 0.0 || beta_delay < 0.0) {
    throw ConfigError("slicing: weights must be non-negative");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ConfigError("twin: discount must lie in (0, 1)");
  }
  if (retrain_every < 1) {
    throw ConfigError("predictor: retrain_every must be >= 1");
  }
  if (trace_path && !std::filesystem::exists(*trace_path)) {
    throw ConfigError("demand: trace file not found: " + trace_path->string());
  }
}

json to_json(const ScenarioConfig &c) {
  json j;
  j["constellation"] = {{"orbit_count", c.constellation.orbit_count},
                        {"sats_per_orbit", c.constellation.sats_per_orbit},
                        {"phasing_factor", c.constellation.phasing_factor},
                        {"altitude_km", c.constellation.altitude_km},
                        {"inclination_deg", c.constellation.inclination_deg},
                        {"earth_radius_km", c.constellation.earth_radius_km},
                        {"earth_rotation_rate", c.constellation.earth_rotation_rate},
                        {"gravitational_parameter", c.constellation.gravitational_parameter},
                        {"epoch_raan_offset_deg", c.constellation.epoch_raan_offset_deg}};
  j["area"] = {{"lat_min_deg", c.area.lat_min_deg},
               {"lat_max_deg", c.area.lat_max_deg},
               {"lon_min_deg", c.area.lon_min_deg},
               {"lon_max_deg", c.area.lon_max_deg},
               {"min_elevation_deg", c.area.min_elevation_deg}};
  j["link"] = {{"bandwidth_hz", c.link.bandwidth_hz},
               {"packet_size_bits", c.link.packet_size_bits},
               {"tx_power_w", c.link.tx_power_w},
               {"noise_power_w", c.link.noise_power_w},
               {"pathloss_exponent", c.link.pathloss_exponent},
               {"antenna_gain", c.link.antenna_gain},
               {"qos_exponent", c.link.qos_exponent},
               {"delay_violation_target", c.link.delay_violation_target},
               {"light_speed_km_s", c.link.light_speed_km_s}};
  j["horizon"] = {{"windows", c.windows},
                  {"window_length", c.window_length},
                  {"slot_duration_s", c.slot_duration_s},
                  {"warmup_slots", c.warmup_slots}};
  j["slicing"] = {{"scheme", to_string(c.scheme)},
                  {"beta_resource", c.beta_resource},
                  {"beta_delay", c.beta_delay},
                  {"satisfaction", c.satisfaction},
                  {"big_m", c.big_m},
                  {"exact_limit", c.solver.exact_limit},
                  {"solver_tolerance", c.solver.tolerance},
                  {"violation_vs_mean", c.violation_vs_mean}};
  j["twin"] = {{"discount", c.discount},
               {"dispersion_tolerance", c.dispersion_tolerance},
               {"reslice_cost_tolerance", c.reslice_cost_tolerance}};
  json demand = {{"base_rate", c.base_rate}};
  if (c.trace_path) {
    demand["trace_path"] = c.trace_path->string();
  }
  if (c.regime) {
    demand["regime"] = regime_to_json(*c.regime);
  }
  j["demand"] = demand;
  const auto &p = c.predictor;
  j["predictor"] = {{"history_length", p.history_length},
                    {"hidden_size", p.hidden_size},
                    {"prior_std", p.prior_std},
                    {"init_log_std", p.init_log_std},
                    {"kl_weight", p.kl_weight},
                    {"mc_samples", p.mc_samples},
                    {"train_mc_samples", p.train_mc_samples},
                    {"epochs", p.epochs},
                    {"learning_rate", p.learning_rate},
                    {"momentum", p.momentum},
                    {"clip_norm", p.clip_norm},
                    {"training_slots", p.training_slots},
                    {"retrain_every", c.retrain_every}};
  j["seeds"] = {{"demand", c.seeds.demand},
                {"training", c.seeds.training},
                {"prediction", c.seeds.prediction}};
  return j;
}

ScenarioConfig config_from_json(const json &j) {
  ScenarioConfig c;
  try {
    if (j.contains("constellation")) {
      const auto &s = j["constellation"];
      read(s, "orbit_count", c.constellation.orbit_count);
      read(s, "sats_per_orbit", c.constellation.sats_per_orbit);
      read(s, "phasing_factor", c.constellation.phasing_factor);
      read(s, "altitude_km", c.constellation.altitude_km);
      read(s, "inclination_deg", c.constellation.inclination_deg);
      read(s, "earth_radius_km", c.constellation.earth_radius_km);
      read(s, "earth_rotation_rate", c.constellation.earth_rotation_rate);
      read(s, "gravitational_parameter", c.constellation.gravitational_parameter);
      read(s, "epoch_raan_offset_deg", c.constellation.epoch_raan_offset_deg);
    }
    if (j.contains("area")) {
      const auto &s = j["area"];
      read(s, "lat_min_deg", c.area.lat_min_deg);
      read(s, "lat_max_deg", c.area.lat_max_deg);
      read(s, "lon_min_deg", c.area.lon_min_deg);
      read(s, "lon_max_deg", c.area.lon_max_deg);
      read(s, "min_elevation_deg", c.area.min_elevation_deg);
    }
    if (j.contains("link")) {
      const auto &s = j["link"];
      read(s, "bandwidth_hz", c.link.bandwidth_hz);
      read(s, "packet_size_bits", c.link.packet_size_bits);
      read(s, "tx_power_w", c.link.tx_power_w);
      read(s, "noise_power_w", c.link.noise_power_w);
      read(s, "pathloss_exponent", c.link.pathloss_exponent);
      read(s, "antenna_gain", c.link.antenna_gain);
      read(s, "qos_exponent", c.link.qos_exponent);
      read(s, "delay_violation_target", c.link.delay_violation_target);
      read(s, "light_speed_km_s", c.link.light_speed_km_s);
    }
    if (j.contains("horizon")) {
      const auto &s = j["horizon"];
      read(s, "windows", c.windows);
      read(s, "window_length", c.window_length);
      read(s, "slot_duration_s", c.slot_duration_s);
      read(s, "warmup_slots", c.warmup_slots);
    }
    if (j.contains("slicing")) {
      const auto &s = j["slicing"];
      if (s.contains("scheme")) {
        c.scheme = scheme_from_string(s["scheme"].get<std::string>());
      }
      read(s, "beta_resource", c.beta_resource);
      read(s, "beta_delay", c.beta_delay);
      read(s, "satisfaction", c.satisfaction);
      read(s, "big_m", c.big_m);
      read(s, "exact_limit", c.solver.exact_limit);
      read(s, "solver_tolerance", c.solver.tolerance);
      read(s, "violation_vs_mean", c.violation_vs_mean);
    }
    if (j.contains("twin")) {
      const auto &s = j["twin"];
      read(s, "discount", c.discount);
      read(s, "dispersion_tolerance", c.dispersion_tolerance);
      read(s, "reslice_cost_tolerance", c.reslice_cost_tolerance);
    }
    if (j.contains("demand")) {
      const auto &s = j["demand"];
      read(s, "base_rate", c.base_rate);
      if (s.contains("trace_path")) {
        c.trace_path = s["trace_path"].get<std::string>();
      }
      if (s.contains("regime")) {
        c.regime = regime_from_json(s["regime"]);
      }
    }
    if (j.contains("predictor")) {
      const auto &s = j["predictor"];
      auto &p = c.predictor;
      read(s, "history_length", p.history_length);
      read(s, "hidden_size", p.hidden_size);
      read(s, "prior_std", p.prior_std);
      read(s, "init_log_std", p.init_log_std);
      read(s, "kl_weight", p.kl_weight);
      read(s, "mc_samples", p.mc_samples);
      read(s, "train_mc_samples", p.train_mc_samples);
      read(s, "epochs", p.epochs);
      read(s, "learning_rate", p.learning_rate);
      read(s, "momentum", p.momentum);
      read(s, "clip_norm", p.clip_norm);
      read(s, "training_slots", p.training_slots);
      read(s, "retrain_every", c.retrain_every);
    }
    if (j.contains("seeds")) {
      const auto &s = j["seeds"];
      read(s, "demand", c.seeds.demand);
      read(s, "training", c.seeds.training);
      read(s, "prediction", c.seeds.prediction);
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  ScenarioConfig c = config_from_json(j);
  if (c.trace_path && c.trace_path->is_relative()) {
    c.trace_path = path.parent_path() / *c.trace_path;
  }
  c.validate();
  return c;
}

std::string config_digest(const ScenarioConfig &config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const SliceProblem &p) {
  json slots = json::array();
  for (int t = 0; t < p.slot_count(); ++t) {
    json demand;
    if (const auto *fixed = std::get_if<double>(&p.demand[t])) {
      demand = {{"kind", "threshold"}, {"value", *fixed}};
    } else {
      demand = fitted_to_json(std::get<FittedDemandDistribution>(p.demand[t]));
    }
    slots.push_back({{"visible", p.visible[t]}, {"distance_km", p.distance_km[t]}, {"demand", demand}});
  }
  json locked = json::array();
  for (const auto &l : p.locked) {
    locked.push_back(l ? json(*l) : json(nullptr));
  }
  ScenarioConfig link_holder;
  link_holder.link = p.link;
  return {{"window", p.window},
          {"first_slot", p.first_slot},
          {"satellites", p.satellites},
          {"slots", slots},
          {"link", to_json(link_holder)["link"]},
          {"beta_resource", p.beta_resource},
          {"beta_delay", p.beta_delay},
          {"satisfaction", p.satisfaction},
          {"big_m", p.big_m},
          {"locked", locked}};
}

SliceProblem problem_from_json(const json &j) {
  SliceProblem p;
  try {
    read(j, "window", p.window);
    read(j, "first_slot", p.first_slot);
    p.satellites = j.at("satellites").get<std::vector<int>>();
    for (const auto &slot : j.at("slots")) {
      p.visible.push_back(slot.at("visible").get<std::vector<unsigned char>>());
      p.distance_km.push_back(slot.at("distance_km").get<std::vector<double>>());
      const auto &d = slot.at("demand");
      const std::string kind = d.at("kind").get<std::string>();
      if (kind == "threshold") {
        p.demand.emplace_back(d.at("value").get<double>());
      } else if (kind == "poisson") {
        p.demand.emplace_back(FittedDemandDistribution{
            PoissonFit{d.at("intensity").get<double>(), d.value("intensity_std", 0.0)}});
      } else if (kind == "gaussian") {
        p.demand.emplace_back(FittedDemandDistribution{GaussianFit{
            d.at("mean_of_mean").get<double>(), d.value("std_of_mean", 0.0),
            d.at("mean_of_variance").get<double>(), d.value("std_of_variance", 0.0)}});
      } else {
        throw ConfigError("instance: unknown demand kind '" + kind + "'");
      }
    }
    if (j.contains("link")) {
      p.link = config_from_json(json{{"link", j["link"]}}).link;
    }
    read(j, "beta_resource", p.beta_resource);
    read(j, "beta_delay", p.beta_delay);
    read(j, "satisfaction", p.satisfaction);
    read(j, "big_m", p.big_m);
    p.locked.assign(p.satellites.size(), std::nullopt);
    if (j.contains("locked")) {
      const auto &l = j["locked"];
      if (l.size() != p.satellites.size()) {
        throw ConfigError("instance: 'locked' must list one entry per satellite");
      }
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_null()) {
          p.locked[i] = l[i].get<double>();
        }
      }
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  try {
    p.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  return p;
}

json to_json(const SlicingDecision &d) {
  return {{"satellites", d.satellites}, {"candidate", d.candidate}, {"active", d.active},
          {"executed", d.executed},     {"locked", d.locked},       {"objective", d.objective},
          {"thresholds", d.thresholds}};
}

}  // namespace leoslice
