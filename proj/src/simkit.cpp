#include "leoslice/simkit.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "leoslice/twin.hpp"

namespace leoslice {

using nlohmann::json;

namespace {

int first_slot_of(const ScenarioConfig &config, int window) {
  return config.warmup_slots + window * config.window_length;
}

std::span<const DemandFeature> history_before(const SimulationInputs &inputs, int global_slot,
                                               int k) {
  return std::span<const DemandFeature>(inputs.features).subspan(global_slot - k, k);
}

std::uint64_t window_seed(const ScenarioConfig &config, int window) {
  return derive_seed(config.seeds.prediction, static_cast<std::uint64_t>(window));
}

struct Plan {
  SlicingDecision decision;
  std::vector<PredictedFeature> predictions;
  bool infeasible = false;
};

Plan plan_window(const ScenarioConfig &config, const SimulationInputs &inputs, int window) {
  const int T = config.window_length;
  const int g0 = first_slot_of(config, window);
  const BnnModel &model = inputs.models.at(window);
  const int K = model.history_length();

  Plan plan;
  std::vector<SlotDemand> demand;
  demand.reserve(T);
  switch (config.scheme) {
    case Scheme::FRS: {
      plan.predictions = multistep_predict(model.collapsed(), history_before(inputs, g0, K), T, 1,
                                           window_seed(config, window));
      break;
    }
    case Scheme::FDTRS:
    case Scheme::ADTRS: {
      plan.predictions = multistep_predict(model, history_before(inputs, g0, K), T,
                                           config.predictor.mc_samples, window_seed(config, window));
      break;
    }
    case Scheme::PerfectRS:
      for (int t = 0; t < T; ++t) {
        demand.emplace_back(required_capacity(config, inputs.trace, g0 + t));
      }
      break;
  }
  for (const auto &pf : plan.predictions) {
    demand.push_back(slot_demand(pf, config.dispersion_tolerance));
  }

  SliceProblem problem =
      SliceProblem::from_schedule(inputs.schedule, window, 0, std::move(demand), config.link);
  problem.beta_resource = config.beta_resource;
  problem.beta_delay = config.beta_delay;
  problem.satisfaction = config.satisfaction;
  problem.big_m = config.big_m;
  try {
    plan.decision = solve_window(problem, config.solver);
  } catch (const Infeasible &) {
    plan.decision = best_effort_decision(problem);
    plan.infeasible = true;
  }
  return plan;
}

SlotMetrics measure_slot(const ScenarioConfig &config, const SimulationInputs &inputs,
                         const SlicingDecision &decision, int window, int slot) {
  const int h = window * config.window_length + slot;
  SlotMetrics m;
  m.slot = h;
  for (std::size_t i = 0; i < decision.satellites.size(); ++i) {
    const int sat = decision.satellites[i];
    const bool visible = inputs.schedule.is_visible(sat, h);
    const double b = decision.locked[i] ? decision.executed[i] : 0.0;
    const double d = inputs.schedule.distance(sat, h);
    m.capacity += effective_capacity(rate(visible, b, config.link, d), config.link.qos_exponent);
    if (!visible || b <= 0.0) {
      continue;
    }
    m.resource_hz += b * config.link.bandwidth_hz;
    m.delay_s = std::max(m.delay_s, total_delay(true, b, config.link, d));
    ++m.active_satellites;
    m.executed.emplace_back(sat, b);
  }
  m.required = required_capacity(config, inputs.trace, first_slot_of(config, window) + slot);
  m.violated = m.capacity < m.required;
  return m;
}

std::string file_stem(const std::string &label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

json slot_to_json(const SlotMetrics &m) {
  json executed = json::array();
  for (const auto &[sat, b] : m.executed) {
    executed.push_back({sat, b});
  }
  return {{"slot", m.slot},
          {"resource_hz", m.resource_hz},
          {"delay_s", m.delay_s},
          {"violated", m.violated},
          {"active_satellites", m.active_satellites},
          {"capacity", m.capacity},
          {"required", m.required},
          {"executed", executed}};
}

}  // namespace

SimulationInputs prepare_inputs(const ScenarioConfig &config) {
  config.validate();
  SimulationInputs in;
  const int tau = config.tau();
  const int total_slots = config.warmup_slots + config.horizon_slots();
  if (config.trace_path) {
    in.trace = ingest_csv(*config.trace_path);
  } else {
    in.trace = generate(config.effective_regime(), config.seeds.demand);
  }
  if (in.trace.duration_s() < total_slots * tau) {
    throw ConfigError("demand: trace covers " + std::to_string(in.trace.duration_s()) +
                      " s but the scenario needs " + std::to_string(total_slots * tau) + " s");
  }
  in.features = slot_features(in.trace, tau);
  in.schedule = build_schedule(config.constellation, config.area, config.horizon_slots(),
                               config.slot_duration_s, config.window_length);

  const int n = config.predictor.training_slots;
  for (int w = 0; w < config.windows; ++w) {
    if (w % config.retrain_every != 0) {
      in.models.push_back(in.models.back());
      continue;
    }
    const int g0 = first_slot_of(config, w);
    const auto window_features = std::span<const DemandFeature>(in.features).subspan(g0 - n, n);
    TrainResult tr = train_on_features(window_features, config.predictor,
                                       derive_seed(config.seeds.training, w));
    in.models.push_back(std::move(tr.model));
    in.training_curves.push_back(std::move(tr.loss_curve));
  }
  return in;
}

SimulationInputs with_geometry(const SimulationInputs &inputs, const ScenarioConfig &config) {
  SimulationInputs out = inputs;
  out.schedule = build_schedule(config.constellation, config.area, config.horizon_slots(),
                                config.slot_duration_s, config.window_length);
  return out;
}

double required_capacity(const ScenarioConfig &config, const DemandTrace &trace, int global_slot) {
  const auto samples = slot_samples(trace, global_slot, config.tau());
  if (config.violation_vs_mean) {
    return extract_features(samples).mean;
  }
  return effective_bandwidth(EmpiricalDemand{{samples.begin(), samples.end()}},
                             config.link.qos_exponent);
}

SlicingDecision scheme_plan(const ScenarioConfig &config, const SimulationInputs &inputs,
                            int window, std::vector<PredictedFeature> *predictions) {
  Plan plan = plan_window(config, inputs, window);
  if (predictions) {
    *predictions = std::move(plan.predictions);
  }
  return plan.decision;
}

RunReport run(const ScenarioConfig &config) { return run(config, prepare_inputs(config)); }

RunReport run(const ScenarioConfig &config, const SimulationInputs &inputs) {
  config.validate();
  const int T = config.window_length;
  if (static_cast<int>(inputs.models.size()) < config.windows ||
      inputs.schedule.horizon_slots != config.horizon_slots() ||
      inputs.schedule.window_length != T) {
    throw ConfigError("simulation inputs do not match the scenario horizon");
  }
  RunReport report;
  report.scheme = config.label();
  report.config_digest = config_digest(config);

  const bool adaptive = config.scheme == Scheme::ADTRS;
  TwinPolicy policy;
  policy.discount = config.discount;
  policy.satisfaction = config.satisfaction;
  policy.reslice = adaptive;
  policy.dispersion_tolerance = config.dispersion_tolerance;
  policy.cost_tolerance = config.reslice_cost_tolerance;

  for (int w = 0; w < config.windows; ++w) {
    const int g0 = first_slot_of(config, w);
    Plan plan = plan_window(config, inputs, w);
    report.infeasible_windows += plan.infeasible ? 1 : 0;
    SlicingDecision decision = std::move(plan.decision);

    FeatureCache cache;
    const int keep = std::min<int>(static_cast<int>(cache.history_capacity), g0);
    for (int g = g0 - keep; g < g0; ++g) {
      cache.push_history(inputs.features[g]);
    }
    cache.set_predictions(plan.predictions, 0);

    WindowContext ctx;
    ctx.schedule = &inputs.schedule;
    ctx.window = w;
    ctx.link = config.link;
    ctx.beta_resource = config.beta_resource;
    ctx.beta_delay = config.beta_delay;
    ctx.big_m = config.big_m;
    ctx.solver = config.solver;

    for (int t = 0; t < T; ++t) {
      execute_on_coverage(decision, inputs.schedule, w, t);
      report.slots.push_back(measure_slot(config, inputs, decision, w, t));

      const DemandFeature &actual = inputs.features[g0 + t];
      cache.push_history(actual);
      if (!adaptive) {
        continue;
      }
      revise_features(cache, actual, t, config.discount);
      const EmulationReport em = emulate(decision, ctx, cache, policy);
      TwinEvent ev;
      ev.slot = w * T + t;
      ev.emulated_cost = em.cost;
      ev.unsatisfied_slots = static_cast<int>(
          std::count(em.satisfied.begin(), em.satisfied.end(), static_cast<unsigned char>(0)));
      const std::uint64_t seed = derive_seed(window_seed(config, w), static_cast<std::uint64_t>(t + 1));
      TwinAction action = maybe_reslice(em, cache, inputs.models[w], decision, ctx, policy,
                                        config.predictor.mc_samples, seed);
      if (auto *r = std::get_if<Resliced>(&action)) {
        decision = std::move(r->decision);
        cache.set_predictions(std::move(r->predictions), t + 1);
        ev.resliced = true;
        ++report.repredictions;
      }
      ev.repredictions = report.repredictions;
      report.events.push_back(ev);
    }
  }

  const double n = static_cast<double>(report.slots.size());
  int violations = 0;
  for (const auto &m : report.slots) {
    report.avg_resource_hz += m.resource_hz;
    report.avg_delay_s += m.delay_s;
    violations += m.violated ? 1 : 0;
  }
  if (n > 0) {
    report.avg_resource_hz /= n;
    report.avg_delay_s /= n;
    report.violation_rate = violations / n;
  }
  return report;
}

std::vector<RunReport> sweep_elevation(const ScenarioConfig &config,
                                       const std::vector<double> &angles_deg) {
  if (angles_deg.empty()) {
    throw std::invalid_argument("sweep_elevation: no angles given");
  }
  const SimulationInputs base = prepare_inputs(config);
  std::vector<RunReport> out;
  for (double angle : angles_deg) {
    ScenarioConfig c = config;
    c.area.min_elevation_deg = angle;
    c.validate();
    out.push_back(run(c, with_geometry(base, c)));
  }
  return out;
}

void write_summary_json(const RunReport &r, std::ostream &out) {
  json slots = json::array();
  for (const auto &m : r.slots) {
    slots.push_back(slot_to_json(m));
  }
  json events = json::array();
  for (const auto &e : r.events) {
    events.push_back({{"slot", e.slot},
                      {"emulated_cost", e.emulated_cost},
                      {"unsatisfied_slots", e.unsatisfied_slots},
                      {"resliced", e.resliced},
                      {"repredictions", e.repredictions}});
  }
  const json j = {{"scheme", r.scheme},
                  {"config_digest", r.config_digest},
                  {"avg_resource_hz", r.avg_resource_hz},
                  {"avg_delay_s", r.avg_delay_s},
                  {"violation_rate", r.violation_rate},
                  {"repredictions", r.repredictions},
                  {"infeasible_windows", r.infeasible_windows},
                  {"slots", slots},
                  {"events", events}};
  out << j.dump(2) << '\n';
}

RunReport read_summary_json(std::istream &in) {
  RunReport r;
  try {
    json j;
    in >> j;
    r.scheme = j.at("scheme").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.avg_resource_hz = j.at("avg_resource_hz").get<double>();
    r.avg_delay_s = j.at("avg_delay_s").get<double>();
    r.violation_rate = j.at("violation_rate").get<double>();
    r.repredictions = j.at("repredictions").get<int>();
    r.infeasible_windows = j.value("infeasible_windows", 0);
    for (const auto &s : j.value("slots", json::array())) {
      SlotMetrics m;
      m.slot = s.at("slot").get<int>();
      m.resource_hz = s.at("resource_hz").get<double>();
      m.delay_s = s.at("delay_s").get<double>();
      m.violated = s.at("violated").get<bool>();
      m.active_satellites = s.at("active_satellites").get<int>();
      m.capacity = s.at("capacity").get<double>();
      m.required = s.at("required").get<double>();
      for (const auto &e : s.at("executed")) {
        m.executed.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
      }
      r.slots.push_back(std::move(m));
    }
    for (const auto &e : j.value("events", json::array())) {
      TwinEvent ev;
      ev.slot = e.at("slot").get<int>();
      ev.emulated_cost = e.at("emulated_cost").get<double>();
      ev.unsatisfied_slots = e.at("unsatisfied_slots").get<int>();
      ev.resliced = e.at("resliced").get<bool>();
      ev.repredictions = e.at("repredictions").get<int>();
      r.events.push_back(ev);
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
  return r;
}

void write_slots_csv(const RunReport &r, std::ostream &out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "slot,resource_hz,delay_s,violated,active_satellites,capacity,required,executed\n";
  for (const auto &m : r.slots) {
    out << m.slot << ',' << m.resource_hz << ',' << m.delay_s << ',' << (m.violated ? 1 : 0)
        << ',' << m.active_satellites << ',' << m.capacity << ',' << m.required << ',';
    for (std::size_t i = 0; i < m.executed.size(); ++i) {
      out << (i ? ";" : "") << m.executed[i].first << ':' << m.executed[i].second;
    }
    out << '\n';
  }
}

void write_events_csv(const RunReport &r, std::ostream &out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "slot,emulated_cost,unsatisfied_slots,action,repredictions\n";
  for (const auto &e : r.events) {
    out << e.slot << ',' << e.emulated_cost << ',' << e.unsatisfied_slots << ','
        << (e.resliced ? "reslice" : "keep") << ',' << e.repredictions << '\n';
  }
}

void write_summary_table_csv(const std::vector<RunReport> &reports, std::ostream &out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "scheme,avg_resource_hz,delay_cost_s,violation_rate,repredictions\n";
  for (const auto &r : reports) {
    out << r.scheme << ',' << r.avg_resource_hz << ',' << r.avg_delay_s << ','
        << r.violation_rate << ',' << r.repredictions << '\n';
  }
}

void print_summary_table(const std::vector<RunReport> &reports, std::ostream &out) {
  out << std::left << std::setw(14) << "scheme" << std::right << std::setw(16)
      << "resource (MHz)" << std::setw(12) << "delay (s)" << std::setw(12) << "violation"
      << std::setw(14) << "repredictions" << '\n';
  out << std::fixed;
  for (const auto &r : reports) {
    out << std::left << std::setw(14) << r.scheme << std::right << std::setw(16)
        << std::setprecision(2) << r.avg_resource_hz / 1e6 << std::setw(12)
        << std::setprecision(3) << r.avg_delay_s << std::setw(11) << std::setprecision(1)
        << 100.0 * r.violation_rate << '%' << std::setw(14) << r.repredictions << '\n';
  }
  out << std::defaultfloat;
}

void save_report(const RunReport &report, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = file_stem(report.scheme);
  auto open = [&](const std::string &suffix) {
    std::ofstream f(dir / (stem + suffix), std::ios::binary);
    if (!f) {
      throw std::runtime_error("cannot write " + (dir / (stem + suffix)).string());
    }
    return f;
  };
  {
    auto f = open(".summary.json");
    write_summary_json(report, f);
  }
  {
    auto f = open(".slots.csv");
    write_slots_csv(report, f);
  }
  {
    auto f = open(".events.csv");
    write_events_csv(report, f);
  }
}

std::vector<RunReport> load_reports(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 13 && name.ends_with(".summary.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunReport> out;
  for (const auto &p : files) {
    std::ifstream in(p);
    out.push_back(read_summary_json(in));
  }
  return out;
}

}  // namespace leoslice
