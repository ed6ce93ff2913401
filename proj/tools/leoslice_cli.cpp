#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "leoslice/scenario.hpp"
#include "leoslice/simkit.hpp"

using namespace leoslice;

namespace {

std::vector<double> parse_list(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) {
      throw ConfigError("bad number in list: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw ConfigError("empty list");
  }
  return out;
}

// "FDTRS:0.99" selects a scheme and its satisfaction level.
ScenarioConfig with_scheme(ScenarioConfig config, const std::string &spec) {
  const auto colon = spec.find(':');
  config.scheme = scheme_from_string(spec.substr(0, colon));
  if (colon != std::string::npos) {
    config.satisfaction = std::stod(spec.substr(colon + 1));
  }
  config.validate();
  return config;
}

void emit(const std::vector<RunReport> &reports, const std::string &out_dir) {
  print_summary_table(reports, std::cout);
  if (out_dir.empty()) {
    return;
  }
  for (const auto &r : reports) {
    save_report(r, out_dir);
  }
  std::ofstream table(std::filesystem::path(out_dir) / "summary.csv", std::ios::binary);
  write_summary_table_csv(reports, table);
  std::cout << "wrote " << reports.size() << " report(s) to " << out_dir << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Satellite network slicing simulator with a slice digital twin"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> schemes;
  std::string out_dir;
  auto *simulate = app.add_subcommand("simulate", "Run one scenario for one or more schemes");
  simulate->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--scheme", schemes,
                       "Scheme[:gamma], e.g. FRS, FDTRS:0.9, ADTRS:0.99, PerfectRS "
                       "(default: the config's scheme)");
  simulate->add_option("--out", out_dir, "Directory for summary JSON and CSV outputs");

  std::string checkpoint;
  int train_window = 0;
  auto *train_cmd = app.add_subcommand("train", "Train the predictor for one window");
  train_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", checkpoint, "Checkpoint file")->required();
  train_cmd->add_option("--window", train_window, "Window whose start the model is trained for");

  std::string instance_path;
  bool serial = false;
  auto *solve = app.add_subcommand("solve", "Solve one window instance and print the decision");
  solve->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_flag("--serial", serial, "Use the single-threaded reference search");

  std::string elevations = "10,20,30,40";
  auto *sweep = app.add_subcommand("sweep", "Run the configured scheme over elevation angles");
  sweep->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--elevations", elevations, "Comma-separated minimum elevations (deg)");
  sweep->add_option("--out", out_dir, "Directory for outputs");

  std::string in_dir;
  auto *report = app.add_subcommand("report", "Tabulate saved run reports");
  report->add_option("--in", in_dir, "Directory with *.summary.json")->required()->check(CLI::ExistingDirectory);

  auto *defaults = app.add_subcommand("defaults", "Print the default scenario JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults) {
      std::cout << to_json(ScenarioConfig{}).dump(2) << '\n';
    } else if (*simulate) {
      const ScenarioConfig base = load_config(config_path);
      const SimulationInputs inputs = prepare_inputs(base);
      std::vector<RunReport> reports;
      if (schemes.empty()) {
        reports.push_back(run(base, inputs));
      }
      for (const auto &s : schemes) {
        reports.push_back(run(with_scheme(base, s), inputs));
      }
      emit(reports, out_dir);
    } else if (*train_cmd) {
      const ScenarioConfig config = load_config(config_path);
      if (train_window < 0 || train_window >= config.windows) {
        throw ConfigError("--window must lie in [0, " + std::to_string(config.windows) + ")");
      }
      const DemandTrace trace = config.trace_path ? ingest_csv(*config.trace_path)
                                                  : generate(config.effective_regime(),
                                                             config.seeds.demand);
      const auto features = slot_features(trace, config.tau());
      const int end = config.warmup_slots + train_window * config.window_length;
      const int n = config.predictor.training_slots;
      if (static_cast<int>(features.size()) < end) {
        throw ConfigError("demand trace too short for the requested window");
      }
      const TrainResult tr =
          train_on_features(std::span<const DemandFeature>(features).subspan(end - n, n),
                            config.predictor, derive_seed(config.seeds.training, train_window));
      std::ofstream out(checkpoint, std::ios::binary);
      if (!out) {
        throw std::runtime_error("cannot write " + checkpoint);
      }
      tr.model.write_checkpoint(out);
      std::ofstream curve(checkpoint + ".loss.csv", std::ios::binary);
      curve << std::setprecision(17) << "epoch,loss\n";
      for (std::size_t e = 0; e < tr.loss_curve.size(); ++e) {
        curve << e << ',' << tr.loss_curve[e] << '\n';
      }
      std::cout << "final loss " << tr.loss_curve.back() << (tr.converged ? "" : " (not converged)")
                << "; checkpoint " << checkpoint << '\n';
    } else if (*solve) {
      std::ifstream in(instance_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("instance: ") + e.what());
      }
      const SliceProblem problem = problem_from_json(j);
      const SlicingDecision d =
          serial ? reference::solve_window_serial(problem) : solve_window(problem);
      std::cout << to_json(d).dump(2) << '\n';
    } else if (*sweep) {
      const ScenarioConfig config = load_config(config_path);
      std::vector<RunReport> reports = sweep_elevation(config, parse_list(elevations));
      const auto angles = parse_list(elevations);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        std::ostringstream label;
        label << reports[i].scheme << " el" << angles[i];
        reports[i].scheme = label.str();
      }
      emit(reports, out_dir);
    } else if (*report) {
      const auto reports = load_reports(in_dir);
      if (reports.empty()) {
        throw std::runtime_error("no *.summary.json files in " + in_dir);
      }
      print_summary_table(reports, std::cout);
      std::ofstream table(std::filesystem::path(in_dir) / "summary.csv", std::ios::binary);
      write_summary_table_csv(reports, table);
    }
  } catch (const Infeasible &e) {
    std::cerr << "infeasible (binding slot " << e.binding_slot() << "): " << e.what() << '\n';
    return 3;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
