// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Tolerances and runtime budgets are fixed here and never tuned to results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "leoslice/constellation.hpp"
#include "leoslice/linkmodel.hpp"
#include "leoslice/predictor.hpp"
#include "leoslice/simkit.hpp"
#include "leoslice/slicer.hpp"
#include "oracle.hpp"

using namespace leoslice;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string &name, double budget_s,
               const std::function<void(Outcome &)> &body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception &e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= budget_s) {
    out.pass = false;
    out.detail << " [over runtime budget " << budget_s << " s]";
  }
  failures += out.pass ? 0 : 1;
  std::printf("%s %d %s:%s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.str().c_str(), elapsed);
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return 0.5 * (v[n / 2] + v[(n - 1) / 2]);
}

// ------------------------------------------------------------- 1: geometry

double rad(double d) { return d * kPi / 180.0; }

Vec3 along_north(const GroundArea &area, double radius_km, double central) {
  const double lat = rad(area.center_lat_deg()) + central;
  const double lon = rad(area.center_lon_deg());
  return {radius_km * std::cos(lat) * std::cos(lon), radius_km * std::cos(lat) * std::sin(lon),
          radius_km * std::sin(lat)};
}

void orbit_sanity(Outcome &o) {
  const ConstellationConfig c;
  const double re = 6371.0;
  const double kepler = 2.0 * kPi * std::sqrt(std::pow(re + 550.0, 3) / 398600.4418);
  const double period = c.orbital_period_s();
  o.detail << " period " << period << " s (Kepler " << kepler << ")";
  o.require(std::abs(period - 5731.0) <= 1.0, "period 5731 +- 1 s");
  o.require(std::abs(period - kepler) < 1e-6, "period equals Kepler oracle");

  const GroundArea area;
  const double nadir = elevation_and_range(along_north(area, re + 550.0, 0.0), area, re).slant_range_km;
  o.detail << ", nadir " << nadir << " km";
  o.require(std::abs(nadir - 550.0) < 1e-6, "nadir range 550 km");

  // Bisect the central angle for 30 degrees elevation, then compare the range
  // with the law-of-cosines oracle.
  double lo = 0.0;
  double hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (elevation_and_range(along_north(area, re + 550.0, mid), area, re).elevation_deg > 30.0 ? lo
                                                                                            : hi) =
        mid;
  }
  const LookAngle la = elevation_and_range(along_north(area, re + 550.0, lo), area, re);
  const double ratio = (re + 550.0) / re;
  const double e = rad(30.0);
  const double oracle = re * (std::sqrt(ratio * ratio - std::cos(e) * std::cos(e)) - std::sin(e));
  o.detail << ", 30 deg range " << la.slant_range_km << " km (oracle " << oracle << ")";
  o.require(std::abs(la.slant_range_km - 992.8) <= 0.5, "30 deg range 992.8 +- 0.5 km");
  o.require(std::abs(la.slant_range_km - oracle) <= 0.5, "30 deg range matches oracle");
}

// ------------------------------------------------------ 2: effective bandwidth

template <class Draw>
double mc_effective_bandwidth(Draw draw, double theta, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  long double acc = 0.0L;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(static_cast<long double>(theta) * draw(rng));
  }
  return static_cast<double>(std::log(acc / n) / theta);
}

void effective_bandwidth_oracles(Outcome &o) {
  const int n = 1000000;
  double worst = 0.0;
  for (double theta : {0.05, 0.1, 0.2}) {
    for (double lambda : {20.0, 100.0}) {
      std::poisson_distribution<int> pois(lambda);
      const double closed = effective_bandwidth(PoissonDemand{lambda}, theta);
      const double mc = mc_effective_bandwidth([&](auto &r) { return pois(r); }, theta, n, 1);
      worst = std::max(worst, std::abs(mc - closed) / closed);
    }
    for (auto [mu, var] : {std::pair{100.0, 400.0}, std::pair{30.0, 25.0}}) {
      // e^{theta l} is lognormal with relative variance e^{(theta sigma)^2} - 1;
      // past theta sigma = 2 a 1e6-draw average cannot resolve 1%.
      if (theta * std::sqrt(var) > 2.0) {
        continue;
      }
      std::normal_distribution<double> g(mu, std::sqrt(var));
      const double closed = effective_bandwidth(GaussianDemand{mu, var}, theta);
      const double mc = mc_effective_bandwidth([&](auto &r) { return g(r); }, theta, n, 2);
      worst = std::max(worst, std::abs(mc - closed) / closed);
    }
  }
  o.detail << " worst MC relative gap " << worst;
  o.require(worst < 0.01, "closed forms within 1% of Monte Carlo");

  double limit = 0.0;
  limit = std::max(limit, std::abs(effective_bandwidth(PoissonDemand{100.0}, 1e-8) - 100.0) / 100.0);
  limit = std::max(limit,
                   std::abs(effective_bandwidth(GaussianDemand{50.0, 9.0}, 1e-8) - 50.0) / 50.0);
  o.detail << ", small-theta gap " << limit;
  o.require(limit < 1e-5, "theta -> 0 limit equals the mean");
}

// --------------------------------------------------- 3: solver vs grid oracle

void solver_oracle(Outcome &o) {
  std::mt19937_64 rng(2024);
  double worst_ratio = 0.0;
  int violations = 0;
  for (int i = 0; i < 50; ++i) {
    const int sats = 1 + i % 3;
    const int slots = 1 + (i / 3) % 4;
    const double gamma = i % 2 == 0 ? 0.9 : 0.99;
    const SliceProblem p = oracle::random_instance(rng, sats, slots, gamma);
    const SlicingDecision d = solve_window(p);
    const oracle::GridResult g = oracle::grid_search(p);
    worst_ratio = std::max(worst_ratio, d.objective / g.objective);
    for (int t = 0; t < slots; ++t) {
      double cap = 0.0;
      for (int s = 0; s < sats; ++s) {
        if (p.visible[t][s]) {
          cap += d.candidate[s] * oracle::full_rate_of(p.link, p.distance_km[t][s]);
        }
      }
      const double thr = oracle::threshold(p.demand[t], p.link.qos_exponent, gamma);
      violations += cap >= thr ? 0 : 1;
    }
    for (int s = 0; s < sats; ++s) {
      const bool box = d.candidate[s] >= 0.0 && d.candidate[s] <= d.active[s] &&
                       (d.active[s] == 0 || d.active[s] == 1);
      violations += box ? 0 : 1;
    }
  }
  o.detail << " worst objective / grid " << worst_ratio << ", constraint violations "
           << violations;
  o.require(worst_ratio <= 1.01, "objective <= grid oracle x 1.01");
  o.require(violations == 0, "thresholds and 0 <= b <= r hold");
}

// --------------------------------------------------- 4: chance certificate

void chance_certificate(Outcome &o) {
  std::mt19937_64 rng(77);
  std::mt19937_64 draws(78);
  for (double gamma : {0.9, 0.99}) {
    double worst = 1.0;
    for (int i = 0; i < 20; ++i) {
      const SliceProblem p = oracle::random_instance(rng, 3, 4, gamma);
      const SlicingDecision d = solve_window(p);
      const auto cap = served_capacity(p, d.candidate);
      for (int t = 0; t < p.slot_count(); ++t) {
        const auto &dist = std::get<FittedDemandDistribution>(p.demand[t]);
        worst = std::min(worst,
                         oracle::satisfaction_rate(dist, p.link.qos_exponent, cap[t], 100000, draws));
      }
    }
    o.detail << " gamma " << gamma << " worst slot " << worst << ";";
    o.require(worst >= gamma - 0.01, "satisfaction >= gamma - 0.01");
  }
}

// --------------------------------------------------------- 5: BNN correctness

BnnModel random_model(int history, int hidden, std::uint64_t seed) {
  BnnModel m(history, hidden, 0.7, -2.0, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int i = 0; i < m.weight_count(); ++i) {
    m.mean()[i] = n(rng);
    m.log_std()[i] = -1.5 + 0.3 * n(rng);
  }
  m.log_noise() = Eigen::Vector2d(-0.3, 0.2);
  return m;
}

void bnn_correctness(Outcome &o) {
  // Gradient against central differences on a 2-unit network.
  const BnnModel m = random_model(3, 2, 11);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 1.0);
  TrainingSet batch;
  for (int p = 0; p < 4; ++p) {
    TrainingPair pair;
    for (int k = 0; k < 3; ++k) {
      pair.inputs.emplace_back(z(rng), z(rng));
    }
    pair.label = Eigen::Vector2d(z(rng), z(rng));
    batch.pairs.push_back(pair);
  }
  const LossAndGradient g = elbo_loss(m, batch, 3, 1.0, 99);
  const double h = 1e-5;
  auto loss_at = [&](const BnnModel &x) { return elbo_loss(x, batch, 3, 1.0, 99).loss; };
  double err2 = 0.0;
  double ref2 = 0.0;
  auto add = [&](double analytic, BnnModel up, BnnModel down) {
    const double numeric = (loss_at(up) - loss_at(down)) / (2.0 * h);
    err2 += (analytic - numeric) * (analytic - numeric);
    ref2 += numeric * numeric;
  };
  for (int i = 0; i < m.weight_count(); ++i) {
    BnnModel up = m, down = m;
    up.mean()[i] += h;
    down.mean()[i] -= h;
    add(g.grad_mean[i], up, down);
    up = m;
    down = m;
    up.log_std()[i] += h;
    down.log_std()[i] -= h;
    add(g.grad_log_std[i], up, down);
  }
  for (int k = 0; k < 2; ++k) {
    BnnModel up = m, down = m;
    up.log_noise()[k] += h;
    down.log_noise()[k] -= h;
    add(g.grad_log_noise[k], up, down);
  }
  const double rel = std::sqrt(err2 / ref2);
  o.detail << " gradient relative error " << rel;
  o.require(rel < 1e-4, "gradient within 1e-4 of finite differences");

  // Closed-form KL against a Monte-Carlo estimate of E_q[log q - log p].
  BnnModel k(1, 1, 1.0, -1.0, 9);
  std::uniform_real_distribution<double> um(-1.0, 1.0);
  std::uniform_real_distribution<double> us(0.2, 1.5);
  for (int i = 0; i < k.weight_count(); ++i) {
    k.mean()[i] = um(rng);
    k.log_std()[i] = std::log(us(rng));
  }
  const double sp = k.prior_std();
  long double acc = 0.0L;
  const int n = 1000000;
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < k.weight_count(); ++i) {
      const double sd = std::exp(k.log_std()[i]);
      const double e = z(rng);
      const double w = k.mean()[i] + sd * e;
      acc += -std::log(sd) - 0.5 * e * e + std::log(sp) + 0.5 * w * w / (sp * sp);
    }
  }
  const double kl_gap = std::abs(static_cast<double>(acc / n) - k.kl_divergence()) / k.kl_divergence();
  o.detail << ", KL relative gap " << kl_gap;
  o.require(kl_gap < 0.01, "KL within 1% of Monte Carlo");

  // Zero weight std: predictive spread is exactly zero.
  const BnnModel c = random_model(4, 3, 21).collapsed();
  std::vector<DemandFeature> history;
  for (int i = 0; i < 4; ++i) {
    history.push_back({50.0 + i, 48.0 - i});
  }
  const PredictedFeature pf = predict(c, history, 30, 5);
  o.detail << ", collapsed spread " << pf.mean_std << "/" << pf.variance_std;
  o.require(pf.mean_std == 0.0 && pf.variance_std == 0.0, "collapsed model has zero spread");
}

// --------------------------------------------------- 6: predictive calibration

void calibration(Outcome &o) {
  const BnnConfig cfg;
  const double lambda = 300.0;
  const int held_out = 200;
  const int k = cfg.history_length;
  RegimeSpec spec;
  spec.duration_s = 10 * (cfg.training_slots + k + held_out);
  spec.segments.push_back({0, RegimeKind::Poisson, lambda, lambda, 0.0, 0.0});
  const auto features = slot_features(generate(spec, 5), 10);
  const std::span<const DemandFeature> all(features);
  const auto trained = train_on_features(all.subspan(0, cfg.training_slots), cfg, 7);
  const double z90 = 1.6448536269514722;
  int covered = 0;
  for (int i = 0; i < held_out; ++i) {
    const int g = cfg.training_slots + k + i;
    const PredictedFeature pf = predict(trained.model, all.subspan(g - k, k), cfg.mc_samples,
                                        derive_seed(1000, static_cast<std::uint64_t>(i)));
    covered += std::abs(features[g].mean - pf.mean_feature.mean) <= z90 * pf.mean_std ? 1 : 0;
  }
  const double rate = static_cast<double>(covered) / held_out;
  o.detail << " 90% interval coverage " << rate << " over " << held_out << " held-out slots";
  o.require(rate >= 0.80, "coverage >= 0.80");
}

// ------------------------------------------------------- 7: end-to-end trends

void trends(Outcome &o) {
  const int seeds = 10;
  std::map<std::string, std::vector<double>> violation, resource, repred;
  std::map<double, std::vector<double>> adtrs_by_angle;
  const std::vector<double> angles = {10.0, 20.0, 30.0, 40.0};
  struct Run {
    Scheme scheme;
    double gamma;
  };
  const std::vector<Run> runs = {{Scheme::FRS, 0.9},   {Scheme::FDTRS, 0.9},
                                 {Scheme::ADTRS, 0.9}, {Scheme::FDTRS, 0.99},
                                 {Scheme::ADTRS, 0.99}, {Scheme::PerfectRS, 0.9}};
  for (int s = 0; s < seeds; ++s) {
    ScenarioConfig c;
    c.seeds = {100u + s, 200u + s, 300u + s};
    const SimulationInputs inputs = prepare_inputs(c);
    for (const Run &r : runs) {
      c.scheme = r.scheme;
      c.satisfaction = r.gamma;
      const RunReport rep = run(c, inputs);
      violation[c.label()].push_back(rep.violation_rate);
      resource[c.label()].push_back(rep.avg_resource_hz);
      repred[c.label()].push_back(rep.repredictions);
    }
    ScenarioConfig a = c;
    a.scheme = Scheme::ADTRS;
    a.satisfaction = 0.9;
    for (double angle : angles) {
      a.area.min_elevation_deg = angle;
      adtrs_by_angle[angle].push_back(run(a, with_geometry(inputs, a)).avg_resource_hz);
    }
  }
  auto v = [&](const std::string &l) { return median(violation[l]); };
  auto n = [&](const std::string &l) { return median(repred[l]); };

  o.detail << " median violation FRS " << v("FRS") << ", FDTRS 0.9 " << v("FDTRS 0.9")
           << ", ADTRS 0.9 " << v("ADTRS 0.9") << ", ADTRS 0.99 " << v("ADTRS 0.99")
           << ", PerfectRS " << v("PerfectRS") << ";";
  o.require(v("FRS") > v("FDTRS 0.9") && v("FDTRS 0.9") > v("ADTRS 0.9") &&
                v("ADTRS 0.99") <= v("ADTRS 0.9"),
            "(a) violation ordering");
  double perfect_max = 0.0;
  for (double x : violation["PerfectRS"]) {
    perfect_max = std::max(perfect_max, x);
  }
  o.require(v("PerfectRS") == 0.0 && perfect_max == 0.0, "(b) PerfectRS violation exactly 0");

  o.detail << " median repredictions FRS " << n("FRS") << ", FDTRS 0.9 " << n("FDTRS 0.9")
           << ", FDTRS 0.99 " << n("FDTRS 0.99") << ", ADTRS 0.9 " << n("ADTRS 0.9")
           << ", ADTRS 0.99 " << n("ADTRS 0.99") << ";";
  o.require(n("FRS") == 0.0 && n("FDTRS 0.9") == 0.0 && n("FDTRS 0.99") == 0.0 &&
                n("ADTRS 0.9") > 0.0 && n("ADTRS 0.99") > 0.0,
            "(c) re-prediction counts");

  o.detail << " median ADTRS 0.9 resource (MHz) by elevation";
  bool nondecreasing = true;
  double previous = -1.0;
  for (double angle : angles) {
    const double r = median(adtrs_by_angle[angle]);
    o.detail << " " << angle << ":" << r / 1e6;
    nondecreasing = nondecreasing && r >= previous;
    previous = r;
  }
  o.require(nondecreasing, "(d) ADTRS resource nondecreasing over elevation");
}

// ------------------------------------------------------------ 8: determinism

std::string serialize(const RunReport &r) {
  std::ostringstream out;
  write_summary_json(r, out);
  write_slots_csv(r, out);
  write_events_csv(r, out);
  return out.str();
}

void determinism(Outcome &o) {
  int compared = 0;
  int identical = 0;
  for (Scheme s : {Scheme::FRS, Scheme::FDTRS, Scheme::ADTRS, Scheme::PerfectRS}) {
    ScenarioConfig c;
    c.scheme = s;
    c.seeds = {41, 42, 43};
    const std::string a = serialize(run(c));
    const std::string b = serialize(run(c));
    ++compared;
    identical += a == b ? 1 : 0;
  }
  o.detail << " " << identical << "/" << compared << " scheme reports byte-identical";
  o.require(identical == compared, "repeated runs byte-identical");
}

}  // namespace

int main() {
  criterion(1, "orbit sanity", 1.0, orbit_sanity);
  criterion(2, "effective bandwidth vs Monte Carlo", 30.0, effective_bandwidth_oracles);
  criterion(3, "solver vs grid oracle", 300.0, solver_oracle);
  criterion(4, "chance-constraint certificate", 120.0, chance_certificate);
  criterion(5, "BNN correctness", 120.0, bnn_correctness);
  criterion(6, "predictive calibration", 600.0, calibration);
  criterion(7, "end-to-end trends", 1800.0, trends);
  criterion(8, "determinism", 1800.0, determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
