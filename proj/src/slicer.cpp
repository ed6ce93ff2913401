#include "leoslice/slicer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <numeric>

#include <omp.h>

#include "leoslice/normal.hpp"

namespace leoslice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Mask = std::vector<unsigned char>;

double tie_tolerance(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

// Problem data with rates and delay constants resolved per (slot, satellite).
struct Prepared {
  const SliceProblem *problem = nullptr;
  int slots = 0;
  int sats = 0;
  std::vector<double> threshold;              // per slot
  std::vector<std::vector<double>> rate;      // [slot][sat] full-reservation rate, 0 if hidden
  std::vector<std::vector<double>> queue_k;   // [slot][sat] -ln(eps)/(theta*R_full)
  std::vector<std::vector<double>> prop;      // [slot][sat] d/c
  std::vector<double> locked_value;           // -1 when unlocked
  std::vector<int> free;                      // unlocked satellites visible at least once
  std::vector<double> locked_capacity;        // per slot
  std::vector<double> locked_delay;           // per slot, 0 when no locked server
  std::vector<double> cost;                   // per satellite: beta1 * B * visible slots
};

Prepared prepare(const SliceProblem &p) {
  Prepared pr;
  pr.problem = &p;
  pr.slots = p.slot_count();
  pr.sats = p.satellite_count();
  pr.threshold = problem_thresholds(p);
  const double q = -std::log(p.link.delay_violation_target) / p.link.qos_exponent;
  pr.rate.assign(pr.slots, std::vector<double>(pr.sats, 0.0));
  pr.queue_k.assign(pr.slots, std::vector<double>(pr.sats, kInf));
  pr.prop.assign(pr.slots, std::vector<double>(pr.sats, 0.0));
  pr.locked_value.assign(pr.sats, -1.0);
  pr.locked_capacity.assign(pr.slots, 0.0);
  pr.locked_delay.assign(pr.slots, 0.0);
  pr.cost.assign(pr.sats, 0.0);
  for (int t = 0; t < pr.slots; ++t) {
    for (int s = 0; s < pr.sats; ++s) {
      if (p.visible[t][s]) {
        pr.rate[t][s] = full_rate(p.link, p.distance_km[t][s]);
        pr.queue_k[t][s] = q / pr.rate[t][s];
        pr.prop[t][s] = p.distance_km[t][s] / p.link.light_speed_km_s;
        pr.cost[s] += p.beta_resource * p.link.bandwidth_hz;
      }
    }
  }
  for (int s = 0; s < pr.sats; ++s) {
    bool seen = false;
    for (int t = 0; t < pr.slots; ++t) {
      seen = seen || p.visible[t][s] != 0;
    }
    if (p.locked[s].has_value()) {
      const double b = *p.locked[s];
      pr.locked_value[s] = b;
      for (int t = 0; t < pr.slots; ++t) {
        if (p.visible[t][s] && b > 0.0) {
          pr.locked_capacity[t] += b * pr.rate[t][s];
          pr.locked_delay[t] =
              std::max(pr.locked_delay[t], pr.queue_k[t][s] / b + pr.prop[t][s]);
        }
      }
    } else if (seen) {
      pr.free.push_back(s);
    }
  }
  return pr;
}

bool mask_feasible(const Prepared &pr, const Mask &mask, int *binding = nullptr) {
  for (int t = 0; t < pr.slots; ++t) {
    double cap = pr.locked_capacity[t];
    for (std::size_t j = 0; j < pr.free.size(); ++j) {
      if (mask[j]) {
        cap += pr.rate[t][pr.free[j]];
      }
    }
    if (cap < pr.threshold[t]) {
      if (binding != nullptr) {
        *binding = t;
      }
      return false;
    }
  }
  return true;
}

// Relaxation of the mask's continuous problem slot by slot. The objective
// splits into per-slot terms sum_s beta1*B*b_s + beta2*max_s(k_s/b_s + p_s);
// each is bounded below with b free per slot, once ignoring capacity (all
// active delays equal D) and once ignoring the delay trade-off.
double lower_bound(const Prepared &pr, const Mask &mask) {
  const SliceProblem &p = *pr.problem;
  const double unit = p.beta_resource * p.link.bandwidth_hz;
  double total = 0.0;
  for (int s = 0; s < pr.sats; ++s) {
    if (pr.locked_value[s] > 0.0) {
      total += pr.cost[s] * pr.locked_value[s];
    }
  }
  for (int t = 0; t < pr.slots; ++t) {
    double sum_k = 0.0;
    double max_k = 0.0;
    double min_p = kInf;
    double best_rate = 0.0;
    for (std::size_t j = 0; j < pr.free.size(); ++j) {
      const int s = pr.free[j];
      if (mask[j] && p.visible[t][s]) {
        sum_k += pr.queue_k[t][s];
        max_k = std::max(max_k, pr.queue_k[t][s]);
        min_p = std::min(min_p, pr.prop[t][s]);
        best_rate = std::max(best_rate, pr.rate[t][s]);
      }
    }
    const double locked = pr.locked_delay[t];
    if (best_rate == 0.0) {
      total += p.beta_delay * locked;
      continue;
    }
    double d = max_k;
    if (p.beta_delay > 0.0) {
      d = std::max({max_k, std::sqrt(unit * sum_k / p.beta_delay), locked - min_p});
    }
    const double relaxed = unit * sum_k / d + p.beta_delay * std::max(locked, d + min_p);
    const double need = std::max(0.0, pr.threshold[t] - pr.locked_capacity[t]);
    const double capacity =
        unit * need / best_rate + p.beta_delay * std::max(locked, max_k + min_p);
    total += std::max(relaxed, capacity);
  }
  return total;
}

struct Evaluated {
  bool feasible = false;
  double objective = kInf;
  std::vector<double> candidate;  // per satellite
  std::vector<int> active;
};

// Log-barrier Newton solve of the continuous problem for one activation set.
// Variables are b_j for active free satellites and an epigraph variable u_t
// for every slot an active satellite serves.
class BarrierSubproblem {
 public:
  BarrierSubproblem(const Prepared &pr, const Mask &mask, double tolerance)
      : pr_(pr), p_(*pr.problem), tolerance_(tolerance) {
    for (std::size_t j = 0; j < pr.free.size(); ++j) {
      if (mask[j]) {
        act_.push_back(pr.free[j]);
      }
    }
    n_ = static_cast<int>(act_.size());
    slot_var_.assign(pr.slots, -1);
    for (int t = 0; t < pr.slots; ++t) {
      bool served = false;
      for (int s : act_) {
        served = served || p_.visible[t][s] != 0;
      }
      if (!served) {
        continue;
      }
      if (p_.beta_delay > 0.0) {
        slot_var_[t] = n_ + static_cast<int>(delay_slots_.size());
        delay_slots_.push_back(t);
      }
      if (pr.threshold[t] - pr.locked_capacity[t] > 0.0) {
        cap_slots_.push_back(t);
      }
    }
    dim_ = n_ + static_cast<int>(delay_slots_.size());
    constraint_count_ = 2 * n_ + static_cast<int>(cap_slots_.size());
    for (int t : delay_slots_) {
      for (int s : act_) {
        constraint_count_ += p_.visible[t][s] ? 1 : 0;
      }
      constraint_count_ += pr.locked_delay[t] > 0.0 ? 1 : 0;
    }
  }

  Evaluated solve() {
    Evaluated out;
    out.candidate.assign(pr_.sats, 0.0);
    out.active.assign(pr_.sats, 0);
    for (int s = 0; s < pr_.sats; ++s) {
      if (pr_.locked_value[s] >= 0.0) {
        out.candidate[s] = pr_.locked_value[s];
        out.active[s] = pr_.locked_value[s] > 0.0 ? 1 : 0;
      }
    }
    for (int s : act_) {
      out.active[s] = 1;
    }
    if (n_ > 0) {
      Eigen::VectorXd x;
      if (!start_point(x)) {
        // only the all-ones corner is feasible
        for (int s : act_) {
          out.candidate[s] = 1.0;
        }
      } else {
        run(x);
        for (int j = 0; j < n_; ++j) {
          out.candidate[act_[j]] = std::clamp(x[j], 0.0, 1.0);
        }
      }
    }
    out.feasible = true;
    out.objective = window_objective(p_, out.candidate, out.active);
    return out;
  }

 private:
  double cap_slack(const Eigen::VectorXd &x, int t) const {
    double cap = pr_.locked_capacity[t] - pr_.threshold[t];
    for (int j = 0; j < n_; ++j) {
      cap += pr_.rate[t][act_[j]] * x[j];
    }
    return cap;
  }

  bool start_point(Eigen::VectorXd &x) const {
    x = Eigen::VectorXd::Zero(dim_);
    for (double delta : {1e-2, 1e-4, 1e-6, 1e-9}) {
      for (int j = 0; j < n_; ++j) {
        x[j] = 1.0 - delta;
      }
      bool ok = true;
      for (int t : cap_slots_) {
        ok = ok && cap_slack(x, t) > 0.0;
      }
      if (ok) {
        for (std::size_t k = 0; k < delay_slots_.size(); ++k) {
          const int t = delay_slots_[k];
          double u = pr_.locked_delay[t];
          for (int j = 0; j < n_; ++j) {
            const int s = act_[j];
            if (p_.visible[t][s]) {
              u = std::max(u, pr_.queue_k[t][s] / x[j] + pr_.prop[t][s]);
            }
          }
          x[n_ + static_cast<int>(k)] = u + 1.0;
        }
        return true;
      }
    }
    return false;
  }

  double linear_objective(const Eigen::VectorXd &x) const {
    double f = 0.0;
    for (int j = 0; j < n_; ++j) {
      f += pr_.cost[act_[j]] * x[j];
    }
    for (int k = n_; k < dim_; ++k) {
      f += p_.beta_delay * x[k];
    }
    return f;
  }

  // Barrier value; +inf outside the strict interior.
  double barrier(const Eigen::VectorXd &x) const {
    double phi = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (!(x[j] > 0.0 && x[j] < 1.0)) {
        return kInf;
      }
      phi -= std::log(x[j]) + std::log(1.0 - x[j]);
    }
    for (int t : cap_slots_) {
      const double g = cap_slack(x, t);
      if (!(g > 0.0)) {
        return kInf;
      }
      phi -= std::log(g);
    }
    for (int t : delay_slots_) {
      const double u = x[slot_var_[t]];
      for (int j = 0; j < n_; ++j) {
        const int s = act_[j];
        if (p_.visible[t][s]) {
          const double g = u - pr_.prop[t][s] - pr_.queue_k[t][s] / x[j];
          if (!(g > 0.0)) {
            return kInf;
          }
          phi -= std::log(g);
        }
      }
      if (pr_.locked_delay[t] > 0.0) {
        const double g = u - pr_.locked_delay[t];
        if (!(g > 0.0)) {
          return kInf;
        }
        phi -= std::log(g);
      }
    }
    return phi;
  }

  void derivatives(const Eigen::VectorXd &x, double weight, Eigen::VectorXd &grad,
                   Eigen::MatrixXd &hess) const {
    grad = Eigen::VectorXd::Zero(dim_);
    hess = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int j = 0; j < n_; ++j) {
      grad[j] += weight * pr_.cost[act_[j]] - 1.0 / x[j] + 1.0 / (1.0 - x[j]);
      hess(j, j) += 1.0 / (x[j] * x[j]) + 1.0 / ((1.0 - x[j]) * (1.0 - x[j]));
    }
    for (int k = n_; k < dim_; ++k) {
      grad[k] += weight * p_.beta_delay;
    }
    Eigen::VectorXd row(n_);
    for (int t : cap_slots_) {
      const double g = cap_slack(x, t);
      for (int j = 0; j < n_; ++j) {
        row[j] = pr_.rate[t][act_[j]];
      }
      grad.head(n_) -= row / g;
      hess.topLeftCorner(n_, n_) += row * row.transpose() / (g * g);
    }
    for (int t : delay_slots_) {
      const int ui = slot_var_[t];
      const double u = x[ui];
      for (int j = 0; j < n_; ++j) {
        const int s = act_[j];
        if (!p_.visible[t][s]) {
          continue;
        }
        const double k = pr_.queue_k[t][s];
        const double b = x[j];
        const double g = u - pr_.prop[t][s] - k / b;
        const double db = k / (b * b);
        grad[ui] -= 1.0 / g;
        grad[j] -= db / g;
        const double inv_g2 = 1.0 / (g * g);
        hess(ui, ui) += inv_g2;
        hess(ui, j) += db * inv_g2;
        hess(j, ui) += db * inv_g2;
        hess(j, j) += db * db * inv_g2 + 2.0 * k / (b * b * b * g);
      }
      if (pr_.locked_delay[t] > 0.0) {
        const double g = u - pr_.locked_delay[t];
        grad[ui] -= 1.0 / g;
        hess(ui, ui) += 1.0 / (g * g);
      }
    }
  }

  void run(Eigen::VectorXd &x) const {
    const double scale = std::max(linear_objective(x), 1e-12);
    double weight = 1.0 / scale;  // barrier parameter t over the objective scale
    const double m = static_cast<double>(constraint_count_);
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (int outer = 0; outer < 80; ++outer) {
      for (int it = 0; it < 200; ++it) {
        derivatives(x, weight, grad, hess);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        const Eigen::VectorXd step = ldlt.solve(-grad);
        if (!step.allFinite()) {
          throw NumericalFailure("solve_window: Newton step is not finite");
        }
        const double decrement = -grad.dot(step);
        if (decrement < 1e-12) {
          break;
        }
        const double f0 = weight * linear_objective(x) + barrier(x);
        double s = 1.0;
        Eigen::VectorXd trial = x + step;
        double f1 = weight * linear_objective(trial) + barrier(trial);
        int halvings = 0;
        while (!(f1 <= f0 - 0.25 * s * decrement) && halvings < 80) {
          s *= 0.5;
          trial = x + s * step;
          f1 = weight * linear_objective(trial) + barrier(trial);
          ++halvings;
        }
        if (halvings == 80) {
          break;
        }
        x = trial;
      }
      if (m / weight < tolerance_ * scale) {
        return;
      }
      weight *= 20.0;
    }
    throw NumericalFailure("solve_window: barrier method did not reach tolerance");
  }

  const Prepared &pr_;
  const SliceProblem &p_;
  double tolerance_;
  std::vector<int> act_;
  std::vector<int> delay_slots_;
  std::vector<int> cap_slots_;
  std::vector<int> slot_var_;
  int n_ = 0;
  int dim_ = 0;
  int constraint_count_ = 0;
};

Evaluated evaluate_mask(const Prepared &pr, const Mask &mask, double tolerance) {
  if (!mask_feasible(pr, mask)) {
    return {};
  }
  return BarrierSubproblem(pr, mask, tolerance).solve();
}

int active_count(const Mask &m) { return std::accumulate(m.begin(), m.end(), 0); }

// Strictly better objective, else fewer active satellites, else the
// lexicographically smaller list of active satellite ids.
bool better(const Evaluated &a, const Mask &ma, const Evaluated &b, const Mask &mb) {
  if (!b.feasible) {
    return a.feasible;
  }
  if (!a.feasible) {
    return false;
  }
  const double tol = tie_tolerance(std::min(a.objective, b.objective));
  if (a.objective < b.objective - tol) {
    return true;
  }
  if (b.objective < a.objective - tol) {
    return false;
  }
  const int ca = active_count(ma);
  const int cb = active_count(mb);
  if (ca != cb) {
    return ca < cb;
  }
  for (std::size_t j = 0; j < ma.size(); ++j) {
    if (ma[j] != mb[j]) {
      return ma[j] > mb[j];
    }
  }
  return false;
}

struct Incumbent {
  Evaluated result;
  Mask mask;
};

// Evaluates `masks` in order, `batch` at a time in parallel, skipping masks
// whose bound cannot reach the incumbent. The reduction follows list order so
// the outcome does not depend on the batch size.
void evaluate_in_order(const Prepared &pr, const std::vector<Mask> &masks,
                       const std::vector<double> &bounds, double tolerance, int batch,
                       Incumbent &best) {
  std::vector<Evaluated> results;
  for (std::size_t start = 0; start < masks.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(masks.size(), start + static_cast<std::size_t>(batch));
    const double cutoff =
        best.result.feasible ? best.result.objective + tie_tolerance(best.result.objective) : kInf;
    if (bounds[start] > cutoff) {
      break;  // bounds are sorted
    }
    results.assign(end - start, Evaluated{});
    std::vector<std::string> failures(end - start);
#pragma omp parallel for schedule(dynamic) if (batch > 1)
    for (std::size_t i = start; i < end; ++i) {
      if (bounds[i] > cutoff) {
        continue;
      }
      try {
        results[i - start] = evaluate_mask(pr, masks[i], tolerance);
      } catch (const NumericalFailure &e) {
        failures[i - start] = e.what();
      }
    }
    for (std::size_t i = start; i < end; ++i) {
      if (!failures[i - start].empty()) {
        throw NumericalFailure(failures[i - start]);
      }
      const double live_cutoff =
          best.result.feasible ? best.result.objective + tie_tolerance(best.result.objective)
                               : kInf;
      if (bounds[i] > live_cutoff || !results[i - start].feasible) {
        continue;
      }
      if (better(results[i - start], masks[i], best.result, best.mask)) {
        best.result = std::move(results[i - start]);
        best.mask = masks[i];
      }
    }
  }
}

// Sorts feasible masks by (bound, size, bits) and evaluates them in that order.
void search_masks(const Prepared &pr, std::vector<Mask> candidates, double tolerance, int batch,
                  Incumbent &best) {
  struct Entry {
    double bound;
    int count;
    Mask mask;
  };
  std::vector<Entry> entries;
  entries.reserve(candidates.size());
  for (auto &m : candidates) {
    if (mask_feasible(pr, m)) {
      const double b = lower_bound(pr, m);
      const int c = active_count(m);
      entries.push_back({b, c, std::move(m)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.count != b.count) return a.count < b.count;
    return a.mask > b.mask;
  });
  std::vector<Mask> masks;
  std::vector<double> bounds;
  for (auto &e : entries) {
    bounds.push_back(e.bound);
    masks.push_back(std::move(e.mask));
  }
  evaluate_in_order(pr, masks, bounds, tolerance, batch, best);
}

Incumbent exact_search(const Prepared &pr, double tolerance, int batch) {
  const int n = static_cast<int>(pr.free.size());
  std::vector<Mask> all;
  all.reserve(std::size_t{1} << n);
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    Mask m(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
      m[j] = (bits >> j) & 1u;
    }
    all.push_back(std::move(m));
  }
  Incumbent best;
  search_masks(pr, std::move(all), tolerance, batch, best);
  return best;
}

Mask greedy_seed(const Prepared &pr) {
  const SliceProblem &p = *pr.problem;
  Mask m(pr.free.size(), 0);
  while (!mask_feasible(pr, m)) {
    int pick = -1;
    double best_gain = -1.0;
    for (std::size_t j = 0; j < pr.free.size(); ++j) {
      if (m[j]) continue;
      double gain = 0.0;
      for (int t = 0; t < pr.slots; ++t) {
        double cap = pr.locked_capacity[t];
        for (std::size_t k = 0; k < pr.free.size(); ++k) {
          if (m[k]) cap += pr.rate[t][pr.free[k]];
        }
        const double deficit = std::max(0.0, pr.threshold[t] - cap);
        if (p.visible[t][pr.free[j]]) {
          gain += std::min(deficit, pr.rate[t][pr.free[j]]);
        }
      }
      gain /= std::max(pr.cost[pr.free[j]], 1e-300);
      if (gain > best_gain) {
        best_gain = gain;
        pick = static_cast<int>(j);
      }
    }
    if (pick < 0) break;
    m[static_cast<std::size_t>(pick)] = 1;
  }
  return m;
}

// Above the exact limit: every set of at most two satellites, the greedy and
// all-on sets, then flip and swap moves from the incumbent until none helps.
Incumbent local_search(const Prepared &pr, double tolerance, int batch) {
  const std::size_t n = pr.free.size();
  std::set<Mask> seen;
  auto fresh = [&](std::vector<Mask> &out, Mask m) {
    if (seen.insert(m).second) out.push_back(std::move(m));
  };
  std::vector<Mask> start;
  fresh(start, Mask(n, 0));
  fresh(start, Mask(n, 1));
  fresh(start, greedy_seed(pr));
  for (std::size_t i = 0; i < n; ++i) {
    Mask m(n, 0);
    m[i] = 1;
    fresh(start, m);
    for (std::size_t j = i + 1; j < n; ++j) {
      Mask pair = m;
      pair[j] = 1;
      fresh(start, pair);
    }
  }
  Incumbent best;
  search_masks(pr, std::move(start), tolerance, batch, best);
  for (;;) {
    const Mask current = best.mask;
    std::vector<Mask> moves;
    for (std::size_t i = 0; i < n; ++i) {
      Mask m = current;
      m[i] ^= 1;
      fresh(moves, m);
      if (!current[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (current[j]) continue;
        Mask swap = current;
        swap[i] = 0;
        swap[j] = 1;
        fresh(moves, swap);
      }
    }
    search_masks(pr, std::move(moves), tolerance, batch, best);
    if (best.mask == current) break;
  }
  return best;
}

SlicingDecision solve_impl(const SliceProblem &problem, const SolverOptions &options, int batch) {
  problem.validate();
  const Prepared pr = prepare(problem);
  const Mask all(pr.free.size(), 1);
  int binding = -1;
  if (!mask_feasible(pr, all, &binding)) {
    throw Infeasible("solve_window: demand exceeds total capacity in slot " +
                         std::to_string(problem.first_slot + binding),
                     problem.first_slot + binding);
  }
  const Incumbent best = static_cast<int>(pr.free.size()) <= options.exact_limit
                             ? exact_search(pr, options.tolerance, batch)
                             : local_search(pr, options.tolerance, batch);
  if (!best.result.feasible) {
    throw NumericalFailure("solve_window: no activation set produced a solution");
  }
  SlicingDecision d;
  d.satellites = problem.satellites;
  d.candidate = best.result.candidate;
  d.active = best.result.active;
  d.executed.assign(pr.sats, 0.0);
  d.locked.assign(pr.sats, 0);
  for (int s = 0; s < pr.sats; ++s) {
    if (pr.locked_value[s] >= 0.0) {
      d.locked[s] = 1;
      d.executed[s] = pr.locked_value[s];
    }
  }
  d.objective = best.result.objective;
  d.thresholds = pr.threshold;
  return d;
}

}  // namespace

double demand_threshold(const FittedDemandDistribution &dist, double qos_exponent,
                        double satisfaction) {
  if (satisfaction >= 1.0) {
    throw DegenerateQuantile("demand_threshold: gamma = 1 has an unbounded quantile");
  }
  if (!(satisfaction > 0.0)) {
    throw std::invalid_argument("demand_threshold: gamma must lie in (0, 1)");
  }
  if (!(qos_exponent > 0.0)) {
    throw std::invalid_argument("demand_threshold: qos exponent must be positive");
  }
  const double z = normal_quantile(satisfaction);
  double value = 0.0;
  if (const auto *p = std::get_if<PoissonFit>(&dist)) {
    value = (p->intensity + z * p->intensity_std) * std::expm1(qos_exponent) / qos_exponent;
  } else {
    const auto &g = std::get<GaussianFit>(dist);
    value = g.mean_of_mean + 0.5 * qos_exponent * g.mean_of_variance +
            z * std::sqrt(g.std_of_mean * g.std_of_mean +
                          0.25 * qos_exponent * qos_exponent * g.std_of_variance *
                              g.std_of_variance);
  }
  return std::max(0.0, value);
}

void SliceProblem::validate() const {
  const auto n_slot = visible.size();
  const auto n_sat = satellites.size();
  if (distance_km.size() != n_slot || demand.size() != n_slot) {
    throw std::invalid_argument("SliceProblem: slot rows disagree in length");
  }
  for (std::size_t t = 0; t < n_slot; ++t) {
    if (visible[t].size() != n_sat || distance_km[t].size() != n_sat) {
      throw std::invalid_argument("SliceProblem: satellite columns disagree in length");
    }
  }
  if (locked.size() != n_sat) {
    throw std::invalid_argument("SliceProblem: lock vector must cover every satellite");
  }
  for (const auto &l : locked) {
    if (l && (*l < 0.0 || *l > 1.0)) {
      throw std::invalid_argument("SliceProblem: locked values must lie in [0, 1]");
    }
  }
  if (!(satisfaction > 0.0 && satisfaction <= 1.0)) {
    throw std::invalid_argument("SliceProblem: gamma must lie in (0, 1]");
  }
  if (beta_resource < 0.0 || beta_delay < 0.0) {
    throw std::invalid_argument("SliceProblem: weights must be non-negative");
  }
  if (!(big_m > 0.0)) {
    throw std::invalid_argument("SliceProblem: big-M must be positive");
  }
  link.validate();
}

SliceProblem SliceProblem::from_schedule(const CoverageSchedule &schedule, int window, int first,
                                         std::vector<SlotDemand> demand, const LinkParams &link) {
  const int T = schedule.window_length;
  if (first < 0 || first > T || static_cast<int>(demand.size()) != T - first) {
    throw std::invalid_argument("SliceProblem::from_schedule: demand must cover slots [first, T)");
  }
  SliceProblem p;
  p.window = window;
  p.first_slot = first;
  p.satellites = schedule.serving_set(window);
  p.demand = std::move(demand);
  p.link = link;
  p.locked.assign(p.satellites.size(), std::nullopt);
  for (int t = first; t < T; ++t) {
    const int g = window * T + t;
    std::vector<unsigned char> vis;
    std::vector<double> dist;
    for (int s : p.satellites) {
      vis.push_back(schedule.is_visible(s, g) ? 1 : 0);
      dist.push_back(schedule.distance(s, g));
    }
    p.visible.push_back(std::move(vis));
    p.distance_km.push_back(std::move(dist));
  }
  return p;
}

int SlicingDecision::index_of(int sat_id) const {
  const auto it = std::lower_bound(satellites.begin(), satellites.end(), sat_id);
  if (it == satellites.end() || *it != sat_id) {
    return -1;
  }
  return static_cast<int>(it - satellites.begin());
}

std::vector<double> problem_thresholds(const SliceProblem &problem) {
  std::vector<double> out;
  out.reserve(problem.demand.size());
  for (const auto &d : problem.demand) {
    if (const auto *fixed = std::get_if<double>(&d)) {
      out.push_back(std::max(0.0, *fixed));
    } else {
      out.push_back(demand_threshold(std::get<FittedDemandDistribution>(d),
                                     problem.link.qos_exponent, problem.satisfaction));
    }
  }
  return out;
}

double big_m_delay(double candidate, int active, bool visible, double distance_km,
                   const LinkParams &link, double big_m) {
  const double on = static_cast<double>(active) * (visible ? 1.0 : 0.0);
  const double cap = effective_capacity(rate(visible, candidate, link, distance_km),
                                        link.qos_exponent);
  const double denom = link.qos_exponent * (cap + big_m * (1.0 - on));
  const double queue = denom > 0.0 ? -std::log(link.delay_violation_target) / denom : kInf;
  return queue + distance_km / link.light_speed_km_s * on;
}

double window_objective(const SliceProblem &problem, const std::vector<double> &candidate,
                        const std::vector<int> &active) {
  double total = 0.0;
  for (int t = 0; t < problem.slot_count(); ++t) {
    double resource = 0.0;
    double delay = 0.0;
    for (int s = 0; s < problem.satellite_count(); ++s) {
      const bool vis = problem.visible[t][s] != 0;
      if (vis) {
        resource += candidate[s] * problem.link.bandwidth_hz;
      }
      delay = std::max(delay, big_m_delay(candidate[s], active[s], vis, problem.distance_km[t][s],
                                          problem.link, problem.big_m));
    }
    total += problem.beta_resource * resource + problem.beta_delay * delay;
  }
  return total;
}

std::vector<double> served_capacity(const SliceProblem &problem,
                                    const std::vector<double> &candidate) {
  std::vector<double> out(static_cast<std::size_t>(problem.slot_count()), 0.0);
  for (int t = 0; t < problem.slot_count(); ++t) {
    for (int s = 0; s < problem.satellite_count(); ++s) {
      out[t] += effective_capacity(
          rate(problem.visible[t][s] != 0, candidate[s], problem.link, problem.distance_km[t][s]),
          problem.link.qos_exponent);
    }
  }
  return out;
}

SlicingDecision solve_window(const SliceProblem &problem, const SolverOptions &options) {
  return solve_impl(problem, options, std::max(1, 4 * omp_get_max_threads()));
}

namespace reference {
SlicingDecision solve_window_serial(const SliceProblem &problem, const SolverOptions &options) {
  return solve_impl(problem, options, 1);
}
}  // namespace reference

SlicingDecision best_effort_decision(const SliceProblem &problem) {
  problem.validate();
  SlicingDecision d;
  const int n = problem.satellite_count();
  d.satellites = problem.satellites;
  d.candidate.assign(n, 0.0);
  d.active.assign(n, 0);
  d.executed.assign(n, 0.0);
  d.locked.assign(n, 0);
  for (int s = 0; s < n; ++s) {
    if (problem.locked[s]) {
      d.locked[s] = 1;
      d.candidate[s] = d.executed[s] = *problem.locked[s];
      d.active[s] = *problem.locked[s] > 0.0 ? 1 : 0;
      continue;
    }
    for (int t = 0; t < problem.slot_count(); ++t) {
      if (problem.visible[t][s]) {
        d.candidate[s] = 1.0;
        d.active[s] = 1;
        break;
      }
    }
  }
  d.objective = window_objective(problem, d.candidate, d.active);
  d.thresholds = problem_thresholds(problem);
  return d;
}

void execute_on_coverage(SlicingDecision &decision, const CoverageSchedule &schedule, int window,
                         int slot) {
  const int T = schedule.window_length;
  if (slot < 0 || slot >= T) {
    throw std::out_of_range("execute_on_coverage: slot outside the window");
  }
  for (std::size_t i = 0; i < decision.satellites.size(); ++i) {
    if (decision.locked[i]) {
      continue;
    }
    for (int t = 0; t <= slot; ++t) {
      if (schedule.is_visible(decision.satellites[i], window * T + t)) {
        decision.locked[i] = 1;
        decision.executed[i] = decision.candidate[i];
        break;
      }
    }
  }
}

}  // namespace leoslice
