#include "leoslice/linkmodel.hpp"

#include <cmath>
#include <numeric>

#include "leoslice/normal.hpp"

namespace leoslice {

void LinkParams::validate() const {
  if (!(bandwidth_hz > 0.0 && packet_size_bits > 0.0 && tx_power_w > 0.0 && noise_power_w > 0.0)) {
    throw std::invalid_argument("link: bandwidth, packet size, power and noise must be positive");
  }
  if (!(pathloss_exponent > 0.0) || !(qos_exponent > 0.0) || !(antenna_gain > 0.0)) {
    throw std::invalid_argument("link: pathloss exponent, qos exponent and gain must be positive");
  }
  if (!(delay_violation_target > 0.0 && delay_violation_target < 1.0)) {
    throw std::invalid_argument("link: delay violation target must lie in (0, 1)");
  }
  if (!(light_speed_km_s > 0.0)) {
    throw std::invalid_argument("link: light speed must be positive");
  }
}

double channel_gain(double distance_km, double pathloss_exponent) {
  if (!(distance_km > 0.0)) {
    throw NonPositiveDistance("channel_gain: distance must be positive");
  }
  return std::pow(distance_km * 1000.0, -pathloss_exponent);
}

double spectral_efficiency(const LinkParams &params, double distance_km) {
  const double snr = params.tx_power_w * params.antenna_gain *
                     channel_gain(distance_km, params.pathloss_exponent) / params.noise_power_w;
  return std::log2(1.0 + snr);
}

double full_rate(const LinkParams &params, double distance_km) {
  return params.bandwidth_hz / params.packet_size_bits * spectral_efficiency(params, distance_km);
}

double rate(bool visible, double fraction, const LinkParams &params, double distance_km) {
  if (!visible || fraction <= 0.0) {
    return 0.0;
  }
  return fraction * full_rate(params, distance_km);
}

double effective_capacity(double rate, double /*qos_exponent*/) { return rate; }

double queue_delay_bound(double rate, double qos_exponent, double violation_target) {
  if (!(rate > 0.0)) {
    throw ZeroRate("queue_delay_bound: rate must be positive");
  }
  return -std::log(violation_target) / (qos_exponent * rate);
}

double total_delay(bool visible, double fraction, const LinkParams &params, double distance_km) {
  const double r = rate(visible, fraction, params, distance_km);
  if (r <= 0.0) {
    return 0.0;
  }
  return queue_delay_bound(effective_capacity(r, params.qos_exponent), params.qos_exponent,
                           params.delay_violation_target) +
         distance_km / params.light_speed_km_s;
}

namespace {

struct EffectiveBandwidthVisitor {
  double theta;

  double operator()(const PoissonDemand &d) const {
    // expm1 keeps the theta -> 0 limit accurate.
    return d.intensity * std::expm1(theta) / theta;
  }
  double operator()(const GaussianDemand &d) const { return d.mean + 0.5 * d.variance * theta; }
  double operator()(const EmpiricalDemand &d) const {
    std::vector<double> scaled(d.samples.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      scaled[i] = theta * d.samples[i];
    }
    const double value = log_mean_exp(scaled) / theta;
    if (!std::isfinite(value)) {
      throw EffectiveBandwidthOverflow("effective_bandwidth: result not representable");
    }
    return value;
  }
};

}  // namespace

double effective_bandwidth(const DemandModel &model, double qos_exponent) {
  if (!(qos_exponent > 0.0)) {
    throw std::invalid_argument("effective_bandwidth: qos exponent must be positive");
  }
  if (const auto *e = std::get_if<EmpiricalDemand>(&model); e && e->samples.empty()) {
    throw std::invalid_argument("effective_bandwidth: empirical model has no samples");
  }
  return std::visit(EffectiveBandwidthVisitor{qos_exponent}, model);
}

double demand_mean(const DemandModel &model) {
  struct {
    double operator()(const PoissonDemand &d) const { return d.intensity; }
    double operator()(const GaussianDemand &d) const { return d.mean; }
    double operator()(const EmpiricalDemand &d) const {
      return std::accumulate(d.samples.begin(), d.samples.end(), 0.0) /
             static_cast<double>(d.samples.size());
    }
  } visitor;
  return std::visit(visitor, model);
}

}  // namespace leoslice
