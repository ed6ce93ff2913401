#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

namespace leoslice {

// Downlink parameters shared by every satellite. Rates are in packets/s and
// the QoS exponent is per packet.
struct LinkParams {
  double bandwidth_hz = 500e6;
  double packet_size_bits = 8.0e7;  // 10 MB
  double tx_power_w = 10.0;         // 10 dBW
  double noise_power_w = 4.357301810188747e-12;  // log2(1 + SNR) = 10 at 550 km
  double pathloss_exponent = 2.5;
  double antenna_gain = 1e5;        // 50 dBi
  double qos_exponent = 0.05;
  double delay_violation_target = 0.05;
  double light_speed_km_s = 299792.458;

  void validate() const;
};

class NonPositiveDistance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ZeroRate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EffectiveBandwidthOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct PoissonDemand {
  double intensity = 0.0;
};

struct GaussianDemand {
  double mean = 0.0;
  double variance = 0.0;
};

struct EmpiricalDemand {
  std::vector<double> samples;
};

using DemandModel = std::variant<PoissonDemand, GaussianDemand, EmpiricalDemand>;

/// Path-loss channel gain (d in meters)^-delta.
double channel_gain(double distance_km, double pathloss_exponent);

/// Spectral efficiency log2(1 + SNR) of a satellite at the given distance.
double spectral_efficiency(const LinkParams &params, double distance_km);

/// Full-reservation rate (b = 1) of a visible satellite, packets/s.
double full_rate(const LinkParams &params, double distance_km);

/// Reserved rate a*b*B/kappa*log2(1 + P*G*h/sigma^2).
double rate(bool visible, double fraction, const LinkParams &params, double distance_km);

/// Effective capacity of a constant-rate server equals its rate.
double effective_capacity(double rate, double qos_exponent);

/// -ln(eps) / (theta * R). Throws ZeroRate for R = 0.
double queue_delay_bound(double rate, double qos_exponent, double violation_target);

/// Queue bound plus propagation delay, or 0 when the satellite carries no traffic.
double total_delay(bool visible, double fraction, const LinkParams &params, double distance_km);

double effective_bandwidth(const DemandModel &model, double qos_exponent);

double demand_mean(const DemandModel &model);

}  // namespace leoslice
