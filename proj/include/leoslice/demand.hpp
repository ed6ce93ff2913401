#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leoslice {

// Area-aggregate demand sampled once per second (packets/s). Sample i belongs
// to second i; the trace is gap-free by construction.
struct DemandTrace {
  std::vector<double> packets;

  int duration_s() const { return static_cast<int>(packets.size()); }
};

struct DemandFeature {
  double mean = 0.0;
  double variance = 0.0;
};

enum class RegimeKind { Poisson, Gaussian };

// One stretch of the synthetic generator. Parameters ramp linearly from their
// start to their end value across the segment.
struct RegimeSegment {
  int start_s = 0;
  RegimeKind kind = RegimeKind::Poisson;
  double mean_start = 0.0;  // intensity for Poisson segments
  double mean_end = 0.0;
  double variance_start = 0.0;  // Gaussian only
  double variance_end = 0.0;
};

struct RegimeSpec {
  int duration_s = 0;
  std::vector<RegimeSegment> segments;

  void validate() const;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EmptySlot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws one sample per second. Gaussian draws are truncated at zero.
DemandTrace generate(const RegimeSpec &spec, std::uint64_t seed);

/// The tau samples of global slot `slot` (seconds [slot*tau, (slot+1)*tau)).
std::span<const double> slot_samples(const DemandTrace &trace, int slot, int tau);

/// Mean and population variance.
DemandFeature extract_features(std::span<const double> samples);

/// Features of every complete slot of the trace.
std::vector<DemandFeature> slot_features(const DemandTrace &trace, int tau);

DemandTrace parse_csv(const std::string &text);
DemandTrace ingest_csv(const std::filesystem::path &path);
void write_csv(const DemandTrace &trace, std::ostream &out);

/// Stationary warm-up followed by four drifting segments alternating between
/// Poisson and Gaussian regimes.
RegimeSpec default_regime(int warmup_s, int horizon_s, double base_rate);

}  // namespace leoslice
