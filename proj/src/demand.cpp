#include "leoslice/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace leoslice {

void RegimeSpec::validate() const {
  if (duration_s < 0) {
    throw std::invalid_argument("regime: duration must be >= 0");
  }
  if (duration_s == 0) {
    return;
  }
  if (segments.empty() || segments.front().start_s != 0) {
    throw std::invalid_argument("regime: first segment must start at second 0");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto &seg = segments[i];
    if (i > 0 && seg.start_s <= segments[i - 1].start_s) {
      throw std::invalid_argument("regime: segments must be strictly ordered");
    }
    if (seg.start_s >= duration_s) {
      throw std::invalid_argument("regime: segment starts after the end of the trace");
    }
    if (seg.kind == RegimeKind::Poisson && (!(seg.mean_start > 0.0) || !(seg.mean_end > 0.0))) {
      throw std::invalid_argument("regime: Poisson intensity must be positive");
    }
    if (seg.kind == RegimeKind::Gaussian && (seg.variance_start < 0.0 || seg.variance_end < 0.0)) {
      throw std::invalid_argument("regime: Gaussian variance must be >= 0");
    }
  }
}

DemandTrace generate(const RegimeSpec &spec, std::uint64_t seed) {
  spec.validate();
  DemandTrace trace;
  trace.packets.reserve(static_cast<std::size_t>(spec.duration_s));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto &seg = spec.segments[i];
    const int end = i + 1 < spec.segments.size() ? spec.segments[i + 1].start_s : spec.duration_s;
    const int length = end - seg.start_s;
    for (int k = 0; k < length; ++k) {
      const double frac = length > 1 ? static_cast<double>(k) / (length - 1) : 0.0;
      const double mean = seg.mean_start + frac * (seg.mean_end - seg.mean_start);
      if (seg.kind == RegimeKind::Poisson) {
        std::poisson_distribution<long> draw(mean);
        trace.packets.push_back(static_cast<double>(draw(rng)));
      } else {
        const double var = seg.variance_start + frac * (seg.variance_end - seg.variance_start);
        std::normal_distribution<double> draw(mean, std::sqrt(var));
        trace.packets.push_back(std::max(0.0, draw(rng)));
      }
    }
  }
  return trace;
}

std::span<const double> slot_samples(const DemandTrace &trace, int slot, int tau) {
  if (tau < 1 || slot < 0) {
    throw OutOfRange("slot_samples: slot and tau must be non-negative");
  }
  const auto begin = static_cast<std::size_t>(slot) * tau;
  if (begin + tau > trace.packets.size()) {
    throw OutOfRange("slot_samples: slot " + std::to_string(slot) + " exceeds trace duration");
  }
  return std::span<const double>(trace.packets).subspan(begin, static_cast<std::size_t>(tau));
}

DemandFeature extract_features(std::span<const double> samples) {
  if (samples.empty()) {
    throw EmptySlot("extract_features: no samples");
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) {
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : samples) {
    var += (v - mean) * (v - mean);
  }
  return {mean, var / n};
}

std::vector<DemandFeature> slot_features(const DemandTrace &trace, int tau) {
  std::vector<DemandFeature> out;
  const int slots = trace.duration_s() / tau;
  out.reserve(static_cast<std::size_t>(slots));
  for (int s = 0; s < slots; ++s) {
    out.push_back(extract_features(slot_samples(trace, s, tau)));
  }
  return out;
}

DemandTrace parse_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) {
    throw SchemaError("trace csv: missing header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "second,packets") {
    throw SchemaError("trace csv: header must be 'second,packets'");
  }
  DemandTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("trace csv: expected two columns", line_no);
    }
    long second = 0;
    double packets = 0.0;
    try {
      std::size_t used = 0;
      second = std::stol(line.substr(0, comma), &used);
      if (used != comma) {
        throw std::invalid_argument("trailing");
      }
      const std::string rest = line.substr(comma + 1);
      packets = std::stod(rest, &used);
      if (used != rest.size()) {
        throw std::invalid_argument("trailing");
      }
    } catch (const std::logic_error &) {
      throw ParseError("trace csv: malformed number", line_no);
    }
    if (second != static_cast<long>(trace.packets.size())) {
      throw SchemaError("trace csv: seconds must start at 0 and increase by 1 (line " +
                        std::to_string(line_no) + ")");
    }
    if (packets < 0.0) {
      throw SchemaError("trace csv: negative packets (line " + std::to_string(line_no) + ")");
    }
    trace.packets.push_back(packets);
  }
  return trace;
}

DemandTrace ingest_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("trace csv: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_csv(const DemandTrace &trace, std::ostream &out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "second,packets\n";
  for (std::size_t i = 0; i < trace.packets.size(); ++i) {
    out << i << ',' << trace.packets[i] << '\n';
  }
}

RegimeSpec default_regime(int warmup_s, int horizon_s, double base_rate) {
  RegimeSpec spec;
  spec.duration_s = warmup_s + horizon_s;
  if (warmup_s > 0) {
    spec.segments.push_back({0, RegimeKind::Poisson, base_rate, base_rate, 0.0, 0.0});
  }
  const int quarter = horizon_s / 4;
  const double up = 1.3 * base_rate;
  const double down = 0.7 * base_rate;
  const int s0 = warmup_s;
  spec.segments.push_back({s0, RegimeKind::Poisson, base_rate, up, 0.0, 0.0});
  spec.segments.push_back(
      {s0 + quarter, RegimeKind::Gaussian, up, base_rate, 4.0 * up, 4.0 * base_rate});
  spec.segments.push_back({s0 + 2 * quarter, RegimeKind::Poisson, base_rate, down, 0.0, 0.0});
  spec.segments.push_back(
      {s0 + 3 * quarter, RegimeKind::Gaussian, down, base_rate, 4.0 * down, 4.0 * base_rate});
  return spec;
}

}  // namespace leoslice
