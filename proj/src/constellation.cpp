#include "leoslice/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace leoslice {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 rotate_z(const Vec3 &v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

Vec3 inertial_position(const ConstellationConfig &cfg, int plane, int index, double time_s) {
  const double radius = cfg.orbit_radius_km();
  const double mean_motion = std::sqrt(cfg.gravitational_parameter / (radius * radius * radius));
  const double raan = cfg.epoch_raan_offset_deg * kDegToRad +
                      kTwoPi * static_cast<double>(plane) / cfg.orbit_count;
  const double total = static_cast<double>(cfg.orbit_count) * cfg.sats_per_orbit;
  const double phase = kTwoPi * static_cast<double>(index) / cfg.sats_per_orbit +
                       kTwoPi * static_cast<double>(cfg.phasing_factor) * plane / total;
  // Argument of latitude; circular orbits make mean and true anomaly equal.
  const double u = phase + mean_motion * time_s;
  const double inc = cfg.inclination_deg * kDegToRad;
  const double cu = std::cos(u);
  const double su = std::sin(u);
  const double co = std::cos(raan);
  const double so = std::sin(raan);
  const double ci = std::cos(inc);
  const double si = std::sin(inc);
  return {radius * (co * cu - so * su * ci), radius * (so * cu + co * su * ci), radius * (su * si)};
}

Vec3 fixed_position(const ConstellationConfig &cfg, int sat, double time_s) {
  const int plane = sat / cfg.sats_per_orbit;
  const int index = sat % cfg.sats_per_orbit;
  return rotate_z(inertial_position(cfg, plane, index, time_s), -cfg.earth_rotation_rate * time_s);
}

CoverageSchedule empty_schedule(const ConstellationConfig &config, int horizon_slots,
                                double slot_duration_s, int window_length) {
  if (horizon_slots < 1) {
    throw std::invalid_argument("build_schedule: horizon_slots must be >= 1");
  }
  if (!(slot_duration_s > 0.0)) {
    throw std::invalid_argument("build_schedule: slot duration must be positive");
  }
  if (window_length < 1) {
    throw std::invalid_argument("build_schedule: window length must be >= 1");
  }
  CoverageSchedule sched;
  sched.satellite_count = config.satellite_count();
  sched.horizon_slots = horizon_slots;
  sched.window_length = window_length;
  sched.slot_duration_s = slot_duration_s;
  const auto cells = static_cast<std::size_t>(sched.satellite_count) * horizon_slots;
  sched.visible.assign(cells, 0);
  sched.distance_km.assign(cells, 0.0);
  return sched;
}

void fill_cell(const ConstellationConfig &config, const GroundArea &area, CoverageSchedule &sched,
               int sat, int slot) {
  const double t_mid = (static_cast<double>(slot) + 0.5) * sched.slot_duration_s;
  const LookAngle look =
      elevation_and_range(fixed_position(config, sat, t_mid), area, config.earth_radius_km);
  const auto cell = static_cast<std::size_t>(sat) * sched.horizon_slots + slot;
  sched.visible[cell] = look.elevation_deg >= area.min_elevation_deg ? 1 : 0;
  sched.distance_km[cell] = look.slant_range_km;
}

void require_coverage(const CoverageSchedule &sched) {
  if (sched.total_visible() == 0) {
    throw EmptyCoverage("no satellite reaches the minimum elevation over the horizon");
  }
}

}  // namespace

double Vec3::norm() const { return std::sqrt(dot(*this)); }

double ConstellationConfig::orbital_period_s() const {
  const double a = orbit_radius_km();
  return kTwoPi * std::sqrt(a * a * a / gravitational_parameter);
}

void ConstellationConfig::validate() const {
  if (orbit_count < 1 || sats_per_orbit < 1) {
    throw std::invalid_argument("constellation: orbit_count and sats_per_orbit must be >= 1");
  }
  if (phasing_factor < 0 || phasing_factor >= orbit_count) {
    throw std::invalid_argument("constellation: phasing_factor must lie in [0, orbit_count)");
  }
  if (!(altitude_km > 0.0)) {
    throw std::invalid_argument("constellation: altitude must be positive");
  }
  if (inclination_deg < 0.0 || inclination_deg > 180.0) {
    throw std::invalid_argument("constellation: inclination must lie in [0, 180] deg");
  }
  if (!(earth_radius_km > 0.0) || !(gravitational_parameter > 0.0)) {
    throw std::invalid_argument("constellation: earth radius and mu must be positive");
  }
}

void GroundArea::validate() const {
  if (!(lat_min_deg < lat_max_deg) || !(lon_min_deg < lon_max_deg)) {
    throw std::invalid_argument("area: min bounds must be below max bounds");
  }
  if (!(min_elevation_deg > 0.0 && min_elevation_deg < 90.0)) {
    throw std::invalid_argument("area: min_elevation must lie in (0, 90) deg");
  }
}

std::vector<int> CoverageSchedule::serving_set(int window) const {
  return visible_in(window * window_length, (window + 1) * window_length);
}

std::vector<int> CoverageSchedule::visible_in(int first_slot, int last_slot) const {
  std::vector<int> out;
  for (int s = 0; s < satellite_count; ++s) {
    for (int t = first_slot; t < last_slot; ++t) {
      if (is_visible(s, t)) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

std::size_t CoverageSchedule::total_visible() const {
  std::size_t n = 0;
  for (unsigned char v : visible) {
    n += v;
  }
  return n;
}

std::vector<Vec3> propagate_inertial(const ConstellationConfig &config, double time_s) {
  config.validate();
  if (time_s < 0.0) {
    throw std::invalid_argument("propagate: time must be >= 0");
  }
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(config.satellite_count()));
  for (int p = 0; p < config.orbit_count; ++p) {
    for (int k = 0; k < config.sats_per_orbit; ++k) {
      out.push_back(inertial_position(config, p, k, time_s));
    }
  }
  return out;
}

std::vector<Vec3> propagate(const ConstellationConfig &config, double time_s) {
  auto pos = propagate_inertial(config, time_s);
  const double angle = -config.earth_rotation_rate * time_s;
  for (auto &p : pos) {
    p = rotate_z(p, angle);
  }
  return pos;
}

Vec3 area_center_position(const GroundArea &area, double earth_radius_km) {
  const double lat = area.center_lat_deg() * kDegToRad;
  const double lon = area.center_lon_deg() * kDegToRad;
  return {earth_radius_km * std::cos(lat) * std::cos(lon),
          earth_radius_km * std::cos(lat) * std::sin(lon), earth_radius_km * std::sin(lat)};
}

LookAngle elevation_and_range(const Vec3 &sat_position, const GroundArea &area,
                              double earth_radius_km) {
  const Vec3 ground = area_center_position(area, earth_radius_km);
  const Vec3 los = sat_position - ground;
  const double range = los.norm();
  const double up = los.dot(ground) / (range * earth_radius_km);
  return {std::asin(std::clamp(up, -1.0, 1.0)) / kDegToRad, range};
}

CoverageSchedule build_schedule(const ConstellationConfig &config, const GroundArea &area,
                                int horizon_slots, double slot_duration_s, int window_length) {
  config.validate();
  CoverageSchedule sched = empty_schedule(config, horizon_slots, slot_duration_s, window_length);
  const int n_sat = sched.satellite_count;
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n_sat; ++s) {
    for (int t = 0; t < horizon_slots; ++t) {
      fill_cell(config, area, sched, s, t);
    }
  }
  require_coverage(sched);
  return sched;
}

namespace reference {

CoverageSchedule build_schedule_serial(const ConstellationConfig &config, const GroundArea &area,
                                       int horizon_slots, double slot_duration_s,
                                       int window_length) {
  config.validate();
  CoverageSchedule sched = empty_schedule(config, horizon_slots, slot_duration_s, window_length);
  for (int t = 0; t < horizon_slots; ++t) {
    for (int s = 0; s < sched.satellite_count; ++s) {
      fill_cell(config, area, sched, s, t);
    }
  }
  require_coverage(sched);
  return sched;
}

}  // namespace reference

void write_schedule_csv(const CoverageSchedule &schedule, std::ostream &out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "sat_id,slot,visible,distance_km\n";
  for (int s : schedule.visible_in(0, schedule.horizon_slots)) {
    for (int t = 0; t < schedule.horizon_slots; ++t) {
      out << s << ',' << t << ',' << (schedule.is_visible(s, t) ? 1 : 0) << ','
          << schedule.distance(s, t) << '\n';
    }
  }
}

}  // namespace leoslice
