#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace leoslice {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
  double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
};

// Walker-delta constellation i:N/P/F on circular orbits. Defaults are the
// Starlink phase-1 shell.
struct ConstellationConfig {
  int orbit_count = 72;
  int sats_per_orbit = 22;
  int phasing_factor = 17;
  double altitude_km = 550.0;
  double inclination_deg = 53.0;
  double earth_radius_km = 6371.0;
  double earth_rotation_rate = 7.2921159e-5;  // rad/s
  double gravitational_parameter = 398600.4418;  // km^3/s^2
  double epoch_raan_offset_deg = 0.0;

  int satellite_count() const { return orbit_count * sats_per_orbit; }
  double orbit_radius_km() const { return earth_radius_km + altitude_km; }
  double orbital_period_s() const;
  void validate() const;
};

// Target area. All geometry is evaluated at the area center.
struct GroundArea {
  double lat_min_deg = 30.0;
  double lat_max_deg = 31.5;
  double lon_min_deg = -84.0;
  double lon_max_deg = -82.5;
  double min_elevation_deg = 30.0;

  double center_lat_deg() const { return 0.5 * (lat_min_deg + lat_max_deg); }
  double center_lon_deg() const { return 0.5 * (lon_min_deg + lon_max_deg); }
  void validate() const;
};

struct LookAngle {
  double elevation_deg = 0.0;
  double slant_range_km = 0.0;
};

class EmptyCoverage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-slot visibility and slant distance for every satellite. Satellite id is
// plane * sats_per_orbit + index_in_plane.
struct CoverageSchedule {
  int satellite_count = 0;
  int horizon_slots = 0;
  int window_length = 1;
  double slot_duration_s = 10.0;
  std::vector<unsigned char> visible;  // row-major [satellite][slot]
  std::vector<double> distance_km;     // row-major [satellite][slot]

  bool is_visible(int sat, int slot) const {
    return visible[static_cast<std::size_t>(sat) * horizon_slots + slot] != 0;
  }
  double distance(int sat, int slot) const {
    return distance_km[static_cast<std::size_t>(sat) * horizon_slots + slot];
  }
  int window_count() const { return horizon_slots / window_length; }

  /// Satellites visible in at least one slot of window w, ascending id.
  std::vector<int> serving_set(int window) const;
  /// Satellites visible in at least one slot of [first_slot, last_slot).
  std::vector<int> visible_in(int first_slot, int last_slot) const;
  std::size_t total_visible() const;

  bool operator==(const CoverageSchedule &) const = default;
};

/// Earth-centered inertial positions at `time_s` (km).
std::vector<Vec3> propagate_inertial(const ConstellationConfig &config, double time_s);

/// Earth-fixed positions at `time_s` (km); the frames coincide at t = 0.
std::vector<Vec3> propagate(const ConstellationConfig &config, double time_s);

/// Earth-fixed position of the area center on the spherical Earth.
Vec3 area_center_position(const GroundArea &area, double earth_radius_km);

LookAngle elevation_and_range(const Vec3 &sat_position, const GroundArea &area,
                              double earth_radius_km = 6371.0);

/// Samples visibility at each slot midpoint. Satellites are evaluated in
/// parallel; throws EmptyCoverage if nothing is ever visible.
CoverageSchedule build_schedule(const ConstellationConfig &config, const GroundArea &area,
                                int horizon_slots, double slot_duration_s,
                                int window_length = 10);

namespace reference {
/// Single-threaded slot-major loop, kept to cross-check build_schedule.
CoverageSchedule build_schedule_serial(const ConstellationConfig &config,
                                       const GroundArea &area, int horizon_slots,
                                       double slot_duration_s, int window_length = 10);
}  // namespace reference

/// CSV with columns sat_id,slot,visible,distance_km for satellites that are
/// visible at least once over the horizon.
void write_schedule_csv(const CoverageSchedule &schedule, std::ostream &out);

}  // namespace leoslice
