#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "leoslice/constellation.hpp"

using namespace leoslice;

namespace {

constexpr double kPi = std::numbers::pi;

double rad(double d) { return d * kPi / 180.0; }

// Kepler's third law written out independently of the library.
double kepler_period(double radius_km, double mu) {
  return 2.0 * kPi * std::sqrt(radius_km * radius_km * radius_km / mu);
}

// Slant range at a given elevation on a spherical Earth, from the law of cosines.
double slant_range_oracle(double re, double h, double elevation_deg) {
  const double e = rad(elevation_deg);
  const double ratio = (re + h) / re;
  return re * (std::sqrt(ratio * ratio - std::cos(e) * std::cos(e)) - std::sin(e));
}

Vec3 zenith_point(const GroundArea &area, double radius_km) {
  const double lat = rad(area.center_lat_deg());
  const double lon = rad(area.center_lon_deg());
  return {radius_km * std::cos(lat) * std::cos(lon), radius_km * std::cos(lat) * std::sin(lon),
          radius_km * std::sin(lat)};
}

// Point at the given elevation above the area center, found by walking along
// the local north direction and bisecting on the library's look angle. Only the
// range is compared against the oracle, so using the library for elevation is
// fine here.
Vec3 point_at_elevation(const GroundArea &area, double re, double h, double target_deg) {
  const double lat0 = rad(area.center_lat_deg());
  const double lon0 = rad(area.center_lon_deg());
  const double r = re + h;
  auto at = [&](double central) {
    const double lat = lat0 + central;
    return Vec3{r * std::cos(lat) * std::cos(lon0), r * std::cos(lat) * std::sin(lon0),
                r * std::sin(lat)};
  };
  double lo = 0.0;
  double hi = 0.5;  // rad of central angle; elevation there is negative
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (elevation_and_range(at(mid), area, re).elevation_deg > target_deg) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("orbital period matches Kepler's third law") {
  ConstellationConfig c;
  const double oracle = kepler_period(6921.0, 398600.4418);
  CHECK(std::abs(c.orbital_period_s() - oracle) < 1e-9);
  CHECK(std::abs(c.orbital_period_s() - 5731.0) <= 1.0);
}

TEST_CASE("every satellite stays on its orbit sphere") {
  ConstellationConfig c;
  for (double t : {0.0, 17.3, 900.0, 5000.0}) {
    const auto pos = propagate(c, t);
    REQUIRE(pos.size() == 72u * 22u);
    for (const auto &p : pos) {
      CHECK(std::abs(p.norm() - 6921.0) < 1e-3);
      CHECK(std::abs(p.norm() / 6921.0 - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("satellite 0 starts at the ascending node") {
  ConstellationConfig c;
  const auto pos = propagate(c, 0.0);
  CHECK(pos[0].x == doctest::Approx(6921.0).epsilon(1e-12));
  CHECK(std::abs(pos[0].y) < 1e-9);
  CHECK(std::abs(pos[0].z) < 1e-9);
  // Moving north at the node.
  const auto later = propagate(c, 1.0);
  CHECK(later[0].z > 0.0);
}

TEST_CASE("Walker phasing of mean anomaly and node spacing") {
  ConstellationConfig c;
  c.orbit_count = 6;
  c.sats_per_orbit = 4;
  c.phasing_factor = 2;
  c.inclination_deg = 60.0;
  const auto pos = propagate_inertial(c, 0.0);
  const double r = c.orbit_radius_km();
  const double inc = rad(c.inclination_deg);
  for (int p = 0; p < c.orbit_count; ++p) {
    const double raan = 2.0 * kPi * p / c.orbit_count;
    for (int k = 0; k < c.sats_per_orbit; ++k) {
      const double u = 2.0 * kPi * k / c.sats_per_orbit +
                       2.0 * kPi * c.phasing_factor * p / (c.orbit_count * c.sats_per_orbit);
      // Rotation R3(-raan) R1(-inc) applied to (r cos u, r sin u, 0).
      const double xo = r * std::cos(u);
      const double yo = r * std::sin(u);
      const Vec3 expect{xo * std::cos(raan) - yo * std::cos(inc) * std::sin(raan),
                        xo * std::sin(raan) + yo * std::cos(inc) * std::cos(raan),
                        yo * std::sin(inc)};
      const Vec3 got = pos[p * c.sats_per_orbit + k];
      CHECK((got - expect).norm() < 1e-6);
    }
  }
}

TEST_CASE("Walker symmetry under a one-plane rotation") {
  // With F = 0 a rotation by one plane spacing maps the set onto itself.
  ConstellationConfig c;
  c.orbit_count = 8;
  c.sats_per_orbit = 5;
  c.phasing_factor = 0;
  ConstellationConfig rotated = c;
  rotated.epoch_raan_offset_deg = 360.0 / c.orbit_count;
  const auto a = propagate_inertial(c, 123.0);
  const auto b = propagate_inertial(rotated, 123.0);
  for (int p = 0; p < c.orbit_count; ++p) {
    for (int k = 0; k < c.sats_per_orbit; ++k) {
      const int next = ((p + 1) % c.orbit_count) * c.sats_per_orbit + k;
      CHECK((b[p * c.sats_per_orbit + k] - a[next]).norm() < 1e-9);
    }
  }
}

TEST_CASE("Walker phasing breaks exact plane symmetry") {
  // With F != 0 a one-plane rotation shifts in-plane slots by 2*pi*F/N, which
  // is not a multiple of the slot spacing unless F is a multiple of P.
  ConstellationConfig c;
  c.orbit_count = 6;
  c.sats_per_orbit = 6;
  c.phasing_factor = 1;
  ConstellationConfig rotated = c;
  rotated.epoch_raan_offset_deg = 360.0 / c.orbit_count;
  const auto a = propagate_inertial(c, 0.0);
  const auto b = propagate_inertial(rotated, 0.0);
  double worst = 0.0;
  for (const auto &pb : b) {
    double best = 1e300;
    for (const auto &pa : a) {
      best = std::min(best, (pb - pa).norm());
    }
    worst = std::max(worst, best);
  }
  CHECK(worst > 1.0);
}

TEST_CASE("elevation and range at zenith") {
  GroundArea area;
  const Vec3 sat = zenith_point(area, 6921.0);
  const LookAngle la = elevation_and_range(sat, area);
  CHECK(la.elevation_deg == doctest::Approx(90.0).epsilon(1e-9));
  CHECK(std::abs(la.slant_range_km - 550.0) < 1e-6);
}

TEST_CASE("slant range at 30 degrees elevation") {
  GroundArea area;
  const double oracle = slant_range_oracle(6371.0, 550.0, 30.0);
  CHECK(std::abs(oracle - 992.8) < 0.5);
  const Vec3 sat = point_at_elevation(area, 6371.0, 550.0, 30.0);
  const LookAngle la = elevation_and_range(sat, area);
  CHECK(std::abs(la.elevation_deg - 30.0) < 1e-6);
  CHECK(std::abs(la.slant_range_km - oracle) < 1e-3);
  CHECK(std::abs(la.slant_range_km - 992.8) < 0.5);
}

TEST_CASE("slant range oracle across elevations") {
  GroundArea area;
  for (double e : {10.0, 20.0, 45.0, 70.0}) {
    const Vec3 sat = point_at_elevation(area, 6371.0, 550.0, e);
    CHECK(std::abs(elevation_and_range(sat, area).slant_range_km -
                   slant_range_oracle(6371.0, 550.0, e)) < 1e-3);
  }
}

TEST_CASE("satellite behind the Earth has negative elevation") {
  GroundArea area;
  const Vec3 z = zenith_point(area, 6921.0);
  const Vec3 opposite{-z.x, -z.y, -z.z};
  CHECK(elevation_and_range(opposite, area).elevation_deg < 0.0);
  CHECK(std::abs(elevation_and_range(opposite, area).slant_range_km - (6921.0 + 6371.0)) < 1e-6);
}

TEST_CASE("minimum elevation above zenith gives empty coverage") {
  ConstellationConfig c;
  GroundArea area;
  area.min_elevation_deg = 90.0 + 1e-9;
  // validate() would reject this area, so the schedule must be built directly.
  CHECK_THROWS_AS(build_schedule(c, area, 10, 10.0), EmptyCoverage);
}

TEST_CASE("every default slot has a visible satellite, confirmed at 0.1 s steps") {
  ConstellationConfig c;
  GroundArea area;
  const auto s = build_schedule(c, area, 90, 10.0);
  for (int t = 0; t < 90; ++t) {
    bool any = false;
    for (int sat = 0; sat < s.satellite_count && !any; ++sat) {
      any = s.is_visible(sat, t);
    }
    CHECK(any);
  }
  // Fine-step brute force: coverage never drops out over the 900 s horizon.
  // Only satellites that pass within 25 degrees of central angle are tracked;
  // the 30 degree mask needs about 7.
  const Vec3 center = area_center_position(area, c.earth_radius_km);
  std::set<int> near;
  for (double t = 0.0; t <= 900.0; t += 30.0) {
    const auto pos = propagate(c, t);
    for (int i = 0; i < c.satellite_count(); ++i) {
      if (pos[i].dot(center) / (pos[i].norm() * center.norm()) > std::cos(rad(25.0))) {
        near.insert(i);
      }
    }
  }
  int gaps = 0;
  for (int step = 0; step <= 9000; ++step) {
    const double t = step * 0.1;
    const auto pos = propagate(c, t);
    bool any = false;
    for (int i : near) {
      if (elevation_and_range(pos[i], area).elevation_deg >= area.min_elevation_deg) {
        any = true;
        break;
      }
    }
    gaps += any ? 0 : 1;
  }
  CHECK(gaps == 0);
}

TEST_CASE("schedule samples the slot midpoint") {
  ConstellationConfig c;
  GroundArea area;
  const auto s = build_schedule(c, area, 20, 10.0);
  for (int t : {0, 7, 19}) {
    const auto pos = propagate(c, (t + 0.5) * 10.0);
    for (int sat = 0; sat < s.satellite_count; ++sat) {
      const LookAngle la = elevation_and_range(pos[sat], area);
      CHECK(s.is_visible(sat, t) == (la.elevation_deg >= area.min_elevation_deg));
      CHECK(s.distance(sat, t) == doctest::Approx(la.slant_range_km).epsilon(1e-12));
    }
  }
}

TEST_CASE("visible distances lie between altitude and the horizon bound") {
  ConstellationConfig c;
  GroundArea area;
  for (double e : {10.0, 30.0}) {
    area.min_elevation_deg = e;
    const auto s = build_schedule(c, area, 90, 10.0);
    const double bound = slant_range_oracle(6371.0, 550.0, e);
    for (int sat = 0; sat < s.satellite_count; ++sat) {
      for (int t = 0; t < 90; ++t) {
        if (s.is_visible(sat, t)) {
          CHECK(s.distance(sat, t) >= 550.0);
          CHECK(s.distance(sat, t) <= bound + 1e-6);
          CHECK(s.distance(sat, t) <= 3000.0);
        }
      }
    }
  }
}

TEST_CASE("coverage is monotone in the elevation mask") {
  ConstellationConfig c;
  GroundArea area;
  std::size_t prev_total = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> prev_sets(9, std::numeric_limits<std::size_t>::max());
  for (double e : {10.0, 20.0, 30.0, 40.0}) {
    area.min_elevation_deg = e;
    const auto s = build_schedule(c, area, 90, 10.0);
    CHECK(s.total_visible() <= prev_total);
    prev_total = s.total_visible();
    for (int w = 0; w < s.window_count(); ++w) {
      const std::size_t n = s.serving_set(w).size();
      CHECK(n <= prev_sets[w]);
      prev_sets[w] = n;
    }
  }
}

TEST_CASE("schedule is deterministic and matches the serial reference") {
  ConstellationConfig c;
  GroundArea area;
  const auto a = build_schedule(c, area, 30, 10.0);
  const auto b = build_schedule(c, area, 30, 10.0);
  const auto r = reference::build_schedule_serial(c, area, 30, 10.0);
  CHECK(a == b);
  CHECK(a == r);
}

TEST_CASE("serving set collects satellites visible in the window") {
  ConstellationConfig c;
  GroundArea area;
  const auto s = build_schedule(c, area, 30, 10.0);
  for (int w = 0; w < 3; ++w) {
    const auto set = s.serving_set(w);
    CHECK(!set.empty());
    CHECK(std::is_sorted(set.begin(), set.end()));
    for (int sat = 0; sat < s.satellite_count; ++sat) {
      bool vis = false;
      for (int t = w * 10; t < (w + 1) * 10; ++t) {
        vis = vis || s.is_visible(sat, t);
      }
      CHECK(vis == std::binary_search(set.begin(), set.end(), sat));
    }
  }
}

TEST_CASE("schedule CSV lists visible satellites") {
  ConstellationConfig c;
  GroundArea area;
  const auto s = build_schedule(c, area, 5, 10.0, 5);
  std::ostringstream out;
  write_schedule_csv(s, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sat_id,slot,visible,distance_km");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  CHECK(rows == static_cast<int>(s.visible_in(0, 5).size()) * 5);
}

TEST_CASE("config validation") {
  ConstellationConfig c;
  CHECK_NOTHROW(c.validate());
  c.phasing_factor = 72;
  CHECK_THROWS(c.validate());
  c = {};
  c.altitude_km = 0.0;
  CHECK_THROWS(c.validate());
  GroundArea a;
  a.lat_min_deg = 40.0;
  CHECK_THROWS(a.validate());
  a = {};
  a.min_elevation_deg = 90.0;
  CHECK_THROWS(a.validate());
}
