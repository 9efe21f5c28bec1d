#include "maleo/geometry.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>

namespace maleo {

void EarthModel::validate() const {
  if (!(radius_m > 0.0) || !(grav_const > 0.0) || !(mass_kg > 0.0)) {
    throw DomainError("EarthModel: radius, gravitational constant and mass must be positive");
  }
}

void OrbitConfig::validate() const {
  if (!(altitude_m > 0.0)) throw DomainError("OrbitConfig: altitude must be positive");
  if (sats_per_plane < 1) throw DomainError("OrbitConfig: at least one satellite per plane");
  if (slots < 1) throw DomainError("OrbitConfig: at least one slot");
  if (inclination_rad < 0.0 || inclination_rad > kPi / 2.0 + 1e-15) {
    throw DomainError("OrbitConfig: inclination must lie in [0, pi/2]");
  }
}

double FrameTransform::orthonormality_residual() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

double orbital_period(const EarthModel& earth, double altitude_m) {
  const double r = earth.radius_m + altitude_m;
  const double mu = earth.grav_const * earth.mass_kg;
  if (!(r > 0.0) || !(mu > 0.0)) {
    throw DomainError("orbital_period: non-positive radicand");
  }
  return kTwoPi * std::sqrt(r * r * r / mu);
}

std::vector<double> slot_times(double interval_s, int slots) {
  if (slots < 1 || !(interval_s > 0.0)) {
    throw DomainError("slot_times: need T > 0 and M >= 1");
  }
  std::vector<double> t(static_cast<std::size_t>(slots));
  for (int m = 1; m <= slots; ++m) {
    t[static_cast<std::size_t>(m - 1)] = (m - 0.5) * interval_s / slots;
  }
  return t;
}

double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

double traversed_angle(double t_s, double period_s, double alpha0) {
  if (!(period_s > 0.0)) throw DomainError("traversed_angle: period must be positive");
  return wrap_angle(alpha0 + kTwoPi * t_s / period_s);
}

Vec3 spherical_to_cartesian(const GeoAngles& a, double radius_m) {
  const double ct = std::cos(a.theta);
  return radius_m * Vec3(ct * std::cos(a.phi), ct * std::sin(a.phi), std::sin(a.theta));
}

GeoAngles cartesian_to_spherical(const Vec3& p) {
  const double r = p.norm();
  if (r == 0.0) throw DomainError("cartesian_to_spherical: zero vector");
  return GeoAngles{std::asin(std::clamp(p.z() / r, -1.0, 1.0)), std::atan2(p.y(), p.x())};
}

LeoFix leo_position(double alpha, double inclination, double radius_m) {
  if (!(radius_m > 0.0)) throw DomainError("leo_position: radius must be positive");
  GeoAngles a;
  a.theta = std::asin(std::clamp(std::sin(inclination) * std::sin(alpha), -1.0, 1.0));
  // Two-argument form of arctan(cos(beta) tan(alpha)) keeps the hemisphere.
  a.phi = std::atan2(std::cos(inclination) * std::sin(alpha), std::cos(alpha));
  if (a.phi <= -kPi) a.phi += kTwoPi;
  return LeoFix{a, spherical_to_cartesian(a, radius_m)};
}

FrameTransform sccs_to_gccs(double inclination, const GeoAngles& at) {
  const double sb = std::sin(inclination), cb = std::cos(inclination);
  const double st = std::sin(at.theta), ct = std::cos(at.theta);
  const double sp = std::sin(at.phi), cp = std::cos(at.phi);
  Mat3 m;
  m << -sb * st - cb * ct * sp, 0.0, -ct * cp,
       cb * ct * cp,            sb,  -ct * sp,
       sb * ct * cp,           -cb,  -st;
  return FrameTransform(m);
}

FrameTransform sccs_to_gccs(const SlotGeometry& slot) {
  return sccs_to_gccs(slot.inclination, slot.angles);
}

FrameTransform enu_frame(const GeoAngles& r) {
  const double st = std::sin(r.theta), ct = std::cos(r.theta);
  const double sp = std::sin(r.phi), cp = std::cos(r.phi);
  Mat3 m;
  m << -sp, -cp * st, cp * ct,
        cp, -sp * st, sp * ct,
       0.0,       ct,      st;
  return FrameTransform(m);
}

double great_circle_angle(const GeoAngles& a, const GeoAngles& b) {
  // Haversine form: accurate for the small separations of a coverage area.
  const double dt = b.theta - a.theta;
  const double dp = b.phi - a.phi;
  const double h = std::sin(dt / 2) * std::sin(dt / 2) +
                   std::cos(a.theta) * std::cos(b.theta) * std::sin(dp / 2) * std::sin(dp / 2);
  return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

CoverageGrid build_coverage_grid(const GeoAngles& center, double angular_radius, int lon_cells,
                                 int lat_cells) {
  if (lon_cells < 1 || lat_cells < 1) {
    throw DomainError("build_coverage_grid: cell counts must be >= 1");
  }
  CoverageGrid grid;
  grid.lon_cells = lon_cells;
  grid.lat_cells = lat_cells;
  const double dlon = kTwoPi / lon_cells;
  const double dlat = kPi / lat_cells;
  for (int j = 0; j < lat_cells; ++j) {
    const double theta = -kPi / 2 + (j + 0.5) * dlat;
    for (int i = 0; i < lon_cells; ++i) {
      const GeoAngles c{theta, -kPi + (i + 0.5) * dlon};
      if (great_circle_angle(center, c) <= angular_radius) grid.centers.push_back(c);
    }
  }
  return grid;
}

double centered_initial_phase(double interval_s, double period_s) {
  return -kPi * interval_s / period_s;
}

std::vector<SlotGeometry> build_slots(const EarthModel& earth, const OrbitConfig& orbit) {
  earth.validate();
  orbit.validate();
  const double ts = orbital_period(earth, orbit.altitude_m);
  const double interval = ts / orbit.sats_per_plane;
  const double alpha0 = orbit.initial_phase_rad.value_or(centered_initial_phase(interval, ts));
  const double radius = earth.radius_m + orbit.altitude_m;

  std::vector<SlotGeometry> slots;
  const auto times = slot_times(interval, orbit.slots);
  slots.reserve(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    SlotGeometry s;
    s.index = static_cast<int>(m) + 1;
    s.time_s = times[m];
    s.alpha = traversed_angle(times[m], ts, alpha0);
    s.radius_m = radius;
    s.inclination = orbit.inclination_rad;
    const LeoFix fix = leo_position(s.alpha, orbit.inclination_rad, radius);
    s.angles = fix.angles;
    s.p_leo = fix.position;
    s.ta = sccs_to_gccs(orbit.inclination_rad, s.angles);
    slots.push_back(s);
  }
  return slots;
}

}  // namespace maleo
