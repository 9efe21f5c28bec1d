// Earth/orbit model, slot time grid, LEO propagation on a circular inclined
// orbit, and the coordinate frames used throughout the pipeline:
//
//   GCCS  geocentric Cartesian
//   GSCS  geocentric spherical (R, theta = elevation/latitude, phi = azimuth/longitude)
//   SCCS  satellite-centric Cartesian (x along velocity, z toward the geocenter)
//   ENU   East-North-Up at a ground receiver
//
// All angles are radians. Every function here is pure.
#pragma once

#include "maleo/types.hpp"

#include <optional>
#include <vector>

namespace maleo {

struct EarthModel {
  double radius_m = 6.371e6;
  double grav_const = 6.67e-11;  // m^3 kg^-1 s^-2
  double mass_kg = 5.97e24;

  void validate() const;
};

struct OrbitConfig {
  double altitude_m = 200e3;
  double inclination_rad = deg2rad(65.0);
  int sats_per_plane = 40;
  int slots = 30;
  // Unset: chosen so the sub-satellite point crosses (0, 0) at the middle of
  // the typical interval, which makes the slot sequence centrosymmetric.
  std::optional<double> initial_phase_rad;

  void validate() const;
};

struct GeoAngles {
  double theta = 0.0;  // elevation, [-pi/2, pi/2]
  double phi = 0.0;    // azimuth, (-pi, pi]
};

/// Orthonormal 3x3 change of basis.
class FrameTransform {
 public:
  FrameTransform() : m_(Mat3::Identity()) {}
  explicit FrameTransform(const Mat3& m) : m_(m) {}

  const Mat3& matrix() const noexcept { return m_; }

  /// ||M^T M - I||_F.
  double orthonormality_residual() const;

  Vec3 to_parent(const Vec3& local, const Vec3& origin) const { return m_ * local + origin; }
  Vec3 to_local(const Vec3& parent, const Vec3& origin) const {
    return m_.transpose() * (parent - origin);
  }

 private:
  Mat3 m_;
};

struct SlotGeometry {
  int index = 1;  // 1-based
  double time_s = 0.0;
  double alpha = 0.0;
  double radius_m = 0.0;
  double inclination = 0.0;
  GeoAngles angles;
  Vec3 p_leo = Vec3::Zero();
  FrameTransform ta;  // SCCS -> GCCS
};

struct LeoFix {
  GeoAngles angles;
  Vec3 position;
};

/// 2*pi*sqrt((Re + Hs)^3 / (Ge*Me)). Throws DomainError on a non-positive radicand.
double orbital_period(const EarthModel& earth, double altitude_m);

/// t_m = (m - 1/2) T / M for m = 1..M.
std::vector<double> slot_times(double interval_s, int slots);

/// alpha0 + 2*pi*t/Ts wrapped into (-pi, pi].
double traversed_angle(double t_s, double period_s, double alpha0);

/// Wraps any angle into (-pi, pi].
double wrap_angle(double a);

/// Position on the inclined circular orbit after traversing alpha.
LeoFix leo_position(double alpha, double inclination, double radius_m);

/// R * [cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)].
Vec3 spherical_to_cartesian(const GeoAngles& a, double radius_m);
GeoAngles cartesian_to_spherical(const Vec3& p);

/// Transition matrix from SCCS to GCCS for a satellite at angles `at` on an
/// orbit of the given inclination.
FrameTransform sccs_to_gccs(double inclination, const GeoAngles& at);
FrameTransform sccs_to_gccs(const SlotGeometry& slot);

/// ENU -> GCCS rotation at a receiver; third column is the local radial unit vector.
FrameTransform enu_frame(const GeoAngles& receiver);

/// Central angle between two points on the sphere.
double great_circle_angle(const GeoAngles& a, const GeoAngles& b);

struct CoverageGrid {
  std::vector<GeoAngles> centers;
  int lon_cells = 0;
  int lat_cells = 0;

  std::size_t size() const noexcept { return centers.size(); }
  bool empty() const noexcept { return centers.empty(); }
};

/// Divides longitude into `lon_cells` and latitude into `lat_cells` equal
/// bands and keeps the cell centres within `angular_radius` of `center`.
CoverageGrid build_coverage_grid(const GeoAngles& center, double angular_radius, int lon_cells,
                                 int lat_cells);

/// Default orbit phase: the satellite crosses (0,0) at t = T/2.
double centered_initial_phase(double interval_s, double period_s);

/// Full slot sequence for one typical interval T = Ts/Ks.
std::vector<SlotGeometry> build_slots(const EarthModel& earth, const OrbitConfig& orbit);

}  // namespace maleo
