// Movable-antenna (MA) transmit layout, receive UPA layout, steering vectors
// and their derivatives with respect to a ground receiver's angles, path loss,
// and transmit waveform synthesis.
#pragma once

#include "maleo/geometry.hpp"
#include "maleo/types.hpp"

#include <cstdint>
#include <vector>

namespace maleo {

enum class PathlossConvention {
  AsPrinted,  // G_LEO G_CE (4 pi / lambda)^2 d^-gamma
  Friis,      // G_LEO G_CE (lambda / 4 pi)^2 d^-gamma
};

enum class SteeringConvention {
  UnitDirection,  // exponent uses (p - p_LEO) / ||p - p_LEO||
  AsPrinted,      // exponent uses (p - p_LEO) / ||p - p_LEO||^2 (dimensionally inconsistent)
};

struct Region2 {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= x_min - tol && p.x() <= x_max + tol && p.y() >= y_min - tol &&
           p.y() <= y_max + tol;
  }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

/// Positions of the N_t movable antennas in the SCCS x-y plane, plus the
/// physical constraints the positions live under.
struct MaLayout {
  std::vector<Vec2> q;
  Region2 region;
  double d_min = 0.0;
  double v_max = 0.0;

  int size() const noexcept { return static_cast<int>(q.size()); }

  /// [x_1, y_1, x_2, y_2, ...]
  Vec flat() const;
  MaLayout with_flat(const Vec& flat) const;

  bool in_region(double tol = 0.0) const;
  double min_spacing() const;
  /// max_n ||q_n - other.q_n||
  double max_displacement(const MaLayout& other) const;
};

/// Near-square rows x cols grid (rows * cols == count) centred on the origin.
std::vector<Vec2> planar_grid(int count, double spacing);

/// Receive UPA in the local East-North plane of a ground station.
struct UpaLayout {
  std::vector<Vec3> q;
  double spacing = 0.0;

  int size() const noexcept { return static_cast<int>(q.size()); }
  static UpaLayout east_north_grid(int count, double spacing);
};

struct WaveformConfig {
  double wavelength_m = 0.15;
  int samples = 1024;
  double pathloss_exponent = 2.0;
  double gain_leo_dbi = 16.0;
  double gain_ce_dbi = 3.0;
  PathlossConvention pathloss = PathlossConvention::AsPrinted;
  SteeringConvention steering = SteeringConvention::UnitDirection;

  void validate() const;
};

/// A ground receiver (sensing equipment) with its ENU frame and UPA.
struct ReceiveSite {
  GeoAngles angles;
  Vec3 position = Vec3::Zero();
  FrameTransform enu;
  UpaLayout upa;

  static ReceiveSite at(const GeoAngles& angles, double earth_radius_m, UpaLayout upa);
};

/// Phase-gradient vector v with a_m(p)[n] = exp(j v^T q_n): the 2-D in-plane
/// part of (2 pi / lambda) T_a^T dir(p).
Vec2 ma_phase_direction(const Vec3& target, const SlotGeometry& slot, double wavelength_m,
                        SteeringConvention conv = SteeringConvention::UnitDirection);

CVec ma_steering(const Vec3& target, const SlotGeometry& slot, const MaLayout& layout,
                 double wavelength_m, SteeringConvention conv = SteeringConvention::UnitDirection);

/// Steering vector of a site's UPA toward `source` (both in GCCS).
CVec upa_steering(const Vec3& source, const ReceiveSite& site, double wavelength_m);

struct SteeringDerivatives {
  CVec a;          // MA steering toward the site
  CVec da_dtheta;
  CVec da_dphi;
  CVec b;          // site UPA steering toward the satellite
  CVec db_dtheta;
  CVec db_dphi;
};

/// Analytic derivatives of a and b with respect to the site's (theta, phi),
/// chaining through p_SE(theta, phi) = R_e [cos cos, cos sin, sin]. The
/// site's ENU frame is held fixed.
SteeringDerivatives steering_angle_derivs(const ReceiveSite& site, double earth_radius_m,
                                          const SlotGeometry& slot, const MaLayout& layout,
                                          double wavelength_m,
                                          SteeringConvention conv = SteeringConvention::UnitDirection);

/// Same as above with the site at explicit angles (used by finite-difference checks).
SteeringDerivatives steering_angle_derivs(const GeoAngles& angles, const FrameTransform& enu,
                                          const UpaLayout& upa, double earth_radius_m,
                                          const SlotGeometry& slot, const MaLayout& layout,
                                          double wavelength_m,
                                          SteeringConvention conv = SteeringConvention::UnitDirection);

/// Link path loss rho. Throws DomainError unless d > 0.
double path_loss(double distance_m, const WaveformConfig& cfg);

struct WaveformSample {
  CMat samples;     // N_t x J
  CMat covariance;  // (1/J) X X^H
};

/// Draws X = Wc^{1/2} c + Rs^{1/2} s with unit-power circular Gaussian
/// symbols. Rejects non-PSD inputs.
WaveformSample synth_waveform(const CMat& wc, const CMat& rs, int samples, std::uint64_t seed);

/// Hermitian PSD square root via eigen-decomposition (negative eigenvalues clamped).
CMat psd_sqrt(const CMat& m);

/// Throws DomainError unless `m` is Hermitian (1e-10 relative) and PSD
/// (min eigenvalue >= -1e-8 * max(1, trace)).
void require_psd(const CMat& m, const char* what);

}  // namespace maleo
