// Communication SINR, angle-domain Fisher information and the squared
// position error bound (SPEB) of each sensing receiver.
#pragma once

#include "maleo/array_channel.hpp"
#include "maleo/geometry.hpp"
#include "maleo/types.hpp"

#include <optional>
#include <vector>

namespace maleo {

/// Transmit covariance split into its communication and sensing parts.
struct TxCovariance {
  CMat wc;
  CMat rs;
  /// Set when Wc = w w^H is known exactly (after rank-1 recovery).
  std::optional<CVec> w;

  CMat rx() const { return wc + rs; }
  int size() const noexcept { return static_cast<int>(wc.rows()); }

  /// Hermitian/PSD/dimension checks; throws DomainError.
  void validate() const;

  static TxCovariance zero(int n);
  static TxCovariance from_beam(const CVec& w, const CMat& rs);
};

/// A communication receiver at a coverage-grid centre.
struct CommTarget {
  Vec3 position = Vec3::Zero();
  double noise_power = 1e-14;  // W
  double threshold = 1.0;      // linear SINR target; <= 0 disables the constraint
};

struct CommLink {
  CVec a;      // MA steering toward the target
  double rho;  // path loss
};

CommLink comm_link(const CommTarget& ce, const SlotGeometry& slot, const MaLayout& layout,
                   const WaveformConfig& wf);

/// rho a^T Wc a* / (rho a^T Rs a* + sigma^2), matrix form.
double sinr(const CVec& a, double rho, double noise_power, const CMat& wc, const CMat& rs);
/// rho |a^T w|^2 / (rho a^T Rs a* + sigma^2), beam form.
double sinr(const CVec& a, double rho, double noise_power, const CVec& w, const CMat& rs);
/// Uses the beam form when cov.w is set.
double sinr(const CommLink& link, double noise_power, const TxCovariance& cov);

struct SinrReport {
  std::vector<double> sinr;
  std::vector<double> threshold;
  std::vector<bool> satisfied;

  bool all_satisfied() const;
  /// Smallest sinr/threshold in dB over the active constraints (+inf if none).
  double worst_margin_db() const;
};

/// `tol_db` widens each threshold when deciding `satisfied`.
SinrReport evaluate_sinr(const std::vector<CommTarget>& ces, const SlotGeometry& slot,
                         const MaLayout& layout, const TxCovariance& cov,
                         const WaveformConfig& wf, double tol_db = 0.0);

/// One sensing receiver in one slot.
struct SensingTarget {
  ReceiveSite site;
  cplx amplitude{1.0, 0.0};
  double noise_power = 1e-14;  // W
};

struct SensingScene {
  std::vector<SensingTarget> targets;
  int samples = 1024;
  double earth_radius_m = 6.371e6;
  double wavelength_m = 0.15;
  SteeringConvention steering = SteeringConvention::UnitDirection;
};

enum class AngleParam { Theta = 0, Phi = 1 };

/// J_pq = (2|alpha|^2 J / sigma^2) Re Tr(D_q Rx D_p^H), D_q = db/dq a^T + b da^T/dq.
double fim_angle_entry(AngleParam p, AngleParam q, const SteeringDerivatives& d, cplx alpha,
                       double noise_power, int samples, const CMat& rx);
Mat2 fim_angle_block(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                     const CMat& rx);
/// Rows (Theta, Phi), columns (Re alpha, Im alpha).
Mat2 fim_cross_block(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                     const CMat& rx);
/// (2J/sigma^2) (a^T Rx a*) |b|^2 I_2.
Mat2 fim_alpha_block(const SteeringDerivatives& d, double noise_power, int samples,
                     const CMat& rx);
/// 4x4 FIM for xi = (Theta, Phi, Re alpha, Im alpha).
Mat4 assemble_fim(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                  const CMat& rx);

/// [dp/dTheta, dp/dPhi, 0, 0] for p = R_e [cos cos, cos sin, sin].
Mat34 xi_transform(const GeoAngles& angles, double earth_radius_m);

/// Tr(Xi J^-1 Xi^T) through a symmetric solve. Throws SingularFimError when
/// the diagonally equilibrated J has condition number above 1e12 or a
/// non-positive eigenvalue.
double speb(const Mat4& j_xi, const Mat34& xi);

struct FimBundle {
  Mat4 j_xi = Mat4::Zero();
  Mat34 xi = Mat34::Zero();
  double speb = 0.0;

  double peb() const { return std::sqrt(speb); }
};

SteeringDerivatives target_derivatives(const SensingTarget& t, const SensingScene& scene,
                                       const SlotGeometry& slot, const MaLayout& layout);

FimBundle evaluate_fim(const SensingTarget& t, const SensingScene& scene,
                       const SlotGeometry& slot, const MaLayout& layout, const CMat& rx);

std::vector<FimBundle> evaluate_scene(const SensingScene& scene, const SlotGeometry& slot,
                                      const MaLayout& layout, const CMat& rx);

double sum_speb(const std::vector<FimBundle>& bundles);

/// Sum of SPEBs for (layout, rx): the per-slot objective.
double scene_objective(const SensingScene& scene, const SlotGeometry& slot,
                       const MaLayout& layout, const CMat& rx);

}  // namespace maleo
