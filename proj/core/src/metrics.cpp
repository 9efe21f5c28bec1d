#include "maleo/metrics.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maleo {

namespace {

constexpr double kMaxFimCondition = 1e12;

CMat d_matrix(const SteeringDerivatives& d, AngleParam p) {
  const CVec& db = p == AngleParam::Theta ? d.db_dtheta : d.db_dphi;
  const CVec& da = p == AngleParam::Theta ? d.da_dtheta : d.da_dphi;
  return db * d.a.transpose() + d.b * da.transpose();
}

void check_noise(double noise_power) {
  if (!(noise_power > 0.0)) throw DomainError("noise power must be positive");
}

}  // namespace

void TxCovariance::validate() const {
  if (wc.rows() != rs.rows() || wc.cols() != rs.cols()) {
    throw DomainError("TxCovariance: Wc and Rs dimensions differ");
  }
  require_psd(wc, "TxCovariance(Wc)");
  require_psd(rs, "TxCovariance(Rs)");
  if (w && w->size() != wc.rows()) throw DomainError("TxCovariance: beam size mismatch");
}

TxCovariance TxCovariance::zero(int n) {
  return TxCovariance{CMat::Zero(n, n), CMat::Zero(n, n), std::nullopt};
}

TxCovariance TxCovariance::from_beam(const CVec& w, const CMat& rs) {
  return TxCovariance{w * w.adjoint(), rs, w};
}

CommLink comm_link(const CommTarget& ce, const SlotGeometry& slot, const MaLayout& layout,
                   const WaveformConfig& wf) {
  CommLink link;
  link.a = ma_steering(ce.position, slot, layout, wf.wavelength_m, wf.steering);
  link.rho = path_loss((ce.position - slot.p_leo).norm(), wf);
  return link;
}

double sinr(const CVec& a, double rho, double noise_power, const CMat& wc, const CMat& rs) {
  check_noise(noise_power);
  const CVec ac = a.conjugate();
  const double signal = (a.transpose() * wc * ac).value().real();
  const double interference = (a.transpose() * rs * ac).value().real();
  return std::max(0.0, rho * signal) / (std::max(0.0, rho * interference) + noise_power);
}

double sinr(const CVec& a, double rho, double noise_power, const CVec& w, const CMat& rs) {
  check_noise(noise_power);
  const double signal = std::norm(a.dot(w.conjugate()));
  const double interference = (a.transpose() * rs * a.conjugate()).value().real();
  return rho * signal / (std::max(0.0, rho * interference) + noise_power);
}

double sinr(const CommLink& link, double noise_power, const TxCovariance& cov) {
  if (cov.w) return sinr(link.a, link.rho, noise_power, *cov.w, cov.rs);
  return sinr(link.a, link.rho, noise_power, cov.wc, cov.rs);
}

bool SinrReport::all_satisfied() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](bool b) { return b; });
}

double SinrReport::worst_margin_db() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < sinr.size(); ++l) {
    if (threshold[l] <= 0.0) continue;
    const double m = sinr[l] > 0.0 ? linear_to_db(sinr[l] / threshold[l])
                                   : -std::numeric_limits<double>::infinity();
    worst = std::min(worst, m);
  }
  return worst;
}

SinrReport evaluate_sinr(const std::vector<CommTarget>& ces, const SlotGeometry& slot,
                         const MaLayout& layout, const TxCovariance& cov,
                         const WaveformConfig& wf, double tol_db) {
  SinrReport r;
  for (const auto& ce : ces) {
    const double g = sinr(comm_link(ce, slot, layout, wf), ce.noise_power, cov);
    r.sinr.push_back(g);
    r.threshold.push_back(ce.threshold);
    r.satisfied.push_back(ce.threshold <= 0.0 || g >= ce.threshold * db_to_linear(-tol_db));
  }
  return r;
}

double fim_angle_entry(AngleParam p, AngleParam q, const SteeringDerivatives& d, cplx alpha,
                       double noise_power, int samples, const CMat& rx) {
  check_noise(noise_power);
  const CMat dq = d_matrix(d, q);
  const CMat dp = d_matrix(d, p);
  const double tr = (dq * rx * dp.adjoint()).trace().real();
  return 2.0 * std::norm(alpha) * samples / noise_power * tr;
}

Mat2 fim_angle_block(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                     const CMat& rx) {
  check_noise(noise_power);
  const CMat dt = d_matrix(d, AngleParam::Theta);
  const CMat dp = d_matrix(d, AngleParam::Phi);
  const CMat rdt = rx * dt.adjoint();
  const CMat rdp = rx * dp.adjoint();
  const double c = 2.0 * std::norm(alpha) * samples / noise_power;
  Mat2 j;
  j(0, 0) = c * (dt.cwiseProduct(rdt.transpose())).sum().real();
  j(1, 1) = c * (dp.cwiseProduct(rdp.transpose())).sum().real();
  // Re Tr(D_Phi Rx D_Theta^H) == Re Tr(D_Theta Rx D_Phi^H) for Hermitian Rx.
  j(0, 1) = c * (dp.cwiseProduct(rdt.transpose())).sum().real();
  j(1, 0) = j(0, 1);
  return j;
}

Mat2 fim_cross_block(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                     const CMat& rx) {
  check_noise(noise_power);
  const CMat m = d.b * (d.a.transpose() * rx);  // b a^T Rx
  const double c = 2.0 * samples / noise_power;
  Mat2 j;
  for (int r = 0; r < 2; ++r) {
    const CMat dp = d_matrix(d, r == 0 ? AngleParam::Theta : AngleParam::Phi);
    const cplx t = std::conj(alpha) * (m.cwiseProduct(dp.conjugate())).sum();
    j(r, 0) = c * t.real();
    j(r, 1) = c * (cplx(0.0, 1.0) * t).real();
  }
  return j;
}

Mat2 fim_alpha_block(const SteeringDerivatives& d, double noise_power, int samples,
                     const CMat& rx) {
  check_noise(noise_power);
  const double quad = (d.a.transpose() * rx * d.a.conjugate()).value().real();
  return (2.0 * samples / noise_power * quad * d.b.squaredNorm()) * Mat2::Identity();
}

Mat4 assemble_fim(const SteeringDerivatives& d, cplx alpha, double noise_power, int samples,
                  const CMat& rx) {
  Mat4 j;
  const Mat2 cross = fim_cross_block(d, alpha, noise_power, samples, rx);
  j.topLeftCorner<2, 2>() = fim_angle_block(d, alpha, noise_power, samples, rx);
  j.topRightCorner<2, 2>() = cross;
  j.bottomLeftCorner<2, 2>() = cross.transpose();
  j.bottomRightCorner<2, 2>() = fim_alpha_block(d, noise_power, samples, rx);
  return j;
}

Mat34 xi_transform(const GeoAngles& a, double earth_radius_m) {
  const double st = std::sin(a.theta), ct = std::cos(a.theta);
  const double sp = std::sin(a.phi), cp = std::cos(a.phi);
  Mat34 xi = Mat34::Zero();
  xi.col(0) = earth_radius_m * Vec3(-st * cp, -st * sp, ct);
  xi.col(1) = earth_radius_m * Vec3(-ct * sp, ct * cp, 0.0);
  return xi;
}

double speb(const Mat4& j_xi, const Mat34& xi) {
  const Eigen::Vector4d diag = j_xi.diagonal();
  if (!(diag.minCoeff() > 0.0) || !j_xi.allFinite()) {
    throw SingularFimError(diag.minCoeff(), std::numeric_limits<double>::infinity());
  }
  const Eigen::Vector4d s = diag.cwiseSqrt().cwiseInverse();
  const Mat4 k = s.asDiagonal() * j_xi * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat4> es(k, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxFimCondition) {
    Eigen::SelfAdjointEigenSolver<Mat4> raw(j_xi, Eigen::EigenvaluesOnly);
    throw SingularFimError(raw.eigenvalues().minCoeff(),
                           lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  }
  // J^-1 = S K^-1 S with S = diag(s).
  const Eigen::Matrix<double, 4, 3> rhs = s.asDiagonal() * xi.transpose();
  const Eigen::Matrix<double, 4, 3> sol = k.ldlt().solve(rhs);
  return (rhs.transpose() * sol).trace();
}

SteeringDerivatives target_derivatives(const SensingTarget& t, const SensingScene& scene,
                                       const SlotGeometry& slot, const MaLayout& layout) {
  return steering_angle_derivs(t.site, scene.earth_radius_m, slot, layout, scene.wavelength_m,
                               scene.steering);
}

FimBundle evaluate_fim(const SensingTarget& t, const SensingScene& scene,
                       const SlotGeometry& slot, const MaLayout& layout, const CMat& rx) {
  FimBundle f;
  const SteeringDerivatives d = target_derivatives(t, scene, slot, layout);
  f.j_xi = assemble_fim(d, t.amplitude, t.noise_power, scene.samples, rx);
  f.xi = xi_transform(t.site.angles, scene.earth_radius_m);
  f.speb = speb(f.j_xi, f.xi);
  return f;
}

std::vector<FimBundle> evaluate_scene(const SensingScene& scene, const SlotGeometry& slot,
                                      const MaLayout& layout, const CMat& rx) {
  std::vector<FimBundle> out;
  out.reserve(scene.targets.size());
  for (const auto& t : scene.targets) out.push_back(evaluate_fim(t, scene, slot, layout, rx));
  return out;
}

double sum_speb(const std::vector<FimBundle>& bundles) {
  double s = 0.0;
  for (const auto& b : bundles) s += b.speb;
  return s;
}

double scene_objective(const SensingScene& scene, const SlotGeometry& slot,
                       const MaLayout& layout, const CMat& rx) {
  return sum_speb(evaluate_scene(scene, slot, layout, rx));
}

}  // namespace maleo
