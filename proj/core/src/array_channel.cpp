#include "maleo/array_channel.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace maleo {

namespace {

constexpr cplx kJ{0.0, 1.0};

// Direction map and its Jacobian w.r.t. the endpoint p.
struct Direction {
  Vec3 dir;
  Mat3 jacobian;
};

Direction direction_to(const Vec3& from, const Vec3& to, SteeringConvention conv) {
  const Vec3 diff = to - from;
  const double d = diff.norm();
  if (!(d > 0.0)) throw DomainError("steering: coincident points");
  const Vec3 u = diff / d;
  if (conv == SteeringConvention::UnitDirection) {
    return {u, (Mat3::Identity() - u * u.transpose()) / d};
  }
  return {diff / (d * d), (Mat3::Identity() - 2.0 * u * u.transpose()) / (d * d)};
}

CVec phases_to_steering(const Vec& phase) {
  CVec v(phase.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) v[i] = std::polar(1.0, phase[i]);
  return v;
}

}  // namespace

Vec MaLayout::flat() const {
  Vec f(2 * q.size());
  for (std::size_t n = 0; n < q.size(); ++n) {
    f[2 * n] = q[n].x();
    f[2 * n + 1] = q[n].y();
  }
  return f;
}

MaLayout MaLayout::with_flat(const Vec& f) const {
  if (f.size() != 2 * static_cast<Eigen::Index>(q.size())) {
    throw DomainError("MaLayout::with_flat: size mismatch");
  }
  MaLayout out = *this;
  for (std::size_t n = 0; n < q.size(); ++n) out.q[n] = Vec2(f[2 * n], f[2 * n + 1]);
  return out;
}

bool MaLayout::in_region(double tol) const {
  return std::all_of(q.begin(), q.end(), [&](const Vec2& p) { return region.contains(p, tol); });
}

double MaLayout::min_spacing() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) best = std::min(best, (q[i] - q[j]).norm());
  }
  return best;
}

double MaLayout::max_displacement(const MaLayout& other) const {
  if (other.q.size() != q.size()) throw DomainError("max_displacement: size mismatch");
  double worst = 0.0;
  for (std::size_t n = 0; n < q.size(); ++n) worst = std::max(worst, (q[n] - other.q[n]).norm());
  return worst;
}

std::vector<Vec2> planar_grid(int count, double spacing) {
  if (count < 1) throw DomainError("planar_grid: count must be >= 1");
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(count))));
  while (count % rows != 0) --rows;
  const int cols = count / rows;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      pts.emplace_back((c - 0.5 * (cols - 1)) * spacing, (r - 0.5 * (rows - 1)) * spacing);
    }
  }
  return pts;
}

UpaLayout UpaLayout::east_north_grid(int count, double spacing) {
  UpaLayout upa;
  upa.spacing = spacing;
  for (const Vec2& p : planar_grid(count, spacing)) upa.q.emplace_back(p.x(), p.y(), 0.0);
  return upa;
}

void WaveformConfig::validate() const {
  if (!(wavelength_m > 0.0)) throw DomainError("WaveformConfig: wavelength must be positive");
  if (samples < 1) throw DomainError("WaveformConfig: sample count must be >= 1");
}

ReceiveSite ReceiveSite::at(const GeoAngles& angles, double earth_radius_m, UpaLayout upa) {
  ReceiveSite s;
  s.angles = angles;
  s.position = spherical_to_cartesian(angles, earth_radius_m);
  s.enu = enu_frame(angles);
  s.upa = std::move(upa);
  return s;
}

Vec2 ma_phase_direction(const Vec3& target, const SlotGeometry& slot, double wavelength_m,
                        SteeringConvention conv) {
  const Direction d = direction_to(slot.p_leo, target, conv);
  const Vec3 local = slot.ta.matrix().transpose() * d.dir;
  return (kTwoPi / wavelength_m) * local.head<2>();
}

CVec ma_steering(const Vec3& target, const SlotGeometry& slot, const MaLayout& layout,
                 double wavelength_m, SteeringConvention conv) {
  const Vec2 v = ma_phase_direction(target, slot, wavelength_m, conv);
  Vec phase(layout.size());
  for (int n = 0; n < layout.size(); ++n) phase[n] = v.dot(layout.q[static_cast<std::size_t>(n)]);
  return phases_to_steering(phase);
}

CVec upa_steering(const Vec3& source, const ReceiveSite& site, double wavelength_m) {
  const Direction d = direction_to(site.position, source, SteeringConvention::UnitDirection);
  const Vec3 local = (kTwoPi / wavelength_m) * site.enu.matrix().transpose() * d.dir;
  Vec phase(site.upa.size());
  for (int n = 0; n < site.upa.size(); ++n) {
    phase[n] = local.dot(site.upa.q[static_cast<std::size_t>(n)]);
  }
  return phases_to_steering(phase);
}

SteeringDerivatives steering_angle_derivs(const ReceiveSite& site, double earth_radius_m,
                                          const SlotGeometry& slot, const MaLayout& layout,
                                          double wavelength_m, SteeringConvention conv) {
  return steering_angle_derivs(site.angles, site.enu, site.upa, earth_radius_m, slot, layout,
                               wavelength_m, conv);
}

SteeringDerivatives steering_angle_derivs(const GeoAngles& angles, const FrameTransform& enu,
                                          const UpaLayout& upa, double earth_radius_m,
                                          const SlotGeometry& slot, const MaLayout& layout,
                                          double wavelength_m, SteeringConvention conv) {
  const double k = kTwoPi / wavelength_m;
  const Vec3 p_se = spherical_to_cartesian(angles, earth_radius_m);
  const double st = std::sin(angles.theta), ct = std::cos(angles.theta);
  const double sp = std::sin(angles.phi), cp = std::cos(angles.phi);
  const Vec3 dp_dtheta = earth_radius_m * Vec3(-st * cp, -st * sp, ct);
  const Vec3 dp_dphi = earth_radius_m * Vec3(-ct * sp, ct * cp, 0.0);

  SteeringDerivatives out;

  // Transmit side: phase_n = k dir(p_se)^T T_a [q_n; 0].
  {
    const Direction d = direction_to(slot.p_leo, p_se, conv);
    const Vec3 local = slot.ta.matrix().transpose() * d.dir;
    const Vec3 g_theta = slot.ta.matrix().transpose() * (d.jacobian * dp_dtheta);
    const Vec3 g_phi = slot.ta.matrix().transpose() * (d.jacobian * dp_dphi);
    const int n_t = layout.size();
    out.a.resize(n_t);
    out.da_dtheta.resize(n_t);
    out.da_dphi.resize(n_t);
    for (int n = 0; n < n_t; ++n) {
      const Vec2& q = layout.q[static_cast<std::size_t>(n)];
      const cplx an = std::polar(1.0, k * local.head<2>().dot(q));
      out.a[n] = an;
      out.da_dtheta[n] = kJ * an * (k * g_theta.head<2>().dot(q));
      out.da_dphi[n] = kJ * an * (k * g_phi.head<2>().dot(q));
    }
  }

  // Receive side: phase = k dir_{se->leo}^T T_b q~, and d dir / d p_se = -J.
  {
    const Direction d = direction_to(p_se, slot.p_leo, SteeringConvention::UnitDirection);
    const Mat3& tb = enu.matrix();
    const Vec3 local = tb.transpose() * d.dir;
    const Vec3 g_theta = -(tb.transpose() * (d.jacobian * dp_dtheta));
    const Vec3 g_phi = -(tb.transpose() * (d.jacobian * dp_dphi));
    const int n_r = upa.size();
    out.b.resize(n_r);
    out.db_dtheta.resize(n_r);
    out.db_dphi.resize(n_r);
    for (int n = 0; n < n_r; ++n) {
      const Vec3& q = upa.q[static_cast<std::size_t>(n)];
      const cplx bn = std::polar(1.0, k * local.dot(q));
      out.b[n] = bn;
      out.db_dtheta[n] = kJ * bn * (k * g_theta.dot(q));
      out.db_dphi[n] = kJ * bn * (k * g_phi.dot(q));
    }
  }
  return out;
}

double path_loss(double distance_m, const WaveformConfig& cfg) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss: distance must be positive");
  const double gains = db_to_linear(cfg.gain_leo_dbi) * db_to_linear(cfg.gain_ce_dbi);
  const double ratio = 4.0 * kPi / cfg.wavelength_m;
  const double factor = cfg.pathloss == PathlossConvention::AsPrinted ? ratio * ratio
                                                                      : 1.0 / (ratio * ratio);
  return gains * factor * std::pow(distance_m, -cfg.pathloss_exponent);
}

void require_psd(const CMat& m, const char* what) {
  if (m.rows() != m.cols()) throw DomainError(std::string(what) + ": matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError(std::string(what) + ": matrix not Hermitian");
  }
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  const double trace = std::abs(m.trace().real());
  if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, trace)) {
    throw DomainError(std::string(what) + ": matrix not positive semidefinite");
  }
}

CMat psd_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const Vec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

WaveformSample synth_waveform(const CMat& wc, const CMat& rs, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("synth_waveform: sample count must be >= 1");
  if (wc.rows() != rs.rows() || wc.cols() != rs.cols()) {
    throw DomainError("synth_waveform: Wc and Rs dimensions differ");
  }
  require_psd(wc, "synth_waveform(Wc)");
  require_psd(rs, "synth_waveform(Rs)");
  const Eigen::Index n = wc.rows();
  const CMat wc_half = psd_sqrt(wc);
  const CMat rs_half = psd_sqrt(rs);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    CMat z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = cplx(normal(rng), normal(rng));
    }
    return z;
  };
  WaveformSample out;
  out.samples = wc_half * draw(n, samples) + rs_half * draw(n, samples);
  out.covariance = out.samples * out.samples.adjoint() / static_cast<double>(samples);
  return out;
}

}  // namespace maleo
