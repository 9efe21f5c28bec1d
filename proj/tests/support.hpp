// Shared fixtures and independent oracles for the unit and acceptance tests.
#pragma once

#include "maleo/array_channel.hpp"
#include "maleo/geometry.hpp"
#include "maleo/metrics.hpp"
#include "maleo/scenario.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

namespace maleo::testing {

/// Desk-style scenario with the requested sizes. K sites are taken from the
/// front of the reference site list.
inline ScenarioConfig small_config(int n_t, int n_r, int k, int slots) {
  ScenarioConfig c = desk_defaults();
  c.array.n_tx = n_t;
  c.array.n_rx = n_r;
  c.orbit.slots = slots;
  const ScenarioConfig p = paper_defaults();
  c.sensing.sites.assign(p.sensing.sites.begin(), p.sensing.sites.begin() + k);
  return c;
}

inline Scenario small_scenario(int n_t, int n_r, int k, int slots) {
  return build_scenario(small_config(n_t, n_r, k, slots));
}

inline CMat random_psd(int n, std::mt19937_64& rng, double trace = 1.0) {
  std::normal_distribution<double> g;
  CMat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  }
  CMat m = a * a.adjoint();
  return m * (trace / m.trace().real());
}

/// Random layout in the region; points are redrawn until they respect d_min.
inline MaLayout random_layout(const MaLayout& like, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(like.region.x_min, like.region.x_max);
  std::uniform_real_distribution<double> uy(like.region.y_min, like.region.y_max);
  MaLayout out = like;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (auto& p : out.q) p = Vec2(ux(rng), uy(rng));
    if (out.size() < 2 || out.min_spacing() >= out.d_min) return out;
  }
  return like;
}

/// FIM of xi = (Theta, Phi, Re alpha, Im alpha) from the definition
/// J_ij = (2J/sigma^2) Re Tr(dM/dxi_j Rx dM^H/dxi_i), M = alpha b a^T, with
/// the angle derivatives of M taken by central differences of the steering
/// vectors (receiver frame held fixed).
inline Mat4 fd_fim(const SensingTarget& t, const SensingScene& scene, const SlotGeometry& slot,
                   const MaLayout& layout, const CMat& rx, double h = 1e-6) {
  auto mean_map = [&](const GeoAngles& ang, cplx alpha) {
    const SteeringDerivatives d =
        steering_angle_derivs(ang, t.site.enu, t.site.upa, scene.earth_radius_m, slot, layout,
                              scene.wavelength_m, scene.steering);
    return CMat(alpha * d.b * d.a.transpose());
  };
  const GeoAngles a0 = t.site.angles;
  std::array<CMat, 4> dm;
  for (int p = 0; p < 2; ++p) {
    GeoAngles plus = a0, minus = a0;
    (p == 0 ? plus.theta : plus.phi) += h;
    (p == 0 ? minus.theta : minus.phi) -= h;
    dm[static_cast<std::size_t>(p)] =
        (mean_map(plus, t.amplitude) - mean_map(minus, t.amplitude)) / (2.0 * h);
  }
  dm[2] = mean_map(a0, 1.0);
  dm[3] = mean_map(a0, cplx(0.0, 1.0));
  const double scale = 2.0 * scene.samples / t.noise_power;
  Mat4 j;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      j(r, c) = scale * (dm[static_cast<std::size_t>(c)] * rx *
                         dm[static_cast<std::size_t>(r)].adjoint())
                            .trace()
                            .real();
    }
  }
  return j;
}

inline double det3(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Inverse through the classical adjugate (cofactor expansion).
inline Mat4 adjugate_inverse(const Mat4& m) {
  Mat4 cof;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      Mat3 minor;
      for (int i = 0, mi = 0; i < 4; ++i) {
        if (i == r) continue;
        for (int k = 0, mk = 0; k < 4; ++k) {
          if (k == c) continue;
          minor(mi, mk++) = m(i, k);
        }
        ++mi;
      }
      cof(r, c) = ((r + c) % 2 == 0 ? 1.0 : -1.0) * det3(minor);
    }
  }
  double det = 0.0;
  for (int c = 0; c < 4; ++c) det += m(0, c) * cof(0, c);
  return cof.transpose() / det;
}

/// Largest entry error after symmetric diagonal equilibration.
inline double equilibrated_error(const Mat4& a, const Mat4& b) {
  double e = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double s = std::sqrt(std::abs(b(r, r) * b(c, c)));
      e = std::max(e, std::abs(a(r, c) - b(r, c)) / (s > 0.0 ? s : 1.0));
    }
  }
  return e;
}

inline double rel(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace maleo::testing
