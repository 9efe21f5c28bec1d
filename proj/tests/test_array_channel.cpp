#include "maleo/array_channel.hpp"
#include "maleo/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maleo;
using maleo::testing::small_scenario;

namespace {

constexpr double kLambda = 0.15;

SlotGeometry some_slot() { return small_scenario(4, 4, 1, 3).slots[0]; }

MaLayout layout_of(std::vector<Vec2> q) {
  MaLayout l;
  l.q = std::move(q);
  l.region = {-1, 1, -1, 1};
  l.d_min = kLambda / 2;
  return l;
}

double max_rel_diff(const CVec& a, const CVec& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST(MaSteering, CollocatedAntennasGiveOnes) {
  const SlotGeometry s = some_slot();
  const CVec a = ma_steering(Vec3(6.371e6, 1e4, 0), s, layout_of({{0, 0}, {0, 0}, {0, 0}}), kLambda);
  EXPECT_LE((a - CVec::Ones(3)).norm(), 1e-14);
}

TEST(MaSteering, UnitModulus) {
  std::mt19937_64 rng(5);
  const Scenario sc = small_scenario(8, 4, 2, 4);
  for (const auto& slot : sc.slots) {
    const MaLayout l = maleo::testing::random_layout(sc.q0, rng);
    for (const auto& site : sc.sites) {
      const CVec a = ma_steering(site.position, slot, l, kLambda);
      for (int n = 0; n < a.size(); ++n) EXPECT_NEAR(std::abs(a[n]), 1.0, 1e-12);
    }
  }
}

TEST(MaSteering, HalfWavelengthAlongSccsXGivesPi) {
  const SlotGeometry s = some_slot();
  const Vec3 target = s.p_leo + 1e5 * s.ta.matrix().col(0);
  const CVec a = ma_steering(target, s, layout_of({{0, 0}, {kLambda / 2, 0}}), kLambda);
  EXPECT_NEAR(std::abs(std::arg(a[1] / a[0])), kPi, 1e-9);
}

TEST(MaSteering, CoincidentPointsRejected) {
  const SlotGeometry s = some_slot();
  EXPECT_THROW(ma_steering(s.p_leo, s, layout_of({{0, 0}}), kLambda), DomainError);
}

TEST(UpaSteering, BroadsideAndConjugateMirror) {
  const Scenario sc = small_scenario(4, 4, 1, 1);
  const ReceiveSite& site = sc.sites[0];
  const Mat3 enu = site.enu.matrix();
  const CVec zen = upa_steering(site.position + 5e5 * enu.col(2), site, kLambda);
  EXPECT_LE((zen - CVec::Ones(zen.size())).norm(), 1e-9);

  const Vec3 d1 = 0.3 * enu.col(0) + 0.2 * enu.col(1) + 0.9 * enu.col(2);
  const Vec3 d2 = -0.3 * enu.col(0) - 0.2 * enu.col(1) + 0.9 * enu.col(2);
  const CVec b1 = upa_steering(site.position + 5e5 * d1, site, kLambda);
  const CVec b2 = upa_steering(site.position + 5e5 * d2, site, kLambda);
  EXPECT_LE((b1 - b2.conjugate()).norm(), 1e-9);
  for (int n = 0; n < b1.size(); ++n) EXPECT_NEAR(std::abs(b1[n]), 1.0, 1e-12);
}

TEST(SteeringDerivatives, ZeroLayoutHasZeroMaDerivative) {
  const Scenario sc = small_scenario(4, 4, 1, 2);
  const auto d = steering_angle_derivs(sc.sites[0], sc.config.earth.radius_m, sc.slots[0],
                                       layout_of({{0, 0}, {0, 0}}), kLambda);
  EXPECT_LE(d.da_dtheta.norm(), 1e-15);
  EXPECT_LE(d.da_dphi.norm(), 1e-15);
}

TEST(SteeringDerivatives, MatchCentralDifferences) {
  std::mt19937_64 rng(17);
  const Scenario sc = small_scenario(8, 4, 2, 4);
  const double re = sc.config.earth.radius_m;
  const double h = 1e-7;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SlotGeometry& slot = sc.slots[static_cast<std::size_t>(trial) % sc.slots.size()];
    const ReceiveSite& site = sc.sites[static_cast<std::size_t>(trial) % sc.sites.size()];
    const MaLayout l = maleo::testing::random_layout(sc.q0, rng);
    const auto d = steering_angle_derivs(site, re, slot, l, kLambda);
    auto at = [&](double dt, double dp) {
      return steering_angle_derivs(GeoAngles{site.angles.theta + dt, site.angles.phi + dp},
                                   site.enu, site.upa, re, slot, l, kLambda);
    };
    const auto tp = at(h, 0), tm = at(-h, 0), pp = at(0, h), pm = at(0, -h);
    EXPECT_LE(max_rel_diff(d.da_dtheta, (tp.a - tm.a) / (2 * h)), 1e-5);
    EXPECT_LE(max_rel_diff(d.da_dphi, (pp.a - pm.a) / (2 * h)), 1e-5);
    EXPECT_LE(max_rel_diff(d.db_dtheta, (tp.b - tm.b) / (2 * h)), 1e-5);
    EXPECT_LE(max_rel_diff(d.db_dphi, (pp.b - pm.b) / (2 * h)), 1e-5);
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(SteeringDerivatives, ScaleWithLayout) {
  const Scenario sc = small_scenario(4, 4, 1, 2);
  MaLayout l = sc.q0;
  const auto d1 = steering_angle_derivs(sc.sites[0], sc.config.earth.radius_m, sc.slots[0], l, kLambda);
  for (auto& p : l.q) p *= 2.0;
  const auto d2 = steering_angle_derivs(sc.sites[0], sc.config.earth.radius_m, sc.slots[0], l, kLambda);
  // |d a_n / d theta| = |d phase_n / d theta|, linear in q_n.
  for (int n = 0; n < d1.a.size(); ++n) {
    EXPECT_NEAR(std::abs(d2.da_dtheta[n]), 2.0 * std::abs(d1.da_dtheta[n]),
                1e-9 * (1.0 + std::abs(d1.da_dtheta[n])));
  }
}

TEST(PathLoss, ReferenceValue) {
  WaveformConfig w;
  w.wavelength_m = 0.15;
  w.pathloss_exponent = 2.0;
  w.gain_leo_dbi = 16.0;
  w.gain_ce_dbi = 3.0;
  const long double pi = 3.141592653589793238462643383279L;
  const long double k = 4.0L * pi / 0.15L;
  const long double expected =
      std::pow(10.0L, 1.6L) * std::pow(10.0L, 0.3L) * k * k / (2e5L * 2e5L);
  EXPECT_NEAR(path_loss(2e5, w), static_cast<double>(expected), 1e-12 * expected);
  EXPECT_NEAR(path_loss(2e5, w), 1.39e-5, 0.01e-5);
}

TEST(PathLoss, TrivialCasesAndConventions) {
  WaveformConfig w;
  w.wavelength_m = 4 * kPi;
  w.pathloss_exponent = 0.0;
  w.gain_leo_dbi = 0.0;
  w.gain_ce_dbi = 0.0;
  EXPECT_NEAR(path_loss(123.0, w), 1.0, 1e-15);

  WaveformConfig v;
  EXPECT_NEAR(path_loss(2e5, v) / path_loss(4e5, v), 4.0, 1e-12);
  EXPECT_GT(path_loss(1e5, v), path_loss(2e5, v));
  EXPECT_THROW(path_loss(0.0, v), DomainError);

  WaveformConfig f = v;
  f.pathloss = PathlossConvention::Friis;
  const double k = 4 * kPi / v.wavelength_m;
  EXPECT_NEAR(path_loss(2e5, v) / path_loss(2e5, f), std::pow(k, 4), 1e-9 * std::pow(k, 4));
}

TEST(SynthWaveform, SingleBeamCovariance) {
  const int n = 3;
  const double p = 2.0;
  CMat wc = CMat::Zero(n, n);
  wc(0, 0) = p;
  const CMat rs = CMat::Zero(n, n);
  // RMS error of the sample covariance over many records.
  auto error = [&](int samples) {
    double e = 0.0;
    const int records = 40;
    for (std::uint64_t seed = 1; seed <= records; ++seed) {
      e += (synth_waveform(wc, rs, samples, seed).covariance - wc).squaredNorm();
    }
    return std::sqrt(e / records);
  };
  const double e_small = error(256);
  const double e_large = error(16384);
  EXPECT_LE(e_large, 3.0 * p / std::sqrt(16384.0));
  // O(1/sqrt(J)): a 64x longer record shrinks the error about 8x.
  EXPECT_GT(e_small / e_large, 4.0);
  EXPECT_LT(e_small / e_large, 16.0);
}

TEST(SynthWaveform, ZeroPowerAndNonPsd) {
  const CMat z = CMat::Zero(2, 2);
  EXPECT_LE(synth_waveform(z, z, 64, 1).covariance.norm(), 1e-300);
  CMat bad = CMat::Identity(2, 2);
  bad(1, 1) = -1.0;
  EXPECT_THROW(synth_waveform(bad, z, 8, 1), DomainError);
}

TEST(Layout, GridAndChecks) {
  const auto g = planar_grid(8, 0.075);
  ASSERT_EQ(g.size(), 8u);
  MaLayout l = layout_of(g);
  EXPECT_NEAR(l.min_spacing(), 0.075, 1e-15);
  EXPECT_TRUE(l.in_region());
  const MaLayout back = l.with_flat(l.flat());
  EXPECT_EQ(back.flat(), l.flat());
  EXPECT_DOUBLE_EQ(l.max_displacement(l), 0.0);
}
