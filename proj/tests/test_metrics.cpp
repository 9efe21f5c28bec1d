#include "maleo/errors.hpp"
#include "maleo/metrics.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace maleo;
using maleo::testing::random_layout;
using maleo::testing::random_psd;
using maleo::testing::small_scenario;

TEST(Sinr, SingleAntennaNoInterference) {
  const CVec a = CVec::Ones(1);
  const CVec w = CVec::Constant(1, std::sqrt(3.0));
  const CMat rs = CMat::Zero(1, 1);
  EXPECT_NEAR(sinr(a, 1e-5, 1e-12, w, rs), 1e-5 * 3.0 / 1e-12, 1e-3);
  const CMat wc = w * w.adjoint();
  EXPECT_NEAR(sinr(a, 1e-5, 1e-12, wc, rs), 1e-5 * 3.0 / 1e-12, 1e-3);
}

TEST(Sinr, ScalingCovarianceIncreasesSinr) {
  std::mt19937_64 rng(1);
  const CMat wc = random_psd(4, rng), rs = random_psd(4, rng);
  const CVec a = CVec::Ones(4);
  EXPECT_GT(sinr(a, 1.0, 0.5, CMat(2.0 * wc), CMat(2.0 * rs)), sinr(a, 1.0, 0.5, wc, rs));
}

TEST(Sinr, MatchesDirectFormula) {
  std::mt19937_64 rng(2);
  const Scenario sc = small_scenario(8, 4, 2, 4);
  const SlotProblem& p = sc.problems[1];
  TxCovariance cov;
  cov.wc = random_psd(8, rng, 50.0);
  cov.rs = random_psd(8, rng, 50.0);
  const SinrReport r = evaluate_sinr(p.ces, p.slot, sc.q0, cov, p.waveform);
  ASSERT_EQ(r.sinr.size(), p.ces.size());
  for (std::size_t l = 0; l < p.ces.size(); ++l) {
    const Vec3 diff = p.ces[l].position - p.slot.p_leo;
    const double rho = path_loss(diff.norm(), p.waveform);
    const CVec a = ma_steering(p.ces[l].position, p.slot, sc.q0, p.waveform.wavelength_m);
    const double num = rho * (a.transpose() * cov.wc * a.conjugate())(0, 0).real();
    const double den = rho * (a.transpose() * cov.rs * a.conjugate())(0, 0).real() + p.ces[l].noise_power;
    EXPECT_NEAR(r.sinr[l], num / den, 1e-12 * num / den);
  }
}

class FimFixture : public ::testing::Test {
 protected:
  Scenario sc = small_scenario(4, 4, 1, 3);
  const SensingTarget& target(int m = 0) const { return sc.problems[static_cast<std::size_t>(m)].scene.targets[0]; }
  const SensingScene& scene(int m = 0) const { return sc.problems[static_cast<std::size_t>(m)].scene; }
};

TEST_F(FimFixture, ZeroCovarianceGivesZeroFim) {
  const auto d = target_derivatives(target(), scene(), sc.slots[0], sc.q0);
  const CMat z = CMat::Zero(4, 4);
  EXPECT_EQ(fim_angle_entry(AngleParam::Theta, AngleParam::Phi, d, target().amplitude, 1.0, 16, z), 0.0);
  EXPECT_EQ(fim_cross_block(d, target().amplitude, 1.0, 16, z).norm(), 0.0);
  EXPECT_EQ(fim_alpha_block(d, 1.0, 16, z).norm(), 0.0);
}

TEST_F(FimFixture, AngleBlockSymmetric) {
  std::mt19937_64 rng(4);
  const auto d = target_derivatives(target(), scene(), sc.slots[1], sc.q0);
  const CMat rx = random_psd(4, rng);
  const double tp = fim_angle_entry(AngleParam::Theta, AngleParam::Phi, d, target().amplitude, 1.0, 16, rx);
  const double pt = fim_angle_entry(AngleParam::Phi, AngleParam::Theta, d, target().amplitude, 1.0, 16, rx);
  EXPECT_NEAR(tp, pt, 1e-12 * std::abs(tp));
}

TEST_F(FimFixture, AlphaBlockIsotropic) {
  const auto d = target_derivatives(target(), scene(), sc.slots[0], sc.q0);
  const Mat2 j = fim_alpha_block(d, 1.0, 16, CMat::Identity(4, 4));
  EXPECT_LE((j - 512.0 * Mat2::Identity()).norm(), 1e-9);
}

TEST_F(FimFixture, AlphaBlockTwoForms) {
  std::mt19937_64 rng(6);
  const auto d = target_derivatives(target(), scene(), sc.slots[2], sc.q0);
  const CMat rx = random_psd(4, rng);
  const Mat2 j = fim_alpha_block(d, 2.0, 8, rx);
  const CMat m = d.b * d.a.transpose();
  const double trace_form = (2.0 * 8 / 2.0) * (m * rx * m.adjoint()).trace().real();
  EXPECT_NEAR(j(0, 0), trace_form, 1e-12 * trace_form);
  EXPECT_NEAR(j(0, 1), 0.0, 1e-12 * trace_form);
  EXPECT_NEAR(j(0, 0), j(1, 1), 1e-12 * trace_form);
}

TEST_F(FimFixture, MatchesDerivativeOfMeanDefinition) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const int m = trial % 3;
    const MaLayout l = random_layout(sc.q0, rng);
    const CMat rx = random_psd(4, rng, 100.0);
    SensingTarget t = target(m);
    if (trial % 2 == 1) t.amplitude *= std::polar(1.0, 0.7);
    const auto d = target_derivatives(t, scene(m), sc.slots[static_cast<std::size_t>(m)], l);
    const Mat4 j = assemble_fim(d, t.amplitude, t.noise_power, scene(m).samples, rx);
    const Mat4 oracle = maleo::testing::fd_fim(t, scene(m), sc.slots[static_cast<std::size_t>(m)], l, rx);
    EXPECT_LE(maleo::testing::equilibrated_error(j, oracle), 1e-4) << "trial " << trial;
    Eigen::SelfAdjointEigenSolver<Mat4> es(j);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * j.trace());
  }
}

TEST_F(FimFixture, LinearInCovariance) {
  std::mt19937_64 rng(9);
  const auto d = target_derivatives(target(), scene(), sc.slots[0], sc.q0);
  const CMat a = random_psd(4, rng), b = random_psd(4, rng);
  const cplx al = target().amplitude;
  const Mat4 ja = assemble_fim(d, al, 1.0, 8, a), jb = assemble_fim(d, al, 1.0, 8, b);
  const Mat4 jab = assemble_fim(d, al, 1.0, 8, CMat(a + b));
  EXPECT_LE((jab - ja - jb).norm(), 1e-10 * jab.norm());
}

TEST(XiTransform, OriginAndNorms) {
  const double re = 6.371e6;
  const Mat34 x0 = xi_transform(GeoAngles{0.0, 0.0}, re);
  EXPECT_LE((x0.col(0) - Vec3(0, 0, re)).norm(), 1e-9);
  EXPECT_LE((x0.col(1) - Vec3(0, re, 0)).norm(), 1e-9);
  EXPECT_EQ(x0.rightCols<2>().norm(), 0.0);

  const GeoAngles g{0.4, -1.1};
  const Mat34 x = xi_transform(g, re);
  EXPECT_NEAR(x.col(0).norm(), re, 1e-9 * re);
  EXPECT_NEAR(x.col(1).norm(), re * std::cos(g.theta), 1e-9 * re);
  const double h = 1e-6;
  const Vec3 dt = (spherical_to_cartesian({g.theta + h, g.phi}, re) -
                   spherical_to_cartesian({g.theta - h, g.phi}, re)) / (2 * h);
  const Vec3 dp = (spherical_to_cartesian({g.theta, g.phi + h}, re) -
                   spherical_to_cartesian({g.theta, g.phi - h}, re)) / (2 * h);
  EXPECT_LE((dt - x.col(0)).norm(), 1e-6 * re);
  EXPECT_LE((dp - x.col(1)).norm(), 1e-6 * re);
}

TEST(Speb, AdjugateOracleOnDeskScenario) {
  std::mt19937_64 rng(12);
  const Scenario sc = small_scenario(8, 4, 2, 4);
  for (const auto& p : sc.problems) {
    const CMat rx = random_psd(8, rng, 100.0);
    for (const auto& b : evaluate_scene(p.scene, p.slot, sc.q0, rx)) {
      const double oracle = (b.xi * maleo::testing::adjugate_inverse(b.j_xi) * b.xi.transpose()).trace();
      EXPECT_NEAR(b.speb, oracle, 1e-6 * oracle);
      EXPECT_GT(b.speb, 0.0);
    }
  }
}

TEST(Speb, HomogeneityInPowerAndNoise) {
  std::mt19937_64 rng(13);
  const Scenario sc = small_scenario(4, 4, 1, 2);
  std::uniform_real_distribution<double> uc(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const SlotProblem& p = sc.problems[static_cast<std::size_t>(trial % 2)];
    const MaLayout l = random_layout(sc.q0, rng);
    const CMat rx = random_psd(4, rng, 100.0);
    const double c = uc(rng);
    const double base = scene_objective(p.scene, p.slot, l, rx);
    EXPECT_NEAR(scene_objective(p.scene, p.slot, l, CMat(c * rx)), base / c, 1e-9 * base / c);
    SensingScene noisy = p.scene;
    for (auto& t : noisy.targets) t.noise_power *= c;
    EXPECT_NEAR(scene_objective(noisy, p.slot, l, rx), c * base, 1e-9 * c * base);
  }
}

TEST(Speb, SingularFimRejected) {
  Mat4 j = Mat4::Identity();
  j(1, 1) = 0.0;
  EXPECT_THROW(speb(j, xi_transform(GeoAngles{}, 1.0)), SingularFimError);
}

TEST(SumSpeb, AdditiveAndPermutationInvariant) {
  std::mt19937_64 rng(14);
  const Scenario sc = small_scenario(8, 4, 2, 1);
  const SlotProblem& p = sc.problems[0];
  const CMat rx = random_psd(8, rng, 10.0);
  auto bundles = evaluate_scene(p.scene, p.slot, sc.q0, rx);
  const double total = sum_speb(bundles);
  EXPECT_NEAR(total, bundles[0].speb + bundles[1].speb, 1e-15 * total);
  std::swap(bundles[0], bundles[1]);
  EXPECT_EQ(sum_speb(bundles), bundles[0].speb + bundles[1].speb);
  EXPECT_EQ(sum_speb({bundles[0]}), bundles[0].speb);
}
