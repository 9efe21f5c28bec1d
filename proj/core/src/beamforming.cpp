#include "maleo/beamforming.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <random>
#include <thread>

namespace maleo {

namespace {

// Upper-triangle entries of the 4x4 FIM in row-major order.
constexpr std::array<std::pair<int, int>, 10> kFimEntries{{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

// G_ab with J_ab(Rx) = Re Tr(G_ab Rx); every FIM entry is linear in Rx.
std::array<CMat, 10> fim_generators(const SteeringDerivatives& d, cplx alpha, double noise,
                                    int samples) {
  const double c_angle = 2.0 * std::norm(alpha) * samples / noise;
  const double c_cross = 2.0 * samples / noise;
  const CMat d_theta = d.db_dtheta * d.a.transpose() + d.b * d.da_dtheta.transpose();
  const CMat d_phi = d.db_dphi * d.a.transpose() + d.b * d.da_dphi.transpose();
  const CMat ba = d.b * d.a.transpose();
  const CMat aa = d.a.conjugate() * d.a.transpose();
  const cplx ac = std::conj(alpha);
  const cplx j{0.0, 1.0};

  std::array<CMat, 10> g;
  g[0] = c_angle * d_theta.adjoint() * d_theta;
  g[1] = c_angle * d_theta.adjoint() * d_phi;
  g[2] = (c_cross * ac) * d_theta.adjoint() * ba;
  g[3] = (c_cross * j * ac) * d_theta.adjoint() * ba;
  g[4] = c_angle * d_phi.adjoint() * d_phi;
  g[5] = (c_cross * ac) * d_phi.adjoint() * ba;
  g[6] = (c_cross * j * ac) * d_phi.adjoint() * ba;
  g[7] = (c_cross * d.b.squaredNorm()) * aa;
  g[8] = CMat::Zero(aa.rows(), aa.cols());
  g[9] = g[7];
  return g;
}

double re_trace(const CMat& g, const CMat& h) { return (g.cwiseProduct(h.transpose())).sum().real(); }

LinearExpr concat(LinearExpr a, const LinearExpr& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

LmiConstraint hermitian_psd(int n, int offset, std::string label) {
  LmiConstraint l;
  l.dim = 2 * n;
  l.constant = Mat::Zero(2 * n, 2 * n);
  l.label = std::move(label);
  for (int k = 0; k < n * n; ++k) l.terms.push_back({offset + k, hermitian_embedding_entries(n, k)});
  return l;
}

std::string indexed(const char* base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

}  // namespace

TxCovariance BeamformingSolution::covariance() const { return TxCovariance{wc, rs, w}; }

P4Program build_p4(const SlotProblem& problem, const MaLayout& layout,
                   const std::optional<CMat>& fixed_wc) {
  const int n = layout.size();
  const int k_count = problem.num_sensing();
  if (n < 1) throw DomainError("build_p4: layout has no antennas");
  if (k_count < 1) throw DomainError("build_p4: at least one sensing receiver is required");
  if (!(problem.p_max > 0.0)) throw DomainError("build_p4: power budget must be positive");
  if (fixed_wc && (fixed_wc->rows() != n || fixed_wc->cols() != n)) {
    throw DomainError("build_p4: fixed Wc has the wrong size");
  }
  const double p = problem.p_max;

  P4Program out;
  out.n_t = n;
  out.fixed_wc = fixed_wc;
  out.scaling.power = p;
  ConicProgram& prog = out.program;
  if (!fixed_wc) out.wc_offset = prog.add_block("Wc", BlockKind::HermitianMatrix, n);
  out.rs_offset = prog.add_block("Rs", BlockKind::HermitianMatrix, n);
  for (int k = 0; k < k_count; ++k) {
    out.z_offsets.push_back(prog.add_block(indexed("Z", static_cast<std::size_t>(k)),
                                           BlockKind::SymmetricMatrix, 3));
  }
  const CMat wc_fixed = fixed_wc ? CMat(*fixed_wc / p) : CMat();
  const CMat eye = CMat::Identity(n, n);

  // Power budget, in units of P_max.
  if (fixed_wc) {
    prog.add_inequality(hermitian_trace_terms(eye, out.rs_offset), 1.0 - wc_fixed.trace().real(),
                        "power");
  } else {
    prog.add_inequality(concat(hermitian_trace_terms(eye, out.wc_offset),
                               hermitian_trace_terms(eye, out.rs_offset)),
                        1.0, "power");
  }

  // Warm start: Wc' = w I, Rs' = r I with r small enough for every SINR row.
  const double w_iso = fixed_wc ? 0.0 : 0.6 / n;
  double r_iso = fixed_wc ? 0.5 * (1.0 - wc_fixed.trace().real()) / n : 0.15 / n;

  // SINR: Tr(A Wc)/Gamma - Tr(A Rs) >= sigma^2 / rho, A = a* a^T.
  for (std::size_t l = 0; l < problem.ces.size(); ++l) {
    const CommTarget& ce = problem.ces[l];
    if (ce.threshold <= 0.0) continue;
    const CommLink link = comm_link(ce, problem.slot, layout, problem.waveform);
    const CMat a_mat = link.a.conjugate() * link.a.transpose();
    const double floor = ce.noise_power / (link.rho * p);
    const double norm = 1.0 / n;
    const double a2 = link.a.squaredNorm();
    const double useful = fixed_wc ? re_trace(a_mat, wc_fixed) : w_iso * a2;
    if (a2 > 0.0) r_iso = std::min(r_iso, 0.5 * (useful / ce.threshold - floor) / a2);
    if (fixed_wc) {
      prog.add_inequality(hermitian_trace_terms(a_mat, out.rs_offset, norm),
                          norm * (re_trace(a_mat, wc_fixed) / ce.threshold - floor),
                          indexed("sinr", l));
    } else {
      prog.add_inequality(concat(hermitian_trace_terms(a_mat, out.wc_offset, -norm / ce.threshold),
                                 hermitian_trace_terms(a_mat, out.rs_offset, norm)),
                          -norm * floor, indexed("sinr", l));
    }
    ++out.sinr_rows;
  }

  out.start = Vec::Zero(prog.num_variables());
  r_iso = std::max(r_iso, 1e-9);
  for (int i = 0; i < n; ++i) {
    if (!fixed_wc) out.start[out.wc_offset + i] = w_iso;
    out.start[out.rs_offset + i] = r_iso;
  }

  // Schur-complement blocks [[Z_k, Xi_k], [Xi_k^T, J_k(Rx)]] >= 0 after congruence.
  const CMat rx_ref = (p / n) * eye;
  for (int k = 0; k < k_count; ++k) {
    const SensingTarget& t = problem.scene.targets[static_cast<std::size_t>(k)];
    const SteeringDerivatives d = target_derivatives(t, problem.scene, problem.slot, layout);
    const auto gens = fim_generators(d, t.amplitude, t.noise_power, problem.scene.samples);

    Eigen::Vector4d dk;
    constexpr std::array<std::size_t, 4> kDiag{0, 4, 7, 9};
    for (int i = 0; i < 4; ++i) {
      const double jii = re_trace(gens[kDiag[static_cast<std::size_t>(i)]], rx_ref);
      dk[i] = jii > 0.0 ? 1.0 / std::sqrt(jii) : 1.0;
    }
    const Mat34 xi = xi_transform(t.site.angles, problem.scene.earth_radius_m);
    const Mat34 xi_d = xi * dk.asDiagonal();
    const double ck = xi_d.squaredNorm() > 0.0 ? xi_d.squaredNorm() : 1.0;
    out.scaling.z_scale.push_back(ck);
    out.scaling.fim_scale.push_back(dk);

    LmiConstraint lmi;
    lmi.dim = 7;
    lmi.label = indexed("fim_lmi", static_cast<std::size_t>(k));
    lmi.constant = Mat::Zero(7, 7);
    lmi.constant.topRightCorner<3, 4>() = xi_d / std::sqrt(ck);
    lmi.constant.bottomLeftCorner<4, 3>() = (xi_d / std::sqrt(ck)).transpose();

    // Per-parameter coefficients of each scaled FIM entry.
    std::vector<std::vector<MatrixEntry>> per_param(static_cast<std::size_t>(n * n));
    for (std::size_t e = 0; e < kFimEntries.size(); ++e) {
      const auto [a, b] = kFimEntries[e];
      const double s = p * dk[a] * dk[b];
      if (fixed_wc) {
        const double v = s * re_trace(gens[e], wc_fixed);
        lmi.constant(3 + a, 3 + b) += v;
        if (a != b) lmi.constant(3 + b, 3 + a) += v;
      }
      const LinearExpr coeffs = hermitian_trace_terms(gens[e], 0, s);
      for (const auto& c : coeffs) {
        if (c.coeff != 0.0) per_param[static_cast<std::size_t>(c.var)].push_back({3 + a, 3 + b, c.coeff});
      }
    }
    for (int q = 0; q < n * n; ++q) {
      const auto& entries = per_param[static_cast<std::size_t>(q)];
      if (entries.empty()) continue;
      if (!fixed_wc) lmi.terms.push_back({out.wc_offset + q, entries});
      lmi.terms.push_back({out.rs_offset + q, entries});
    }

    const int zo = out.z_offsets[static_cast<std::size_t>(k)];
    for (int a = 0; a < 3; ++a) {
      lmi.terms.push_back({zo + 4 * a, {{a, a, 1.0}}});
      for (int b = a + 1; b < 3; ++b) {
        lmi.terms.push_back({zo + 3 * a + b, {{a, b, 0.5}}});
        lmi.terms.push_back({zo + 3 * b + a, {{a, b, 0.5}}});
        prog.add_equality({{zo + 3 * a + b, 1.0}, {zo + 3 * b + a, -1.0}}, 0.0,
                          indexed("z_sym", static_cast<std::size_t>(k)));
      }
    }
    // Z' = B J^-1 B^T plus a margin, evaluated at the warm start.
    Mat m0 = lmi.constant;
    for (const auto& term : lmi.terms) {
      const double v = out.start[term.var];
      if (v == 0.0) continue;
      for (const auto& e : term.entries) {
        m0(e.row, e.col) += v * e.value;
        if (e.row != e.col) m0(e.col, e.row) += v * e.value;
      }
    }
    const Eigen::LDLT<Mat> jl(m0.bottomRightCorner(4, 4));
    if (jl.info() == Eigen::Success && jl.isPositive()) {
      const Mat b = m0.topRightCorner(3, 4);
      const Mat zs = b * jl.solve(b.transpose());
      const Mat z0 = zs + std::max(1e-3, 0.1 * zs.trace()) * Mat::Identity(3, 3);
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 3; ++c) out.start[zo + 3 * a + c] = 0.5 * (z0(a, c) + z0(c, a));
      }
    }
    prog.add_lmi(std::move(lmi));
    prog.add_objective({{zo, ck}, {zo + 4, ck}, {zo + 8, ck}});
  }

  if (!fixed_wc) prog.add_lmi(hermitian_psd(n, out.wc_offset, "psd(Wc)"));
  prog.add_lmi(hermitian_psd(n, out.rs_offset, "psd(Rs)"));
  return out;
}

BeamformingSolution solve_beamforming(const P4Program& p4, const SolverSettings& settings) {
  const SolveOutcome o = solve(p4.program, settings, p4.start);
  if (o.status == SolveStatus::Infeasible) {
    throw InfeasibleError("beamforming program infeasible", o.binding_constraint);
  }
  if (!o.usable()) {
    throw std::runtime_error("beamforming solve failed: " + std::string(to_string(o.status)) +
                             (o.message.empty() ? "" : " (" + o.message + ")"));
  }
  const double p = p4.scaling.power;
  BeamformingSolution s;
  s.wc = p4.fixed_wc ? *p4.fixed_wc : CMat(p * hermitian_from_params(o.x, p4.wc_offset, p4.n_t));
  s.rs = p * hermitian_from_params(o.x, p4.rs_offset, p4.n_t);
  for (std::size_t k = 0; k < p4.z_offsets.size(); ++k) {
    Mat3 z;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) z(a, b) = o.x[p4.z_offsets[k] + 3 * a + b];
    }
    s.z.push_back(p4.scaling.z_scale[k] * 0.5 * (z + z.transpose()));
  }
  s.objective = p4.program.evaluate_objective(o.x);
  s.status = o.status;
  s.residuals = o.residuals;
  s.iterations = o.iterations;
  return s;
}

namespace {

// SINR rows are tiny in the scaled program when the threshold is large, so a
// phase-I relaxation that looks negligible there can hide a real deficit.
// Re-check in original units.
void require_sinr(const SlotProblem& problem, const MaLayout& layout, const BeamformingSolution& s) {
  constexpr double kMaxDeficit = 1e-3;  // relative, about 0.004 dB
  const SinrReport r = evaluate_sinr(problem.ces, problem.slot, layout, s.covariance(), problem.waveform);
  for (std::size_t l = 0; l < r.sinr.size(); ++l) {
    if (r.threshold[l] > 0.0 && r.sinr[l] < r.threshold[l] * (1.0 - kMaxDeficit)) {
      throw InfeasibleError("beamforming program infeasible: SINR " +
                                std::to_string(linear_to_db(r.sinr[l])) + " dB below threshold " +
                                std::to_string(linear_to_db(r.threshold[l])) + " dB",
                            indexed("sinr", l));
    }
  }
}

}  // namespace

BeamformingSolution solve_p4(const SlotProblem& problem, const MaLayout& layout,
                             const SolverSettings& settings) {
  BeamformingSolution s = solve_beamforming(build_p4(problem, layout), settings);
  require_sinr(problem, layout, s);
  return s;
}

RecoveryResult recover_rank1(const BeamformingSolution& sdr, const SlotProblem& problem,
                             const MaLayout& layout, const RecoverySettings& settings,
                             const SolverSettings& solver) {
  require_psd(sdr.wc, "recover_rank1(Wc)");
  const int n = static_cast<int>(sdr.wc.rows());
  Eigen::SelfAdjointEigenSolver<CMat> es(sdr.wc);
  const Vec lam = es.eigenvalues().cwiseMax(0.0);
  const double l1 = lam[n - 1];
  const double l2 = n > 1 ? lam[n - 2] : 0.0;

  auto resolve = [&](const CVec& w) {
    BeamformingSolution s = solve_beamforming(build_p4(problem, layout, CMat(w * w.adjoint())), solver);
    s.w = w;
    require_sinr(problem, layout, s);
    return s;
  };

  RecoveryResult result;
  if (l1 <= 1e-12 * problem.p_max || l2 <= settings.rank_tol * l1) {
    const CVec w = l1 > 0.0 ? CVec(std::sqrt(l1) * es.eigenvectors().col(n - 1)) : CVec(CVec::Zero(n));
    result.solution = resolve(w);
    result.already_rank_one = true;
    result.candidates = 1;
    result.feasible = 1;
    result.chosen = 0;
    return result;
  }

  // Candidate directions: principal eigenvector, then draws from CN(0, Wc).
  std::vector<CVec> dirs;
  dirs.push_back(es.eigenvectors().col(n - 1));
  {
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const CMat half = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    for (int s = 0; s < settings.samples; ++s) {
      CVec z(n);
      for (int i = 0; i < n; ++i) z[i] = cplx(normal(rng), normal(rng));
      dirs.push_back(half * z);
    }
  }

  std::vector<CommLink> links;
  for (const auto& ce : problem.ces) {
    if (ce.threshold > 0.0) links.push_back(comm_link(ce, problem.slot, layout, problem.waveform));
  }
  const double power_limit = problem.p_max * (1.0 + 1e-9);

  // Scale so every CE sees at least the relaxed signal power a^T Wc a*.
  auto scale_candidate = [&](const CVec& v) -> std::optional<CVec> {
    if (v.squaredNorm() == 0.0) return std::nullopt;
    double c = 0.0;
    if (links.empty()) {
      c = sdr.wc.trace().real() / v.squaredNorm();
    } else {
      for (const auto& link : links) {
        const double target = (link.a.transpose() * sdr.wc * link.a.conjugate()).value().real();
        const double got = std::norm(link.a.dot(v.conjugate()));
        if (got <= 0.0) return std::nullopt;
        c = std::max(c, target / got);
      }
    }
    const CVec w = std::sqrt(c) * v;
    if (w.squaredNorm() > power_limit) return std::nullopt;
    return w;
  };

  const std::size_t count = dirs.size();
  std::vector<std::optional<BeamformingSolution>> solved(count);
  auto work = [&](std::size_t i) {
    const auto w = scale_candidate(dirs[i]);
    if (!w) return;
    try {
      solved[i] = resolve(*w);
    } catch (const InfeasibleError&) {
    } catch (const std::runtime_error&) {
    }
  };
  const int threads = std::max(1, settings.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  result.candidates = static_cast<int>(count);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    if (!solved[i]) continue;
    ++result.feasible;
    if (solved[i]->objective < best) {
      best = solved[i]->objective;
      result.chosen = static_cast<int>(i);
    }
  }
  if (result.chosen < 0) {
    throw RecoveryError("Gaussian randomization found no feasible rank-1 candidate among " +
                        std::to_string(count));
  }
  result.solution = std::move(*solved[static_cast<std::size_t>(result.chosen)]);
  return result;
}

TxCovariance random_beamforming(int n_t, double p_max, std::uint64_t seed) {
  if (n_t < 1 || !(p_max > 0.0)) throw DomainError("random_beamforming: bad arguments");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CVec dir(n_t);
  for (int i = 0; i < n_t; ++i) dir[i] = cplx(normal(rng), normal(rng));
  dir.normalize();
  CMat g(n_t, n_t);
  for (int j = 0; j < n_t; ++j) {
    for (int i = 0; i < n_t; ++i) g(i, j) = cplx(normal(rng), normal(rng));
  }
  CMat rs = g * g.adjoint();
  rs /= rs.trace().real();
  const double split = unit(rng);
  const CVec w = std::sqrt(split * p_max) * dir;
  return TxCovariance::from_beam(w, (1.0 - split) * p_max * rs);
}

int solver_threads_from_env() {
  const char* v = std::getenv("MALEO_SOLVER_THREADS");
  if (v == nullptr) return 1;
  int n = 1;
  const auto [ptr, ec] = std::from_chars(v, v + std::strlen(v), n);
  if (ec != std::errc() || n < 1) return 1;
  return n;
}

}  // namespace maleo
