// Log-barrier path-following solver for the problems in conic.hpp.
//
// Every constraint is turned into a self-concordant barrier term:
//   linear     -log(b - a^T x)
//   SOC        -log(u^2 - |v|^2),  u = g^T x + h, v = F x + f
//   quadratic  -log(-(z^T Q z + l^T x + r))
//   LMI        -log det S(x)
// Rows are normalized before use so the tolerances act on comparable scales.
// Phase I appends a shift variable s to every slack and minimizes it.

#include "maleo/conic.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>

namespace maleo {

namespace {

constexpr double kUnboundedNorm = 1e10;
constexpr double kCenteringTol = 1e-7;  // on lambda^2 / 2
constexpr int kMaxCentering = 60;
constexpr double kGrowth = 12.0;
constexpr double kPhaseOneObjectiveWeight = 1e-6;
constexpr int kSlopeBisections = 12;
constexpr double kSlopeNoise = 1e-9;

struct Sparse {
  std::vector<int> idx;
  std::vector<double> val;

  double dot(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) s += val[i] * x[idx[i]];
    return s;
  }
  double norm() const {
    double s = 0.0;
    for (double v : val) s += v * v;
    return std::sqrt(s);
  }
};

Sparse to_sparse(const LinearExpr& e, double scale) {
  std::map<int, double> merged;
  for (const auto& t : e) merged[t.var] += t.coeff;
  Sparse s;
  for (const auto& [k, v] : merged) {
    if (v != 0.0) {
      s.idx.push_back(k);
      s.val.push_back(v * scale);
    }
  }
  return s;
}

class Barrier {
 public:
  explicit Barrier(std::string label) : label_(std::move(label)) {}
  virtual ~Barrier() = default;

  virtual double degree() const = 0;
  virtual bool inside(const Vec& x) const = 0;
  virtual void add_derivatives(const Vec& x, Vec& grad, Mat& hess) const = 0;
  /// Positive when violated, normalized units.
  virtual double violation(const Vec& x) const = 0;
  /// d/dtau of the barrier at x + tau*dx, evaluated at tau = 0 (x inside).
  virtual double directional(const Vec& x, const Vec& dx) const = 0;

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

// b - a^T x > 0
class LinearBarrier final : public Barrier {
 public:
  LinearBarrier(Sparse a, double b, std::string label)
      : Barrier(std::move(label)), a_(std::move(a)), b_(b) {}

  double degree() const override { return 1.0; }
  double slack(const Vec& x) const { return b_ - a_.dot(x); }
  bool inside(const Vec& x) const override { return slack(x) > 0.0; }
  double violation(const Vec& x) const override { return -slack(x); }
  double directional(const Vec& x, const Vec& dx) const override { return a_.dot(dx) / slack(x); }

  void add_derivatives(const Vec& x, Vec& grad, Mat& hess) const override {
    const double s = slack(x);
    const double inv = 1.0 / s;
    for (std::size_t i = 0; i < a_.idx.size(); ++i) {
      grad[a_.idx[i]] += a_.val[i] * inv;
      for (std::size_t j = 0; j < a_.idx.size(); ++j) {
        hess(a_.idx[i], a_.idx[j]) += a_.val[i] * a_.val[j] * inv * inv;
      }
    }
  }

 private:
  Sparse a_;
  double b_;
};

// Shared local-variable bookkeeping for dense blocks.
class LocalMap {
 public:
  int local(int global) {
    auto [it, inserted] = index_.try_emplace(global, static_cast<int>(vars_.size()));
    if (inserted) vars_.push_back(global);
    return it->second;
  }
  const std::vector<int>& vars() const { return vars_; }
  int size() const { return static_cast<int>(vars_.size()); }

  Vec gather(const Vec& x) const {
    Vec z(size());
    for (int i = 0; i < size(); ++i) z[i] = x[vars_[static_cast<std::size_t>(i)]];
    return z;
  }
  void scatter(const Vec& g, const Mat& h, Vec& grad, Mat& hess) const {
    for (int i = 0; i < size(); ++i) {
      const int gi = vars_[static_cast<std::size_t>(i)];
      grad[gi] += g[i];
      for (int j = 0; j < size(); ++j) hess(gi, vars_[static_cast<std::size_t>(j)]) += h(i, j);
    }
  }

 private:
  std::map<int, int> index_;
  std::vector<int> vars_;
};

// u^2 - |v|^2 > 0 and u > 0
class SocBarrier final : public Barrier {
 public:
  SocBarrier(const SocConstraint& c, double scale, int shift_var, double relax)
      : Barrier(c.label) {
    const auto m = static_cast<Eigen::Index>(c.rows.size());
    std::vector<std::pair<Eigen::Index, LinearTerm>> f_terms;
    for (Eigen::Index r = 0; r < m; ++r) {
      for (const auto& t : c.rows[static_cast<std::size_t>(r)]) f_terms.emplace_back(r, t);
    }
    for (const auto& t : c.bound) map_.local(t.var);
    for (const auto& [r, t] : f_terms) map_.local(t.var);
    if (shift_var >= 0) map_.local(shift_var);
    const int k = map_.size();
    f_mat_ = Mat::Zero(m, k);
    g_ = Vec::Zero(k);
    for (const auto& [r, t] : f_terms) f_mat_(r, map_.local(t.var)) += scale * t.coeff;
    for (const auto& t : c.bound) g_[map_.local(t.var)] += scale * t.coeff;
    if (shift_var >= 0) g_[map_.local(shift_var)] += 1.0;
    f_ = scale * c.offsets;
    h_ = scale * c.bound_offset + relax;
  }

  double degree() const override { return 2.0; }

  bool inside(const Vec& x) const override {
    const Vec z = map_.gather(x);
    const double u = g_.dot(z) + h_;
    return u > 0.0 && u * u - (f_mat_ * z + f_).squaredNorm() > 0.0;
  }
  double violation(const Vec& x) const override {
    const Vec z = map_.gather(x);
    return (f_mat_ * z + f_).norm() - (g_.dot(z) + h_);
  }
  double directional(const Vec& x, const Vec& dx) const override {
    const Vec z = map_.gather(x);
    const Vec dz = map_.gather(dx);
    const double u = g_.dot(z) + h_;
    const Vec v = f_mat_ * z + f_;
    const double ds = 2.0 * u * g_.dot(dz) - 2.0 * v.dot(f_mat_ * dz);
    return -ds / (u * u - v.squaredNorm());
  }

  void add_derivatives(const Vec& x, Vec& grad, Mat& hess) const override {
    const Vec z = map_.gather(x);
    const double u = g_.dot(z) + h_;
    const Vec v = f_mat_ * z + f_;
    const double s = u * u - v.squaredNorm();
    const Vec ds = 2.0 * u * g_ - 2.0 * f_mat_.transpose() * v;
    const Mat d2s = 2.0 * (g_ * g_.transpose() - f_mat_.transpose() * f_mat_);
    map_.scatter(-ds / s, ds * ds.transpose() / (s * s) - d2s / s, grad, hess);
  }

 private:
  LocalMap map_;
  Mat f_mat_;
  Vec f_;
  Vec g_;
  double h_ = 0.0;
};

// -(z^T Q z + l^T x + r) > 0
class QuadBarrier final : public Barrier {
 public:
  QuadBarrier(const QuadraticConstraint& c, double scale, int shift_var, double relax)
      : Barrier(c.label) {
    for (int v : c.vars) map_.local(v);
    for (const auto& t : c.linear) map_.local(t.var);
    if (shift_var >= 0) map_.local(shift_var);
    const int k = map_.size();
    q_ = Mat::Zero(k, k);
    l_ = Vec::Zero(k);
    for (std::size_t i = 0; i < c.vars.size(); ++i) {
      for (std::size_t j = 0; j < c.vars.size(); ++j) {
        q_(map_.local(c.vars[i]), map_.local(c.vars[j])) +=
            scale * c.quad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    for (const auto& t : c.linear) l_[map_.local(t.var)] += scale * t.coeff;
    if (shift_var >= 0) l_[map_.local(shift_var)] -= 1.0;
    r_ = scale * c.constant - relax;
  }

  double degree() const override { return 1.0; }
  double slack(const Vec& z) const { return -(z.dot(q_ * z) + l_.dot(z) + r_); }
  bool inside(const Vec& x) const override { return slack(map_.gather(x)) > 0.0; }
  double violation(const Vec& x) const override { return -slack(map_.gather(x)); }
  double directional(const Vec& x, const Vec& dx) const override {
    const Vec z = map_.gather(x);
    const Vec dz = map_.gather(dx);
    return (2.0 * q_ * z + l_).dot(dz) / slack(z);
  }

  void add_derivatives(const Vec& x, Vec& grad, Mat& hess) const override {
    const Vec z = map_.gather(x);
    const double s = slack(z);
    const Vec ds = -(2.0 * q_ * z + l_);
    map_.scatter(-ds / s, ds * ds.transpose() / (s * s) + 2.0 * q_ / s, grad, hess);
  }

 private:
  LocalMap map_;
  Mat q_;
  Vec l_;
  double r_ = 0.0;
};

// S(x) = F0 + sum x_v F_v positive definite
class LmiBarrier final : public Barrier {
 public:
  LmiBarrier(const LmiConstraint& c, double scale, int shift_var, double relax)
      : Barrier(c.label), dim_(c.dim) {
    f0_ = scale * c.constant + relax * Mat::Identity(c.dim, c.dim);
    std::map<int, std::vector<MatrixEntry>> merged;
    for (const auto& t : c.terms) {
      auto& dst = merged[t.var];
      for (auto e : t.entries) {
        e.value *= scale;
        dst.push_back(e);
      }
    }
    if (shift_var >= 0) {
      auto& dst = merged[shift_var];
      for (int i = 0; i < c.dim; ++i) dst.push_back({i, i, 1.0});
    }
    for (auto& [v, entries] : merged) {
      vars_.push_back(v);
      entries_.push_back(std::move(entries));
    }
  }

  double degree() const override { return static_cast<double>(dim_); }

  Mat assemble(const Vec& x) const {
    Mat s = f0_;
    for (std::size_t t = 0; t < vars_.size(); ++t) {
      const double xv = x[vars_[t]];
      if (xv == 0.0) continue;
      for (const auto& e : entries_[t]) {
        s(e.row, e.col) += xv * e.value;
        if (e.row != e.col) s(e.col, e.row) += xv * e.value;
      }
    }
    return s;
  }

  bool inside(const Vec& x) const override {
    Eigen::LLT<Mat> llt(assemble(x));
    if (llt.info() != Eigen::Success) return false;
    return llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
  }

  double violation(const Vec& x) const override {
    Eigen::SelfAdjointEigenSolver<Mat> es(assemble(x), Eigen::EigenvaluesOnly);
    return -es.eigenvalues().minCoeff();
  }

  double directional(const Vec& x, const Vec& dx) const override {
    const Mat ds = assemble(dx) - f0_;
    Eigen::LLT<Mat> llt(assemble(x));
    return -llt.solve(ds).trace();
  }

  void add_derivatives(const Vec& x, Vec& grad, Mat& hess) const override {
    Eigen::LLT<Mat> llt(assemble(x));
    const Mat linv = llt.matrixL().solve(Mat::Identity(dim_, dim_));
    // G_v = L^-1 F_v L^-T; grad_v = -tr(G_v), hess_uv = <G_u, G_v>.
    const auto terms = static_cast<Eigen::Index>(vars_.size());
    Mat stacked = Mat::Zero(static_cast<Eigen::Index>(dim_) * dim_, terms);
    for (Eigen::Index t = 0; t < terms; ++t) {
      Eigen::Map<Mat> g(stacked.col(t).data(), dim_, dim_);
      double tr = 0.0;
      for (const auto& e : entries_[static_cast<std::size_t>(t)]) {
        const auto ca = linv.col(e.row);
        const auto cb = linv.col(e.col);
        if (e.row == e.col) {
          g.noalias() += e.value * ca * ca.transpose();
          tr += e.value * ca.squaredNorm();
        } else {
          g.noalias() += e.value * (ca * cb.transpose() + cb * ca.transpose());
          tr += 2.0 * e.value * ca.dot(cb);
        }
      }
      grad[vars_[static_cast<std::size_t>(t)]] -= tr;
    }
    const Mat h = stacked.transpose() * stacked;
    for (Eigen::Index i = 0; i < terms; ++i) {
      for (Eigen::Index j = 0; j < terms; ++j) {
        hess(vars_[static_cast<std::size_t>(i)], vars_[static_cast<std::size_t>(j)]) += h(i, j);
      }
    }
  }

 private:
  int dim_;
  Mat f0_;
  std::vector<int> vars_;
  std::vector<std::vector<MatrixEntry>> entries_;
};

// ---- problem assembly ----------------------------------------------------------

double soc_scale(const SocConstraint& c) {
  double m = to_sparse(c.bound, 1.0).norm();
  for (const auto& r : c.rows) m = std::max(m, to_sparse(r, 1.0).norm());
  return m > 0.0 ? 1.0 / m : 1.0;
}

double quad_scale(const QuadraticConstraint& c) {
  double m = to_sparse(c.linear, 1.0).norm();
  if (c.quad.size() > 0) m = std::max(m, c.quad.norm());
  if (m == 0.0) m = std::abs(c.constant);
  return m > 0.0 ? 1.0 / m : 1.0;
}

double lmi_scale(const LmiConstraint& c) {
  double m = 0.0;
  for (const auto& t : c.terms) {
    for (const auto& e : t.entries) m = std::max(m, std::abs(e.value));
  }
  if (m == 0.0) m = c.constant.cwiseAbs().maxCoeff();
  return m > 0.0 ? 1.0 / m : 1.0;
}

std::vector<std::unique_ptr<Barrier>> build_barriers(const ConicProgram& p, int shift_var,
                                                     double relax) {
  std::vector<std::unique_ptr<Barrier>> out;
  for (const auto& c : p.inequalities()) {
    Sparse a = to_sparse(c.expr, 1.0);
    const double n = a.norm();
    const double s = n > 0.0 ? 1.0 / n : 1.0;
    for (double& v : a.val) v *= s;
    if (shift_var >= 0) {
      a.idx.push_back(shift_var);
      a.val.push_back(-1.0);
    }
    out.push_back(std::make_unique<LinearBarrier>(std::move(a), s * c.rhs + relax, c.label));
  }
  for (const auto& c : p.socs()) {
    out.push_back(std::make_unique<SocBarrier>(c, soc_scale(c), shift_var, relax));
  }
  for (const auto& c : p.quadratics()) {
    out.push_back(std::make_unique<QuadBarrier>(c, quad_scale(c), shift_var, relax));
  }
  for (const auto& c : p.lmis()) {
    out.push_back(std::make_unique<LmiBarrier>(c, lmi_scale(c), shift_var, relax));
  }
  return out;
}

struct Equalities {
  Mat a;  // independent, normalized rows; width = original variable count
  Vec b;
};

Equalities build_equalities(const ConicProgram& p, int n, std::string& inconsistent) {
  const auto rows = static_cast<Eigen::Index>(p.equalities().size());
  Equalities eq;
  if (rows == 0) {
    eq.a = Mat::Zero(0, n);
    eq.b = Vec::Zero(0);
    return eq;
  }
  Mat a = Mat::Zero(rows, n);
  Vec b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& c = p.equalities()[static_cast<std::size_t>(r)];
    for (const auto& t : c.expr) a(r, t.var) += t.coeff;
    const double nr = a.row(r).norm();
    if (nr == 0.0) {
      if (std::abs(c.rhs) > 0.0) inconsistent = c.label;
      b[r] = 0.0;
      continue;
    }
    a.row(r) /= nr;
    b[r] = c.rhs / nr;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(a.transpose());
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  eq.a.resize(rank, n);
  eq.b.resize(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    const auto r = qr.colsPermutation().indices()[k];
    eq.a.row(k) = a.row(r);
    eq.b[k] = b[r];
  }
  // Dropped rows must be implied by the kept ones.
  if (rank > 0 && rank < rows) {
    const Vec x = eq.a.completeOrthogonalDecomposition().solve(eq.b);
    const Vec res = a * x - b;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::abs(res[r]) > 1e-8 * (1.0 + std::abs(b[r]))) {
        inconsistent = p.equalities()[static_cast<std::size_t>(r)].label;
      }
    }
  }
  return eq;
}

// Barrier state over an (optionally augmented) variable vector.
struct Stage {
  const std::vector<std::unique_ptr<Barrier>>* barriers = nullptr;
  Vec c;
  Mat a;
  Vec b;
  double degree = 0.0;

  bool inside(const Vec& x) const {
    return std::all_of(barriers->begin(), barriers->end(),
                       [&](const auto& br) { return br->inside(x); });
  }
  /// Slope of t c^T x + barrier along dx; values within roundoff of zero
  /// (relative to the magnitude of the summed terms) are reported as zero.
  double slope(const Vec& x, const Vec& dx, double t) const {
    double d = t * c.dot(dx);
    double mag = std::abs(d);
    for (const auto& br : *barriers) {
      const double v = br->directional(x, dx);
      d += v;
      mag += std::abs(v);
    }
    return std::abs(d) <= kSlopeNoise * mag ? 0.0 : d;
  }
};

struct NewtonStep {
  Vec dx;
  double decrement2 = 0.0;
  bool ok = false;
};

NewtonStep newton_step(const Stage& st, const Vec& x, double t) {
  const auto n = x.size();
  Vec grad = t * st.c;
  Mat hess = Mat::Zero(n, n);
  for (const auto& br : *st.barriers) br->add_derivatives(x, grad, hess);
  hess = 0.5 * (hess + hess.transpose());

  NewtonStep out;
  const auto p = st.a.rows();
  const double reg = 1e-14 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
  if (p == 0) {
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() == Eigen::Success) {
      out.dx = -llt.solve(grad);
    } else {
      hess.diagonal().array() += reg;
      out.dx = -hess.ldlt().solve(grad);
    }
  } else {
    Mat kkt = Mat::Zero(n + p, n + p);
    kkt.topLeftCorner(n, n) = hess;
    kkt.topLeftCorner(n, n).diagonal().array() += reg;
    kkt.topRightCorner(n, p) = st.a.transpose();
    kkt.bottomLeftCorner(p, n) = st.a;
    Vec rhs(n + p);
    rhs.head(n) = -grad;
    rhs.tail(p) = st.b - st.a * x;
    out.dx = kkt.partialPivLu().solve(rhs).head(n);
  }
  if (!out.dx.allFinite()) return out;
  out.decrement2 = std::max(0.0, out.dx.dot(hess * out.dx));
  out.ok = true;
  return out;
}

enum class PathExit { Converged, EarlyStop, IterationLimit, Stalled, Unbounded, Numerical };

struct PathResult {
  PathExit exit = PathExit::Numerical;
  Vec x;
  double t = 1.0;
  int iterations = 0;
  double decrement = 0.0;
};

// Follows the central path from a strictly feasible x0. `stop_value` ends the
// run as soon as x[stop_var] drops below it (phase I).
template <typename Done>
PathResult follow_path(const Stage& st, Vec x, double t, int max_iter, Done done,
                       int stop_var, double stop_value) {
  PathResult r;
  r.x = std::move(x);
  r.t = t;
  while (true) {
    for (int inner = 0;; ++inner) {
      const NewtonStep step = newton_step(st, r.x, r.t);
      if (!step.ok) {
        r.exit = PathExit::Numerical;
        return r;
      }
      r.decrement = std::sqrt(step.decrement2);
      if (step.decrement2 / 2.0 <= kCenteringTol) break;
      if (r.iterations >= max_iter) {
        r.exit = PathExit::IterationLimit;
        return r;
      }
      // Largest unit-or-shorter step inside the domain, then bisection on
      // the slope of the convex merit along the Newton direction. The damped
      // step 1/(1+lambda) always decreases a self-concordant merit, so it is
      // a floor when slopes are lost in roundoff.
      double tau = 1.0;
      Vec trial = r.x + tau * step.dx;
      int halvings = 0;
      while (!st.inside(trial) && halvings < 60) {
        tau *= 0.5;
        trial = r.x + tau * step.dx;
        ++halvings;
      }
      if (halvings < 60 && st.slope(trial, step.dx, r.t) > 0.0) {
        double lo = 0.0, hi = tau;
        for (int b = 0; b < kSlopeBisections; ++b) {
          const double mid = 0.5 * (lo + hi);
          if (st.slope(r.x + mid * step.dx, step.dx, r.t) > 0.0) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        const double damped = 1.0 / (1.0 + r.decrement);
        tau = std::max(lo, std::min(damped, tau));
        trial = r.x + tau * step.dx;
      }
      ++r.iterations;
      if (halvings >= 60) {
        r.exit = PathExit::Stalled;
        return r;
      }
      if (inner >= kMaxCentering) {
        r.x = std::move(trial);
        break;
      }
      r.x = std::move(trial);
      if (!r.x.allFinite()) {
        r.exit = PathExit::Numerical;
        return r;
      }
      if (r.x.lpNorm<Eigen::Infinity>() > kUnboundedNorm) {
        r.exit = PathExit::Unbounded;
        return r;
      }
      if (stop_var >= 0 && r.x[stop_var] < stop_value) {
        r.exit = PathExit::EarlyStop;
        return r;
      }
    }
    if (done(r.x, r.t)) {
      r.exit = PathExit::Converged;
      return r;
    }
    r.t *= kGrowth;
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

SolveOutcome finish(const ConicProgram& p, SolveStatus status, const Vec& x, std::string msg) {
  SolveOutcome out;
  out.status = status;
  out.x = x;
  out.objective = x.size() == p.num_variables() ? p.evaluate_objective(x) : 0.0;
  out.message = std::move(msg);
  return out;
}

}  // namespace

SolveOutcome solve(const ConicProgram& program, const SolverSettings& settings,
                   const std::optional<Vec>& start) {
  program.validate();
  const int n = program.num_variables();

  std::string inconsistent;
  Equalities eq = build_equalities(program, n, inconsistent);
  if (!inconsistent.empty()) {
    SolveOutcome out = finish(program, SolveStatus::Infeasible, Vec::Zero(n),
                              "inconsistent equality constraints");
    out.binding_constraint = inconsistent;
    return out;
  }

  Vec x0 = start && start->size() == n && start->allFinite() ? *start : Vec(Vec::Zero(n));
  if (eq.a.rows() > 0) x0 += eq.a.completeOrthogonalDecomposition().solve(eq.b - eq.a * x0);

  const Vec& c_raw = program.objective();
  const double c_scale = c_raw.lpNorm<Eigen::Infinity>() > 0.0 ? c_raw.lpNorm<Eigen::Infinity>() : 1.0;
  const Vec c = c_raw / c_scale;

  auto plain = build_barriers(program, -1, 0.0);
  int total_iterations = 0;

  // ---- phase I -------------------------------------------------------------------
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& br : plain) worst = std::max(worst, br->violation(x0));

  Vec x_start = x0;
  bool relaxed = false;
  double relax = 0.0;
  if (plain.empty()) {
    // Only equalities: optimal iff c lies in the row space of A.
    Vec proj = c;
    if (eq.a.rows() > 0) proj -= eq.a.transpose() * eq.a.transpose().colPivHouseholderQr().solve(c);
    if (proj.norm() > 1e-10) return finish(program, SolveStatus::Unbounded, x0, "no inequality constraints");
    return finish(program, SolveStatus::Optimal, x0, "");
  }

  if (worst >= -1e-6) {
    const int sv = n;
    auto shifted = build_barriers(program, sv, 0.0);
    // Keep the shift bounded below: -s <= 1.
    Sparse lb;
    lb.idx.push_back(sv);
    lb.val.push_back(-1.0);
    shifted.push_back(std::make_unique<LinearBarrier>(std::move(lb), 1.0, "phase-I bound"));

    Stage st1;
    st1.barriers = &shifted;
    // A faint copy of the real objective keeps directions that only the
    // objective bounds from running off during the search.
    st1.c = Vec::Zero(n + 1);
    st1.c.head(n) = kPhaseOneObjectiveWeight * c;
    st1.c[sv] = 1.0;
    st1.a = Mat::Zero(eq.a.rows(), n + 1);
    st1.a.leftCols(n) = eq.a;
    st1.b = eq.b;
    for (const auto& br : shifted) st1.degree += br->degree();

    Vec xa(n + 1);
    xa.head(n) = x0;
    xa[sv] = std::max(worst, 0.0) + 1.0;

    const double target = 0.1 * settings.feas_tol;
    auto done = [&](const Vec& x, double t) { return x[sv] < 0.0 || st1.degree / t <= target; };
    PathResult r1 = follow_path(st1, xa, 1.0, settings.max_iterations, done, sv, -1e-4);
    total_iterations += r1.iterations;

    Vec xs = r1.x;
    const double s_final = xs[sv];
    const double lower = r1.exit == PathExit::Converged ? s_final - st1.degree / r1.t : s_final;
    if (s_final < 0.0) {
      x_start = xs.head(n);
    } else if (lower > settings.feas_tol ||
               (r1.exit != PathExit::Converged && r1.exit != PathExit::Stalled &&
                r1.exit != PathExit::IterationLimit)) {
      Vec probe = xs;
      probe[sv] = 0.0;
      std::string binding;
      double w = -std::numeric_limits<double>::infinity();
      for (const auto& br : plain) {
        const double v = br->violation(probe.head(n));
        if (v > w) {
          w = v;
          binding = br->label();
        }
      }
      SolveOutcome out = finish(program, SolveStatus::Infeasible, xs.head(n),
                                "phase I optimum " + sci(s_final));
      out.binding_constraint = binding;
      out.iterations = total_iterations;
      out.residuals.primal = s_final;
      return out;
    } else {
      // Feasible set has (numerically) empty interior: widen every
      // constraint a little and report the result as inaccurate.
      relaxed = true;
      relax = s_final + settings.feas_tol;
      x_start = xs.head(n);
    }
  }

  // ---- phase II ------------------------------------------------------------------
  auto barriers = relaxed ? build_barriers(program, -1, relax) : std::move(plain);
  Stage st2;
  st2.barriers = &barriers;
  st2.c = c;
  st2.a = eq.a;
  st2.b = eq.b;
  for (const auto& br : barriers) st2.degree += br->degree();

  if (!st2.inside(x_start)) {
    return finish(program, SolveStatus::Failed, x_start, "phase I returned a boundary point");
  }

  auto done = [&](const Vec& x, double t) {
    return st2.degree / t <= settings.gap_tol * std::max(1.0, std::abs(c.dot(x)));
  };
  PathResult r2 = follow_path(st2, x_start, 1.0, settings.max_iterations, done, -1, 0.0);
  total_iterations += r2.iterations;

  SolveStatus status = SolveStatus::Optimal;
  std::string msg;
  switch (r2.exit) {
    case PathExit::Converged:
      status = relaxed ? SolveStatus::Inaccurate : SolveStatus::Optimal;
      if (relaxed) msg = "constraints relaxed by " + sci(relax);
      break;
    case PathExit::IterationLimit:
      status = SolveStatus::Inaccurate;
      msg = "iteration limit";
      break;
    case PathExit::Stalled:
      status = SolveStatus::Inaccurate;
      msg = "line search stalled";
      break;
    case PathExit::Unbounded:
      return finish(program, SolveStatus::Unbounded, r2.x, "iterates diverged");
    case PathExit::Numerical:
    case PathExit::EarlyStop:
      status = r2.x.allFinite() && st2.inside(r2.x) ? SolveStatus::Inaccurate : SolveStatus::Failed;
      msg = "numerical breakdown";
      break;
  }

  SolveOutcome out = finish(program, status, r2.x, msg);
  out.iterations = total_iterations;
  out.residuals.gap = c_scale * st2.degree / r2.t;
  out.residuals.dual = r2.decrement;
  out.residuals.primal =
      std::max(0.0, eq.a.rows() > 0 ? (eq.a * r2.x - eq.b).lpNorm<Eigen::Infinity>() : 0.0);
  return out;
}

}  // namespace maleo
