#include "maleo/conic.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace maleo {

namespace {

double dot(const LinearExpr& e, const Vec& x) {
  double s = 0.0;
  for (const auto& t : e) s += t.coeff * x[t.var];
  return s;
}

double norm(const LinearExpr& e) {
  double s = 0.0;
  for (const auto& t : e) s += t.coeff * t.coeff;
  return std::sqrt(s);
}

void check_expr(const LinearExpr& e, int n, const std::string& label) {
  for (const auto& t : e) {
    if (t.var < 0 || t.var >= n) {
      throw DomainError("conic program: variable index out of range in '" + label + "'");
    }
    if (!std::isfinite(t.coeff)) {
      throw DomainError("conic program: non-finite coefficient in '" + label + "'");
    }
  }
}

// Index of parameter (i, j), i < j, within the off-diagonal pairs.
int pair_index(int n, int i, int j) { return i * n - i * (i + 1) / 2 + (j - i - 1); }

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Failed: return "failed";
  }
  return "unknown";
}

int ConicProgram::add_block(std::string name, BlockKind kind, int dim) {
  if (dim < 1) throw DomainError("add_block: dimension must be >= 1");
  VariableBlock b;
  b.name = std::move(name);
  b.kind = kind;
  b.offset = num_vars_;
  b.dim = dim;
  b.size = kind == BlockKind::Vector ? dim : dim * dim;
  num_vars_ += b.size;
  blocks_.push_back(b);
  Vec grown = Vec::Zero(num_vars_);
  grown.head(objective_.size()) = objective_;
  objective_ = std::move(grown);
  return b.offset;
}

const VariableBlock& ConicProgram::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw DomainError("conic program: no block named '" + std::string(name) + "'");
}

void ConicProgram::add_objective(const LinearExpr& expr) {
  check_expr(expr, num_vars_, "objective");
  for (const auto& t : expr) objective_[t.var] += t.coeff;
}

void ConicProgram::add_equality(LinearExpr expr, double rhs, std::string label) {
  equalities_.push_back({std::move(expr), rhs, std::move(label)});
}

void ConicProgram::add_inequality(LinearExpr expr, double rhs, std::string label) {
  inequalities_.push_back({std::move(expr), rhs, std::move(label)});
}

void ConicProgram::add_soc(SocConstraint c) { socs_.push_back(std::move(c)); }
void ConicProgram::add_quadratic(QuadraticConstraint c) { quadratics_.push_back(std::move(c)); }
void ConicProgram::add_lmi(LmiConstraint c) { lmis_.push_back(std::move(c)); }

int ConicProgram::lmi_count(int dim) const {
  return static_cast<int>(
      std::count_if(lmis_.begin(), lmis_.end(), [&](const LmiConstraint& l) { return l.dim == dim; }));
}

void ConicProgram::validate() const {
  const int n = num_vars_;
  if (n == 0) throw DomainError("conic program: no variables");
  if (!objective_.allFinite()) throw DomainError("conic program: non-finite objective");
  for (const auto& c : equalities_) check_expr(c.expr, n, c.label);
  for (const auto& c : inequalities_) check_expr(c.expr, n, c.label);
  for (const auto& c : socs_) {
    if (static_cast<Eigen::Index>(c.rows.size()) != c.offsets.size()) {
      throw DomainError("conic program: SOC '" + c.label + "' row/offset mismatch");
    }
    for (const auto& r : c.rows) check_expr(r, n, c.label);
    check_expr(c.bound, n, c.label);
  }
  for (const auto& c : quadratics_) {
    const auto k = static_cast<Eigen::Index>(c.vars.size());
    if (c.quad.rows() != k || c.quad.cols() != k) {
      throw DomainError("conic program: quadratic '" + c.label + "' size mismatch");
    }
    for (int v : c.vars) {
      if (v < 0 || v >= n) throw DomainError("conic program: bad index in '" + c.label + "'");
    }
    check_expr(c.linear, n, c.label);
    if (k > 0) {
      const double scale = std::max(1.0, c.quad.cwiseAbs().maxCoeff());
      if ((c.quad - c.quad.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("conic program: quadratic '" + c.label + "' not symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(c.quad, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw DomainError("conic program: quadratic '" + c.label + "' not convex");
      }
    }
  }
  for (const auto& c : lmis_) {
    if (c.dim < 1 || c.constant.rows() != c.dim || c.constant.cols() != c.dim) {
      throw DomainError("conic program: LMI '" + c.label + "' size mismatch");
    }
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= n) throw DomainError("conic program: bad index in '" + c.label + "'");
      for (const auto& e : t.entries) {
        if (e.row < 0 || e.col < e.row || e.col >= c.dim) {
          throw DomainError("conic program: LMI '" + c.label + "' entry outside upper triangle");
        }
      }
    }
  }
}

double ConicProgram::evaluate_objective(const Vec& x) const {
  return objective_.dot(x) + objective_offset_;
}

void ConicProgram::write_triplets(std::ostream& os) const {
  os << "vars " << num_vars_ << '\n';
  for (const auto& b : blocks_) {
    os << "block " << b.name << ' ' << b.offset << ' ' << b.size << ' ' << b.dim << '\n';
  }
  for (int i = 0; i < num_vars_; ++i) {
    if (objective_[i] != 0.0) os << "c " << i << ' ' << objective_[i] << '\n';
  }
  auto row = [&](const char* tag, std::size_t r, const LinearExpr& e) {
    for (const auto& t : e) os << tag << ' ' << r << ' ' << t.var << ' ' << t.coeff << '\n';
  };
  for (std::size_t r = 0; r < equalities_.size(); ++r) {
    row("A", r, equalities_[r].expr);
    os << "b " << r << ' ' << equalities_[r].rhs << '\n';
  }
  for (std::size_t r = 0; r < inequalities_.size(); ++r) {
    row("G", r, inequalities_[r].expr);
    os << "h " << r << ' ' << inequalities_[r].rhs << '\n';
  }
  for (std::size_t s = 0; s < socs_.size(); ++s) {
    os << "soc " << s << ' ' << socs_[s].rows.size() << '\n';
    for (std::size_t r = 0; r < socs_[s].rows.size(); ++r) row("socF", r, socs_[s].rows[r]);
  }
  for (std::size_t s = 0; s < lmis_.size(); ++s) {
    os << "lmi " << s << ' ' << lmis_[s].dim << '\n';
    for (const auto& t : lmis_[s].terms) {
      for (const auto& e : t.entries) {
        os << "F " << t.var << ' ' << e.row << ' ' << e.col << ' ' << e.value << '\n';
      }
    }
  }
}

double max_violation(const ConicProgram& p, const Vec& x, std::string* label) {
  double worst = -std::numeric_limits<double>::infinity();
  auto consider = [&](double v, const std::string& l) {
    if (v > worst) {
      worst = v;
      if (label) *label = l;
    }
  };
  for (const auto& c : p.equalities()) {
    consider(std::abs(dot(c.expr, x) - c.rhs) / std::max(1.0, norm(c.expr)), c.label);
  }
  for (const auto& c : p.inequalities()) {
    consider((dot(c.expr, x) - c.rhs) / std::max(1e-300, norm(c.expr)), c.label);
  }
  for (const auto& c : p.socs()) {
    double s = 0.0;
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
      const double v = dot(c.rows[r], x) + c.offsets[static_cast<Eigen::Index>(r)];
      s += v * v;
    }
    consider(std::sqrt(s) - dot(c.bound, x) - c.bound_offset, c.label);
  }
  for (const auto& c : p.quadratics()) {
    Vec z(static_cast<Eigen::Index>(c.vars.size()));
    for (std::size_t i = 0; i < c.vars.size(); ++i) z[static_cast<Eigen::Index>(i)] = x[c.vars[i]];
    consider(z.dot(c.quad * z) + dot(c.linear, x) + c.constant, c.label);
  }
  for (const auto& c : p.lmis()) {
    Mat s = c.constant;
    for (const auto& t : c.terms) {
      for (const auto& e : t.entries) {
        s(e.row, e.col) += x[t.var] * e.value;
        if (e.row != e.col) s(e.col, e.row) += x[t.var] * e.value;
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    consider(-es.eigenvalues().minCoeff(), c.label);
  }
  return worst;
}

// ---- Hermitian helpers -------------------------------------------------------

Mat hermitian_embed(const CMat& h) {
  if (h.rows() != h.cols()) throw DomainError("hermitian_embed: matrix not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("hermitian_embed: matrix not Hermitian");
  }
  const Eigen::Index n = h.rows();
  Mat e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.bottomRightCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  return e;
}

CMat hermitian_extract(const Mat& embedded) {
  const Eigen::Index n = embedded.rows() / 2;
  if (embedded.rows() != 2 * n || embedded.cols() != 2 * n) {
    throw DomainError("hermitian_extract: expected an even square matrix");
  }
  CMat h(n, n);
  h.real() = 0.5 * (embedded.topLeftCorner(n, n) + embedded.bottomRightCorner(n, n));
  h.imag() = 0.5 * (embedded.bottomLeftCorner(n, n) - embedded.topRightCorner(n, n));
  return h;
}

Vec hermitian_params(const CMat& h) {
  const int n = static_cast<int>(h.rows());
  Vec x(n * n);
  for (int i = 0; i < n; ++i) x[i] = h(i, i).real();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = n + 2 * pair_index(n, i, j);
      x[k] = h(i, j).real();
      x[k + 1] = h(i, j).imag();
    }
  }
  return x;
}

CMat hermitian_from_params(const Vec& x, int offset, int n) {
  if (offset < 0 || offset + n * n > x.size()) throw DomainError("hermitian_from_params: range");
  CMat h(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = x[offset + i];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = offset + n + 2 * pair_index(n, i, j);
      h(i, j) = cplx(x[k], x[k + 1]);
      h(j, i) = cplx(x[k], -x[k + 1]);
    }
  }
  return h;
}

CMat hermitian_basis(int n, int k) {
  Vec x = Vec::Zero(n * n);
  x[k] = 1.0;
  return hermitian_from_params(x, 0, n);
}

LinearExpr hermitian_trace_terms(const CMat& g, int offset, double scale) {
  const int n = static_cast<int>(g.rows());
  LinearExpr e;
  e.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) e.push_back({offset + i, scale * g(i, i).real()});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = offset + n + 2 * pair_index(n, i, j);
      e.push_back({k, scale * (g(i, j).real() + g(j, i).real())});
      e.push_back({k + 1, scale * (g(i, j).imag() - g(j, i).imag())});
    }
  }
  return e;
}

std::vector<MatrixEntry> hermitian_embedding_entries(int n, int k) {
  if (k < 0 || k >= n * n) throw DomainError("hermitian_embedding_entries: index out of range");
  if (k < n) return {{k, k, 1.0}, {n + k, n + k, 1.0}};
  const int p = (k - n) / 2;
  int i = 0;
  while (pair_index(n, i, n - 1) < p) ++i;
  const int j = p - pair_index(n, i, i + 1) + i + 1;
  if ((k - n) % 2 == 0) return {{i, j, 1.0}, {n + i, n + j, 1.0}};
  return {{i, n + j, -1.0}, {j, n + i, 1.0}};
}

}  // namespace maleo
