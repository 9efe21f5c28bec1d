// Conic-program description shared by both optimization subproblems, and the
// interior-point solver contract that consumes it.
//
// Decision vector x in R^n. Supported constraints:
//   equality       a^T x == b
//   inequality     a^T x <= b
//   second-order   || F x + f || <= g^T x + h
//   quadratic      z^T Q z + l^T x + r <= 0,  z = x[vars], Q PSD
//   LMI            F_0 + sum_v x_v F_v  is PSD (real symmetric)
//
// Complex Hermitian PSD variables enter through the real embedding
// [[Re H, -Im H], [Im H, Re H]]; the embedded matrix is parameterized by the
// n^2 real degrees of freedom of H, so it always represents exactly one
// Hermitian matrix.
#pragma once

#include "maleo/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maleo {

struct LinearTerm {
  int var = 0;
  double coeff = 0.0;
};
using LinearExpr = std::vector<LinearTerm>;

/// Entry of a symmetric coefficient matrix; only row <= col is stored.
struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

enum class BlockKind { Vector, SymmetricMatrix, HermitianMatrix };

struct VariableBlock {
  std::string name;
  BlockKind kind = BlockKind::Vector;
  int offset = 0;
  int size = 0;  // scalar unknowns
  int dim = 0;   // matrix side length (vector length for Vector)
};

struct LinearConstraint {
  LinearExpr expr;
  double rhs = 0.0;
  std::string label;
};

struct SocConstraint {
  std::vector<LinearExpr> rows;  // F x
  Vec offsets;                   // f
  LinearExpr bound;              // g^T x
  double bound_offset = 0.0;     // h
  std::string label;
};

struct QuadraticConstraint {
  std::vector<int> vars;  // z = x[vars]
  Mat quad;               // Q, PSD, |vars| x |vars|
  LinearExpr linear;
  double constant = 0.0;
  std::string label;
};

struct LmiTerm {
  int var = 0;
  std::vector<MatrixEntry> entries;
};

struct LmiConstraint {
  int dim = 0;
  Mat constant;  // F_0, symmetric
  std::vector<LmiTerm> terms;
  std::string label;
};

class ConicProgram {
 public:
  /// Appends a variable block and returns its offset. Sizes: Vector -> dim,
  /// SymmetricMatrix -> dim*dim (row-major, symmetry imposed by the caller),
  /// HermitianMatrix -> dim*dim real parameters (see hermitian_params).
  int add_block(std::string name, BlockKind kind, int dim);

  const std::vector<VariableBlock>& blocks() const noexcept { return blocks_; }
  const VariableBlock& block(std::string_view name) const;
  int num_variables() const noexcept { return num_vars_; }

  void add_objective(const LinearExpr& expr);
  void set_objective_offset(double v) { objective_offset_ = v; }
  const Vec& objective() const noexcept { return objective_; }
  double objective_offset() const noexcept { return objective_offset_; }

  void add_equality(LinearExpr expr, double rhs, std::string label);
  void add_inequality(LinearExpr expr, double rhs, std::string label);
  void add_soc(SocConstraint c);
  void add_quadratic(QuadraticConstraint c);
  void add_lmi(LmiConstraint c);

  const std::vector<LinearConstraint>& equalities() const noexcept { return equalities_; }
  const std::vector<LinearConstraint>& inequalities() const noexcept { return inequalities_; }
  const std::vector<SocConstraint>& socs() const noexcept { return socs_; }
  const std::vector<QuadraticConstraint>& quadratics() const noexcept { return quadratics_; }
  const std::vector<LmiConstraint>& lmis() const noexcept { return lmis_; }

  /// Number of LMI blocks of the given side length.
  int lmi_count(int dim) const;

  /// Dimension and convexity checks; throws DomainError.
  void validate() const;

  /// Sparse triplet listing for cross-solver debugging.
  void write_triplets(std::ostream& os) const;

  /// Objective value c^T x + offset.
  double evaluate_objective(const Vec& x) const;

 private:
  std::vector<VariableBlock> blocks_;
  int num_vars_ = 0;
  Vec objective_;
  double objective_offset_ = 0.0;
  std::vector<LinearConstraint> equalities_;
  std::vector<LinearConstraint> inequalities_;
  std::vector<SocConstraint> socs_;
  std::vector<QuadraticConstraint> quadratics_;
  std::vector<LmiConstraint> lmis_;
};

enum class SolveStatus { Optimal, Inaccurate, Infeasible, Unbounded, Failed };

std::string_view to_string(SolveStatus s);

struct SolverSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 200;  // Newton steps per phase
};

struct SolveResiduals {
  double primal = 0.0;  // relative equality residual / constraint violation
  double dual = 0.0;    // centrality residual of the final barrier step
  double gap = 0.0;     // duality-gap bound, objective units
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Failed;
  Vec x;
  double objective = 0.0;
  SolveResiduals residuals;
  int iterations = 0;
  std::string binding_constraint;
  std::string message;

  bool usable() const noexcept {
    return status == SolveStatus::Optimal || status == SolveStatus::Inaccurate;
  }
};

/// Log-barrier path-following interior-point method with a phase-I search
/// for a strictly feasible start. Deterministic for identical inputs.
/// `start` is an optional warm start; it is projected onto the equalities and
/// phase I is skipped when the projection is strictly feasible.
SolveOutcome solve(const ConicProgram& program, const SolverSettings& settings = {},
                   const std::optional<Vec>& start = std::nullopt);

/// Largest constraint violation of x, relative to each row's scale
/// (<= 0 means feasible). Equalities contribute |residual|.
double max_violation(const ConicProgram& program, const Vec& x, std::string* label = nullptr);

// ---- Hermitian helpers -----------------------------------------------------
//
// Parameter order for an n x n Hermitian H: the n real diagonal entries, then
// for each i < j in row-major order the pair (Re H_ij, Im H_ij).

/// [[Re H, -Im H], [Im H, Re H]]; throws DomainError if H is not Hermitian (1e-10).
Mat hermitian_embed(const CMat& h);

/// Upper-left n x n complex block of a 2n x 2n real embedding.
CMat hermitian_extract(const Mat& embedded);

Vec hermitian_params(const CMat& h);
CMat hermitian_from_params(const Vec& x, int offset, int n);

/// Basis matrix of parameter k.
CMat hermitian_basis(int n, int k);

/// Re Tr(G H(x)) as a linear expression in the block starting at `offset`,
/// scaled by `scale`.
LinearExpr hermitian_trace_terms(const CMat& g, int offset, double scale = 1.0);

/// Entries (upper triangle) of the 2n x 2n embedding contributed by parameter k.
std::vector<MatrixEntry> hermitian_embedding_entries(int n, int k);

}  // namespace maleo
