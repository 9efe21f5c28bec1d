#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maleo {

/// Input outside the mathematical domain of an operation (coincident points,
/// negative radicands, non-Hermitian matrices, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The 4x4 angle-domain Fisher information could not be inverted reliably.
class SingularFimError : public std::runtime_error {
 public:
  SingularFimError(double min_eigenvalue, double condition)
      : std::runtime_error("singular Fisher information matrix (min eigenvalue " +
                           std::to_string(min_eigenvalue) + ", condition " +
                           std::to_string(condition) + ")"),
        min_eigenvalue_(min_eigenvalue),
        condition_(condition) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  double condition() const noexcept { return condition_; }

 private:
  double min_eigenvalue_;
  double condition_;
};

/// Gaussian randomization produced no feasible rank-1 candidate.
class RecoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A conic subproblem was declared infeasible; carries the constraint label
/// with the largest violation at the phase-I optimum.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::string binding)
      : std::runtime_error(what + " (binding constraint: " + binding + ")"),
        binding_(std::move(binding)) {}

  const std::string& binding_constraint() const noexcept { return binding_; }

 private:
  std::string binding_;
};

/// Scenario configuration failed validation. Each issue names its key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid scenario configuration";
    for (const auto& i : issues) out += "\n  " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace maleo
