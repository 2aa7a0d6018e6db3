// Direct sparse solves for the saddle-point Oseen systems (SparseLU with
// column reordering; the symbolic analysis is reusable across refactorizations
// with an identical sparsity pattern).

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mhdwg/assembly.hpp"

namespace mhdwg {

struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

class LinearSolver {
public:
  void factorize(const SpMat& A) {
    if (!analyzed_) {
      lu_.analyzePattern(A);
      analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success)
      throw SolveError("sparse factorization failed: " + lu_.lastErrorMessage());
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) throw SolveError("sparse backsolve failed");
    return x;
  }

private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

inline double relative_residual(const SpMat& A, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& b) {
  double nb = b.norm();
  return (A * x - b).norm() / (nb > 0 ? nb : 1.0);
}

// One-shot convenience solve with a residual check.
inline Eigen::VectorXd solve_linear(const SparseSystem& sys, double* residual = nullptr) {
  LinearSolver s;
  s.factorize(sys.A);
  Eigen::VectorXd x = s.solve(sys.b);
  double r = relative_residual(sys.A, x, sys.b);
  if (residual) *residual = r;
  return x;
}

}  // namespace mhdwg
