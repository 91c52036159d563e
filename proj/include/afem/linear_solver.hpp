#pragma once

#include <afem/error.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <string_view>

namespace afem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

enum class LinearSolverKind { direct, cg };

inline LinearSolverKind parse_linear_solver(std::string_view name) {
  if (name == "direct") return LinearSolverKind::direct;
  if (name == "cg") return LinearSolverKind::cg;
  throw InputError("unknown linear solver '" + std::string(name) + "'");
}

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::direct;
  double rel_tol = 1e-12; // cg only; the direct solver is exact up to rounding
  int max_iter = 20000;
};

/// Solver for an SPD system that is factorized (or preconditioned) once and
/// then applied to many right-hand sides.
class SpdSolver {
public:
  SpdSolver(std::shared_ptr<const SparseMatrix> matrix, LinearSolverOptions options)
      : matrix_(std::move(matrix)), options_(options) {
    if (matrix_->rows() == 0) return;
    if (options_.kind == LinearSolverKind::direct) {
      direct_ = std::make_unique<Direct>();
      direct_->compute(*matrix_);
      if (direct_->info() != Eigen::Success) throw SolverError("Cholesky factorization failed", 0.0);
    } else {
      cg_ = std::make_unique<Cg>();
      cg_->setTolerance(options_.rel_tol);
      cg_->setMaxIterations(options_.max_iter);
      cg_->compute(*matrix_);
      if (cg_->info() != Eigen::Success) throw SolverError("incomplete Cholesky preconditioner failed", 0.0);
    }
  }

  [[nodiscard]] Vector solve(const Vector& rhs) const {
    if (matrix_->rows() == 0) return Vector(0);
    if (direct_) return direct_->solve(rhs);
    Vector x = cg_->solve(rhs);
    if (cg_->info() != Eigen::Success || cg_->error() > options_.rel_tol)
      throw SolverError("conjugate gradients did not reach the requested tolerance", cg_->error());
    return x;
  }

  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return *matrix_; }
  [[nodiscard]] const LinearSolverOptions& options() const noexcept { return options_; }

private:
  using Direct = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;

  std::shared_ptr<const SparseMatrix> matrix_;
  LinearSolverOptions options_;
  std::unique_ptr<Direct> direct_;
  std::unique_ptr<Cg> cg_;
};

} // namespace afem
