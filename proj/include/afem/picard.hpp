#pragma once

/// Discrete Zarantonello (Picard) iteration
///   Φv = v − (α/L²) I⁻¹(Av − F),
/// where I is the Riesz map of the Dirichlet form, its stopping logic, and a
/// damped Newton solver that serves as reference for the exact discrete
/// solution u⋆ of ⟨Au⋆, v⟩ = F(v).

#include <afem/error.hpp>
#include <afem/fe_space.hpp>
#include <afem/linear_solver.hpp>
#include <afem/nonlinear_operator.hpp>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace afem {

struct PicardConfig {
  double lambda = 0.1; // stop once ‖uⁿ − uⁿ⁻¹‖_H ≤ λ η(uⁿ)
  int max_iter = 10000;
  LinearSolverOptions linear;
};

struct PicardStep {
  int n = 0;
  double increment = 0.0; // ‖uⁿ − uⁿ⁻¹‖_H
  double estimator = 0.0; // η(uⁿ)
};

struct PicardTrace {
  std::vector<PicardStep> steps;
  [[nodiscard]] int count() const noexcept { return static_cast<int>(steps.size()); }
};

enum class PicardStatus { converged, lucky_breakdown, not_terminated };

struct PicardResult {
  FEFunction u;
  PicardTrace trace;
  PicardStatus status = PicardStatus::not_terminated;
};

struct PicardUpdate {
  FEFunction u;
  double increment = 0.0;
};

/// One Picard step together with its increment norm.
inline PicardUpdate picard_update(const DiscreteProblem& dp, const FEFunction& u_prev) {
  const Vector w = dp.solver().solve(residual_vector(dp, u_prev));
  const double s = dp.problem().step_factor();
  FEFunction u = u_prev;
  const auto& free = dp.space().free_vertices();
  for (std::size_t i = 0; i < free.size(); ++i) u.values[free[i]] -= s * w[static_cast<Index>(i)];
  return {std::move(u), s * dp.free_h_norm(w)};
}

inline FEFunction picard_step(const DiscreteProblem& dp, const FEFunction& u_prev) {
  return picard_update(dp, u_prev).u;
}

using EstimatorCallback = std::function<double(const FEFunction&)>;

/// Picard steps from u0 until ‖uⁿ − uⁿ⁻¹‖_H ≤ λ η(uⁿ) (n ≥ 1), re-evaluating
/// the estimator after every step.
inline PicardResult iterate_until_stop(const DiscreteProblem& dp, FEFunction u0, const EstimatorCallback& estimator,
                                       const PicardConfig& config) {
  if (!(config.lambda > 0.0) || config.max_iter < 1) throw ConfigurationError("Picard: need lambda > 0, max_iter >= 1");
  PicardResult result{std::move(u0), {}, PicardStatus::not_terminated};
  for (int n = 1; n <= config.max_iter; ++n) {
    PicardUpdate step = picard_update(dp, result.u);
    const double eta = estimator(step.u);
    result.trace.steps.push_back({n, step.increment, eta});
    result.u = std::move(step.u);
    if (eta == 0.0 && step.increment == 0.0) {
      result.status = PicardStatus::lucky_breakdown;
      return result;
    }
    if (step.increment <= config.lambda * eta) {
      result.status = PicardStatus::converged;
      return result;
    }
  }
  return result;
}

/// Computable bound ‖u⋆ − uⁿ‖_H ≤ q/(1−q) ‖uⁿ − uⁿ⁻¹‖_H.
inline double apriori_bound(const MonotoneProblem& problem, double increment_norm) {
  return problem.q / (1.0 - problem.q) * increment_norm;
}

/// ‖u⋆ − uⁿ‖_H ≤ qⁿ/(1−q) ‖u¹ − u⁰‖_H.
inline double apriori_bound_from_first_step(const MonotoneProblem& problem, double first_increment, int n) {
  return std::pow(problem.q, n) / (1.0 - problem.q) * first_increment;
}

/// ‖u¹ − u⁰‖_H ≤ (α/L) ‖u⁰ − u⋆‖_H.
inline double first_step_bound(const MonotoneProblem& problem, double u_star_norm_gap) {
  return problem.alpha / problem.lip * u_star_norm_gap;
}

/// ‖I⁻¹(Av − F)‖_H, the dual norm of the discrete residual.
inline double lifted_residual_norm(const DiscreteProblem& dp, const FEFunction& v) {
  const Vector r = residual_vector(dp, v);
  if (r.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, r.dot(dp.solver().solve(r))));
}

/// Jacobian of v ↦ ⟨Av, φ_i⟩ on the free dofs:
///   ∫ μ ∇φ_j·∇φ_i + 2 ∂μ/∂t (∇v·∇φ_j)(∇v·∇φ_i).
inline SparseMatrix assemble_jacobian(const DiscreteProblem& dp, const FEFunction& v) {
  const FESpace& space = dp.space();
  const Triangulation& mesh = space.mesh();
  const Nonlinearity& mu = dp.problem().nonlinearity;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.n_elements()));
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Vec2 g = space.gradient(v.values, e);
    const double t = dot(g, g);
    double a = 0.0;
    double b = 0.0;
    if (mu.x_dependent) {
      a = integrate_triangle(mesh.corners(e), [&](Point x) { return mu.value(x, t); });
      b = 2.0 * integrate_triangle(mesh.corners(e), [&](Point x) { return mu.derivative(x, t); });
    } else {
      a = space.area(e) * mu.value(Point{}, t);
      b = 2.0 * space.area(e) * mu.derivative(Point{}, t);
    }
    const auto& grads = space.gradients(e);
    const auto& vid = mesh.element(e).v;
    for (int i = 0; i < 3; ++i) {
      const Index di = space.dof(vid[i]);
      if (di == invalid_index) continue;
      for (int j = 0; j < 3; ++j) {
        const Index dj = space.dof(vid[j]);
        if (dj == invalid_index) continue;
        triplets.emplace_back(di, dj, a * dot(grads[i], grads[j]) + b * dot(g, grads[i]) * dot(g, grads[j]));
      }
    }
  }
  SparseMatrix jac(space.n_free(), space.n_free());
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

struct NewtonReport {
  FEFunction u;
  int newton_steps = 0;
  int picard_fallback_steps = 0;
  double residual = 0.0; // lifted residual norm at u
};

/// Damped Newton for the discrete Galerkin solution, with an energy (Armijo)
/// or residual-decrease acceptance test; falls back to Picard steps on stagnation.
inline NewtonReport newton_solve(const DiscreteProblem& dp, double tol = 1e-12,
                                 std::optional<FEFunction> initial = std::nullopt) {
  if (!(tol > 0.0)) throw ConfigurationError("Newton: tol must be positive");
  NewtonReport rep{initial ? dp.with_dirichlet_data(*initial) : dp.zero_guess(), 0, 0, 0.0};
  const auto& free = dp.space().free_vertices();
  const auto shifted = [&](const FEFunction& u, const Vector& d, double s) {
    FEFunction out = u;
    for (std::size_t i = 0; i < free.size(); ++i) out.values[free[i]] += s * d[static_cast<Index>(i)];
    return out;
  };

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;
  Vector r = residual_vector(dp, rep.u);
  rep.residual = r.size() ? std::sqrt(std::max(0.0, r.dot(dp.solver().solve(r)))) : 0.0;
  int slow_steps = 0;
  constexpr int max_newton = 100;
  while (rep.residual > tol && rep.newton_steps < max_newton && slow_steps < 4) {
    const SparseMatrix jac = assemble_jacobian(dp, rep.u);
    if (!analyzed) {
      ldlt.analyzePattern(jac);
      analyzed = true;
    }
    ldlt.factorize(jac);
    if (ldlt.info() != Eigen::Success) break;
    const Vector delta = -ldlt.solve(r);
    const double slope = r.dot(delta);
    const double e0 = energy(dp, rep.u);
    double s = 1.0;
    bool accepted = false;
    while (s > 1e-10) {
      FEFunction trial = shifted(rep.u, delta, s);
      const Vector r_trial = residual_vector(dp, trial);
      const double res_trial = std::sqrt(std::max(0.0, r_trial.dot(dp.solver().solve(r_trial))));
      if (energy(dp, trial) <= e0 + 1e-4 * s * slope || res_trial < (1.0 - 1e-4 * s) * rep.residual) {
        slow_steps = res_trial > 0.5 * rep.residual ? slow_steps + 1 : 0;
        rep.u = std::move(trial);
        r = r_trial;
        rep.residual = res_trial;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    ++rep.newton_steps;
    if (!accepted) break;
  }

  // Picard converges for any start; it only has to take over when Newton stalls.
  while (rep.residual > tol && rep.picard_fallback_steps < 20000) {
    rep.u = picard_step(dp, rep.u);
    rep.residual = lifted_residual_norm(dp, rep.u);
    ++rep.picard_fallback_steps;
  }
  if (rep.residual > tol) throw SolverError("Newton reference solver did not reach the tolerance", rep.residual);
  return rep;
}

inline FEFunction newton_reference(const DiscreteProblem& dp, double tol = 1e-12) {
  return newton_solve(dp, tol).u;
}

} // namespace afem
