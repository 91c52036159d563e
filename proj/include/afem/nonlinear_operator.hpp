#pragma once

/// The quasi-linear operator ⟨Aw, v⟩ = ∫ μ(x, |∇w|²) ∇w·∇v dx, its potential
/// energy, and the two built-in scalar nonlinearities.

#include <afem/error.hpp>
#include <afem/fe_space.hpp>
#include <afem/linear_solver.hpp>
#include <afem/quadrature.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cassert>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace afem {

/// Bounds γ₁ ≤ μ ≤ γ₂ and γ̃₁ ≤ μ + 2t ∂μ/∂t ≤ γ̃₂.
struct MonotonicityBounds {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma1_tilde = 0.0;
  double gamma2_tilde = 0.0;
};

struct Nonlinearity {
  std::string name;
  std::function<double(Point, double)> mu;
  std::function<double(Point, double)> dmu_dt;
  /// ∫₀ᵗ μ(x, ζ) dζ; when empty it is integrated numerically.
  std::function<double(Point, double)> primitive;
  /// ∇ₓμ(x, t); required when x_dependent is set.
  std::function<Vec2(Point, double)> grad_x_mu;
  bool x_dependent = false;
  MonotonicityBounds bounds;
  /// Lipschitz constants of μ and t ∂μ/∂t in x, when μ depends on x.
  std::optional<std::pair<double, double>> x_lipschitz;

  [[nodiscard]] double value(Point x, double t) const {
    assert(t >= 0.0);
    return mu(x, t);
  }

  [[nodiscard]] double derivative(Point x, double t) const {
    assert(t >= 0.0);
    return dmu_dt(x, t);
  }

  [[nodiscard]] double primitive_value(Point x, double t) const {
    assert(t >= 0.0);
    if (primitive) return primitive(x, t);
    if (t == 0.0) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double z) { return mu(x, z); }, 0.0, t, 20, 1e-12);
  }
};

/// μ(t) = 2 + 1/√(1+t): α = 2, L = 3.
inline Nonlinearity builtin_known_solution() {
  Nonlinearity n;
  n.name = "known-solution";
  n.mu = [](Point, double t) { return 2.0 + 1.0 / std::sqrt(1.0 + t); };
  n.dmu_dt = [](Point, double t) { return -0.5 * std::pow(1.0 + t, -1.5); };
  n.primitive = [](Point, double t) { return 2.0 * t + 2.0 * (std::sqrt(1.0 + t) - 1.0); };
  n.bounds = {2.0, 3.0, 2.0, 3.0};
  return n;
}

/// μ(t) = 1 + arctan t: α = 1, L = 1 + √3/2 + π/3 (maximum of μ + 2tμ' at t = √3).
inline Nonlinearity builtin_arctan() {
  Nonlinearity n;
  n.name = "arctan";
  n.mu = [](Point, double t) { return 1.0 + std::atan(t); };
  n.dmu_dt = [](Point, double t) { return 1.0 / (1.0 + t * t); };
  n.primitive = [](Point, double t) { return t + t * std::atan(t) - 0.5 * std::log1p(t * t); };
  n.bounds = {1.0, 1.0 + 0.5 * std::numbers::pi, 1.0, 1.0 + 0.5 * std::sqrt(3.0) + std::numbers::pi / 3.0};
  return n;
}

/// μ ≡ c; the operator is c times the Laplacian and q = 0.
inline Nonlinearity constant_nonlinearity(double c) {
  Nonlinearity n;
  n.name = "constant";
  n.mu = [c](Point, double) { return c; };
  n.dmu_dt = [](Point, double) { return 0.0; };
  n.primitive = [c](Point, double t) { return c * t; };
  n.bounds = {c, c, c, c};
  return n;
}

inline Nonlinearity nonlinearity_by_name(std::string_view name) {
  if (name == "known-solution") return builtin_known_solution();
  if (name == "arctan") return builtin_arctan();
  throw InputError("unknown nonlinearity '" + std::string(name) + "'");
}

struct MonotoneProblem {
  Nonlinearity nonlinearity;
  ScalarField f;         // volume source; empty means 0
  BoundaryFlux g;        // Neumann flux; empty means 0
  ScalarField dirichlet; // Dirichlet data, imposed by nodal interpolation; empty means 0
  double alpha = 0.0;    // strong monotonicity constant γ̃₁
  double lip = 0.0;      // Lipschitz constant γ̃₂
  double q = 0.0;        // Picard contraction factor (1 - α²/L²)^{1/2}

  [[nodiscard]] double step_factor() const noexcept { return alpha / (lip * lip); }
};

using ProblemPtr = std::shared_ptr<const MonotoneProblem>;

inline double contraction_factor(double alpha, double lip) { return std::sqrt(1.0 - (alpha * alpha) / (lip * lip)); }

inline ProblemPtr make_problem(Nonlinearity nonlinearity, ScalarField f = {}, BoundaryFlux g = {},
                               ScalarField dirichlet = {}) {
  const double alpha = nonlinearity.bounds.gamma1_tilde;
  const double lip = nonlinearity.bounds.gamma2_tilde;
  if (!(alpha > 0.0) || !(lip >= alpha)) throw ConfigurationError("problem: need 0 < alpha <= L");
  if (nonlinearity.x_dependent && !nonlinearity.grad_x_mu)
    throw ConfigurationError("problem: x-dependent nonlinearity without grad_x_mu");
  auto p = std::make_shared<MonotoneProblem>();
  p->nonlinearity = std::move(nonlinearity);
  p->f = std::move(f);
  p->g = std::move(g);
  p->dirichlet = std::move(dirichlet);
  p->alpha = alpha;
  p->lip = lip;
  p->q = contraction_factor(alpha, lip);
  return p;
}

/// A problem discretized on one FE space: Riesz matrix and its solver, load
/// vector, Dirichlet values and per-element ∫_T f² for the estimator.
class DiscreteProblem {
public:
  DiscreteProblem(ProblemPtr problem, FESpacePtr space, LinearSolverOptions linear = {})
      : problem_(std::move(problem)), space_(std::move(space)),
        riesz_(std::make_shared<const SparseMatrix>(assemble_riesz(*space_))), solver_(riesz_, linear) {
    const Triangulation& mesh = space_->mesh();
    load_full_ = assemble_load_full(*space_, problem_->f, problem_->g);
    load_ = space_->restrict_to_free(load_full_);
    dirichlet_ = Vector::Zero(space_->n_vertices());
    if (problem_->dirichlet) {
      for (Index v = 0; v < mesh.n_vertices(); ++v) {
        if (space_->is_dirichlet(v)) dirichlet_[v] = problem_->dirichlet(mesh.vertex(v));
      }
    }
    source_sq_.assign(static_cast<std::size_t>(mesh.n_elements()), 0.0);
    if (problem_->f) {
      for (Index e = 0; e < mesh.n_elements(); ++e)
        source_sq_[e] = integrate_triangle(mesh.corners(e), [&](Point x) {
          const double fx = problem_->f(x);
          return fx * fx;
        });
    }
  }

  [[nodiscard]] const MonotoneProblem& problem() const noexcept { return *problem_; }
  [[nodiscard]] const ProblemPtr& problem_ptr() const noexcept { return problem_; }
  [[nodiscard]] const FESpace& space() const noexcept { return *space_; }
  [[nodiscard]] const FESpacePtr& space_ptr() const noexcept { return space_; }
  [[nodiscard]] const Triangulation& mesh() const noexcept { return space_->mesh(); }
  [[nodiscard]] const SparseMatrix& riesz() const noexcept { return *riesz_; }
  [[nodiscard]] const SpdSolver& solver() const noexcept { return solver_; }
  [[nodiscard]] const Vector& load() const noexcept { return load_; }
  [[nodiscard]] const Vector& load_full() const noexcept { return load_full_; }
  [[nodiscard]] const Vector& dirichlet_values() const noexcept { return dirichlet_; }
  [[nodiscard]] const std::vector<double>& source_l2_squared() const noexcept { return source_sq_; }

  /// Zero in the free dofs, Dirichlet data on Γ_D.
  [[nodiscard]] FEFunction zero_guess() const { return {space_, dirichlet_}; }

  [[nodiscard]] FEFunction with_dirichlet_data(FEFunction v) const {
    for (Index i = 0; i < space_->n_vertices(); ++i) {
      if (space_->is_dirichlet(i)) v.values[i] = dirichlet_[i];
    }
    return v;
  }

  [[nodiscard]] FEFunction from_free(const Vector& free_values) const {
    return {space_, space_->extend_from_free(free_values, dirichlet_)};
  }

  /// ‖w‖_H for a free-dof vector w (zero on Γ_D).
  [[nodiscard]] double free_h_norm(const Vector& w) const {
    return std::sqrt(std::max(0.0, w.dot(*riesz_ * w)));
  }

private:
  ProblemPtr problem_;
  FESpacePtr space_;
  std::shared_ptr<const SparseMatrix> riesz_;
  SpdSolver solver_;
  Vector load_;
  Vector load_full_;
  Vector dirichlet_;
  std::vector<double> source_sq_;
};

/// ∫_T μ(x, t) dx for a constant t on element e.
inline double element_mu_integral(const Nonlinearity& mu, const Triangulation& mesh, double area, Index e,
                                  double t) {
  if (!mu.x_dependent) return area * mu.value(Point{}, t);
  return integrate_triangle(mesh.corners(e), [&](Point x) { return mu.value(x, t); });
}

/// ⟨Av, φ_i⟩ for every free dof i.
inline Vector apply_operator(const DiscreteProblem& dp, const FEFunction& v) {
  const FESpace& space = dp.space();
  const Triangulation& mesh = space.mesh();
  const Nonlinearity& mu = dp.problem().nonlinearity;
  Vector out = Vector::Zero(space.n_free());
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Vec2 g = space.gradient(v.values, e);
    const double t = dot(g, g);
    const double coef = element_mu_integral(mu, mesh, space.area(e), e, t);
    const auto& grads = space.gradients(e);
    const auto& vid = mesh.element(e).v;
    for (int i = 0; i < 3; ++i) {
      const Index d = space.dof(vid[i]);
      if (d != invalid_index) out[d] += coef * dot(g, grads[i]);
    }
  }
  return out;
}

/// ⟨Av − F, φ_i⟩ for every free dof i.
inline Vector residual_vector(const DiscreteProblem& dp, const FEFunction& v) {
  return apply_operator(dp, v) - dp.load();
}

/// E(v) = ½ ∫ ∫₀^{|∇v|²} μ(x, ζ) dζ dx − F(v).
inline double energy(const DiscreteProblem& dp, const FEFunction& v) {
  const FESpace& space = dp.space();
  const Triangulation& mesh = space.mesh();
  const Nonlinearity& mu = dp.problem().nonlinearity;
  double potential = 0.0;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Vec2 g = space.gradient(v.values, e);
    const double t = dot(g, g);
    if (mu.x_dependent)
      potential += integrate_triangle(mesh.corners(e), [&](Point x) { return mu.primitive_value(x, t); });
    else
      potential += space.area(e) * mu.primitive_value(Point{}, t);
  }
  return 0.5 * potential - dp.load_full().dot(v.values);
}

} // namespace afem
