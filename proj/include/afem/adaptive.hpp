#pragma once

/// Adaptive loops: the mesh-indexed solve-estimate-mark-refine loop with an
/// inexact Picard solve per level, the equivalent single-index loop that takes
/// one Picard step per index, rate fitting and CSV persistence of traces.

#include <afem/error.hpp>
#include <afem/estimator.hpp>
#include <afem/fe_space.hpp>
#include <afem/mesh.hpp>
#include <afem/nonlinear_operator.hpp>
#include <afem/picard.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace afem {

struct DriverConfig {
  double theta = 0.5;
  bool nested = true;           // u_{ℓ+1}⁰ := u_ℓ, otherwise the zero guess
  Index max_dofs = 200000;      // stop after the first level with at least this many dofs
  int max_levels = 1000;
  PicardConfig picard;          // λ lives here
  bool keep_iterates = false;   // store mesh and u_ℓ of every level
  bool keep_inner_traces = false;

  void validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigurationError("driver: theta must lie in (0, 1]");
    if (!(picard.lambda > 0.0)) throw ConfigurationError("driver: lambda must be positive");
    if (max_dofs < 1 || max_levels < 1) throw ConfigurationError("driver: budgets must be positive");
  }
};

struct LevelRecord {
  int level = 0;
  Index n_elements = 0;
  Index n_dofs = 0;
  double estimator = 0.0;
  int picard_count = 0;
  std::optional<double> h1_error;
  std::int64_t cum_work = 0; // Σ_{j≤ℓ} #Pic(j)·#T_j
  Index n_marked = 0;        // #M_ℓ, zero on the last level
};

enum class Termination { budget_reached, lucky_breakdown, picard_nontermination };

inline std::string to_string(Termination t) {
  switch (t) {
  case Termination::budget_reached: return "budget-reached";
  case Termination::lucky_breakdown: return "lucky-breakdown";
  case Termination::picard_nontermination: return "picard-nontermination";
  }
  return "unknown";
}

struct LevelSnapshot {
  TriangulationPtr mesh;
  FEFunction u;
};

struct AdaptiveTrace {
  std::vector<LevelRecord> records;
  Termination termination = Termination::budget_reached;
  std::vector<LevelSnapshot> snapshots;   // filled when keep_iterates is set
  std::vector<PicardTrace> inner_traces;  // filled when keep_inner_traces is set
};

/// Optional per-level error functional, e.g. ‖∇(u⋆ − u_ℓ)‖ for a known solution.
using ErrorFunctional = std::function<double(const FEFunction&)>;

namespace detail {

inline FEFunction initial_guess(const DiscreteProblem& dp, const std::optional<FEFunction>& previous, bool nested) {
  if (!nested || !previous) return dp.zero_guess();
  return dp.with_dirichlet_data(prolongate(*previous, dp.space_ptr()));
}

} // namespace detail

inline AdaptiveTrace run_adaptive(const ProblemPtr& problem, const Triangulation& initial_mesh,
                                  const DriverConfig& config, const ErrorFunctional& error = {}) {
  config.validate();
  AdaptiveTrace trace;
  auto mesh = std::make_shared<const Triangulation>(initial_mesh);
  std::optional<FEFunction> previous;
  std::int64_t work = 0;

  for (int level = 0;; ++level) {
    const DiscreteProblem dp(problem, build_space(mesh), config.picard.linear);
    IndicatorField last;
    const EstimatorCallback eta = [&](const FEFunction& v) {
      last = compute_indicators(dp, v);
      return last.total();
    };
    PicardResult solve = iterate_until_stop(dp, detail::initial_guess(dp, previous, config.nested), eta, config.picard);

    LevelRecord rec;
    rec.level = level;
    rec.n_elements = mesh->n_elements();
    rec.n_dofs = dp.space().n_free();
    rec.estimator = last.total();
    rec.picard_count = solve.trace.count();
    if (error) rec.h1_error = error(solve.u);
    work += static_cast<std::int64_t>(rec.picard_count) * rec.n_elements;
    rec.cum_work = work;
    if (config.keep_iterates) trace.snapshots.push_back({mesh, solve.u});
    if (config.keep_inner_traces) trace.inner_traces.push_back(solve.trace);

    if (solve.status == PicardStatus::not_terminated) {
      trace.records.push_back(rec);
      trace.termination = Termination::picard_nontermination;
      return trace;
    }
    if (rec.n_dofs >= config.max_dofs || level + 1 >= config.max_levels) {
      trace.records.push_back(rec);
      trace.termination = Termination::budget_reached;
      return trace;
    }
    const MarkedSet marked = dorfler_mark(last, config.theta);
    if (marked.elements.empty()) {
      trace.records.push_back(rec);
      trace.termination = Termination::lucky_breakdown;
      return trace;
    }
    rec.n_marked = static_cast<Index>(marked.elements.size());
    trace.records.push_back(rec);
    mesh = std::make_shared<const Triangulation>(refine(*mesh, marked.elements));
    previous = std::move(solve.u);
  }
}

/// One entry per outer index ℓ of the single-index loop.
struct SequenceStep {
  int index = 0;
  int mesh_level = 0; // k with T̃_ℓ = T_k
  Index n_elements = 0;
  double increment = 0.0;
  double estimator = 0.0;
  bool refined = false; // stopping criterion held: T̃_{ℓ+1} = refine(T̃_ℓ, M̃_ℓ)
};

struct FullSequenceTrace {
  std::vector<SequenceStep> steps;
  AdaptiveTrace levels; // level-indexed view: u_k = ũ_{ℓ_k}
};

/// Index ℓ_k of the step after which mesh k was left (or the run ended).
inline std::vector<int> level_end_indices(const std::vector<SequenceStep>& steps) {
  std::vector<int> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i + 1 == steps.size() || steps[i + 1].mesh_level != steps[i].mesh_level) out.push_back(steps[i].index);
  }
  return out;
}

/// Single-index variant: ũ_ℓ := Φ_ℓ(ũ_{ℓ−1}); the mesh is refined only when
/// ‖ũ_ℓ − ũ_{ℓ−1}‖_H ≤ λ η̃_ℓ(ũ_ℓ), otherwise T̃_{ℓ+1} := T̃_ℓ.
inline FullSequenceTrace run_full_sequence(const ProblemPtr& problem, const Triangulation& initial_mesh,
                                           const DriverConfig& config, const ErrorFunctional& error = {}) {
  config.validate();
  FullSequenceTrace out;
  AdaptiveTrace& levels = out.levels;
  auto mesh = std::make_shared<const Triangulation>(initial_mesh);
  auto dp = std::make_unique<DiscreteProblem>(problem, build_space(mesh), config.picard.linear);
  FEFunction u = dp->zero_guess();
  std::int64_t work = 0;
  int mesh_level = 0;
  int steps_on_mesh = 0;
  PicardTrace inner;

  for (int index = 0;; ++index) {
    PicardUpdate step = picard_update(*dp, u);
    u = std::move(step.u);
    const IndicatorField ind = compute_indicators(*dp, u);
    ++steps_on_mesh;
    inner.steps.push_back({steps_on_mesh, step.increment, ind.total()});
    SequenceStep s{index, mesh_level, mesh->n_elements(), step.increment, ind.total(), false};

    const bool lucky = ind.total_sq == 0.0 && step.increment == 0.0;
    const bool stop = lucky || step.increment <= config.picard.lambda * ind.total();
    if (!stop && steps_on_mesh < config.picard.max_iter) {
      out.steps.push_back(s);
      continue;
    }

    LevelRecord rec;
    rec.level = mesh_level;
    rec.n_elements = mesh->n_elements();
    rec.n_dofs = dp->space().n_free();
    rec.estimator = ind.total();
    rec.picard_count = steps_on_mesh;
    if (error) rec.h1_error = error(u);
    work += static_cast<std::int64_t>(steps_on_mesh) * rec.n_elements;
    rec.cum_work = work;
    if (config.keep_iterates) levels.snapshots.push_back({mesh, u});
    if (config.keep_inner_traces) levels.inner_traces.push_back(inner);
    inner.steps.clear();

    const auto finish = [&](Termination t) {
      out.steps.push_back(s);
      levels.records.push_back(rec);
      levels.termination = t;
      return out;
    };
    if (!stop) return finish(Termination::picard_nontermination);
    if (rec.n_dofs >= config.max_dofs || mesh_level + 1 >= config.max_levels)
      return finish(Termination::budget_reached);
    const MarkedSet marked = dorfler_mark(ind, config.theta);
    if (marked.elements.empty()) return finish(Termination::lucky_breakdown);

    rec.n_marked = static_cast<Index>(marked.elements.size());
    s.refined = true;
    out.steps.push_back(s);
    levels.records.push_back(rec);
    mesh = std::make_shared<const Triangulation>(refine(*mesh, marked.elements));
    dp = std::make_unique<DiscreteProblem>(problem, build_space(mesh), config.picard.linear);
    u = config.nested ? dp->with_dirichlet_data(prolongate(u, dp->space_ptr())) : dp->zero_guess();
    ++mesh_level;
    steps_on_mesh = 0;
  }
}

enum class RateAxis { elements, dofs, work };

/// Least-squares slope of log y against log x over the trailing `window`
/// fraction of the points (at least 5 points); returns −slope.
inline double fit_power_rate(const std::vector<double>& x, const std::vector<double>& y, double window = 0.5) {
  if (x.size() != y.size()) throw InputError("fit_rate: size mismatch");
  if (!(window > 0.0 && window <= 1.0)) throw ConfigurationError("fit_rate: window must lie in (0, 1]");
  const std::size_t n = x.size();
  const std::size_t m = std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(window * static_cast<double>(n))));
  if (n < m) throw InsufficientDataError("fit_rate: need at least 5 points, have " + std::to_string(n));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - m; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("fit_rate: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = static_cast<double>(m);
  const double denom = k * sxx - sx * sx;
  if (denom <= 0.0) throw InputError("fit_rate: x values are all equal");
  return -(k * sxy - sx * sy) / denom;
}

inline std::vector<double> axis_values(const AdaptiveTrace& trace, RateAxis axis) {
  std::vector<double> x;
  x.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    switch (axis) {
    case RateAxis::elements: x.push_back(r.n_elements); break;
    case RateAxis::dofs: x.push_back(r.n_dofs); break;
    case RateAxis::work: x.push_back(static_cast<double>(r.cum_work)); break;
    }
  }
  return x;
}

/// Empirical rate s in η_ℓ ≈ C x_ℓ^{−s}.
inline double fit_rate(const AdaptiveTrace& trace, RateAxis axis, double window = 0.5) {
  std::vector<double> y;
  for (const auto& r : trace.records) y.push_back(r.estimator);
  return fit_power_rate(axis_values(trace, axis), y, window);
}

/// Empirical rate of the recorded H¹ errors.
inline double fit_error_rate(const AdaptiveTrace& trace, RateAxis axis, double window = 0.5) {
  std::vector<double> y;
  for (const auto& r : trace.records) {
    if (!r.h1_error) throw InputError("fit_error_rate: trace has no error values");
    y.push_back(*r.h1_error);
  }
  return fit_power_rate(axis_values(trace, axis), y, window);
}

enum class PicardGrowth { bounded, logarithmic, irregular };

inline std::string to_string(PicardGrowth g) {
  switch (g) {
  case PicardGrowth::bounded: return "bounded";
  case PicardGrowth::logarithmic: return "logarithmic";
  case PicardGrowth::irregular: return "irregular";
  }
  return "unknown";
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t first = 0) {
  const std::size_t n = x.size() - first;
  double mx = 0, my = 0;
  for (std::size_t i = first; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = first; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

/// Classifies #Pic(ℓ) against ln #T_ℓ: "bounded" if the trailing-half slope is
/// at most 0.1 and the counts beyond level 5 spread by at most 2, otherwise
/// "logarithmic" for a positive full fit with R² ≥ 0.8.
inline PicardGrowth picard_growth_check(const AdaptiveTrace& trace) {
  const std::size_t n = trace.records.size();
  if (n < 8) throw InsufficientDataError("picard_growth_check: need at least 8 levels, have " + std::to_string(n));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(static_cast<double>(trace.records[i].n_elements));
    y[i] = trace.records[i].picard_count;
  }
  const LineFit tail = fit_line(x, y, n - (n + 1) / 2);
  const auto [lo, hi] = std::minmax_element(y.begin() + 6, y.end());
  if (tail.slope <= 0.1 && *hi - *lo <= 2.0) return PicardGrowth::bounded;
  const LineFit all = fit_line(x, y);
  if (all.slope > 0.0 && all.r_squared >= 0.8) return PicardGrowth::logarithmic;
  return PicardGrowth::irregular;
}

inline constexpr const char* trace_csv_header = "level,n_elements,n_dofs,estimator,picard_count,h1_error,cum_work";

inline void write_trace_csv(std::ostream& os, const AdaptiveTrace& trace) {
  os << trace_csv_header << '\n';
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.level << ',' << r.n_elements << ',' << r.n_dofs << ',' << r.estimator << ',' << r.picard_count << ',';
    if (r.h1_error) os << *r.h1_error;
    os << ',' << r.cum_work << '\n';
  }
}

inline AdaptiveTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != trace_csv_header) throw InputError("trace csv: bad header");
  AdaptiveTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 7) throw InputError("trace csv: expected 7 fields in '" + line + "'");
    try {
      LevelRecord r;
      r.level = std::stoi(f[0]);
      r.n_elements = std::stoi(f[1]);
      r.n_dofs = std::stoi(f[2]);
      r.estimator = std::stod(f[3]);
      r.picard_count = std::stoi(f[4]);
      if (!f[5].empty()) r.h1_error = std::stod(f[5]);
      r.cum_work = std::stoll(f[6]);
      trace.records.push_back(r);
    } catch (const std::logic_error&) {
      throw InputError("trace csv: malformed number in '" + line + "'");
    }
  }
  return trace;
}

} // namespace afem
