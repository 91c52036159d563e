#include "test_support.hpp"

#include <afem/adaptive.hpp>
#include <afem/zshape.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

using namespace afem;

namespace {

ProblemPtr smooth_poisson() {
  const double pi = std::numbers::pi;
  return make_problem(constant_nonlinearity(1.0), [pi](Point p) {
    return 2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
  });
}

AdaptiveTrace synthetic(const std::vector<double>& n, const std::function<double(double)>& eta,
                        const std::function<int(double)>& pic = [](double) { return 1; }) {
  AdaptiveTrace t;
  std::int64_t work = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    LevelRecord r;
    r.level = static_cast<int>(i);
    r.n_elements = static_cast<Index>(n[i]);
    r.n_dofs = static_cast<Index>(n[i] / 2);
    r.estimator = eta(n[i]);
    r.picard_count = pic(n[i]);
    work += r.picard_count * static_cast<std::int64_t>(n[i]);
    r.cum_work = work;
    t.records.push_back(r);
  }
  return t;
}

std::vector<double> geometric(double start, double factor, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::round(start * std::pow(factor, i)));
  return out;
}

void expect_well_formed(const AdaptiveTrace& t) {
  ASSERT_FALSE(t.records.empty());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(t.records[i].level, static_cast<int>(i));
    EXPECT_GE(t.records[i].picard_count, 1);
    if (i > 0) {
      EXPECT_GT(t.records[i].cum_work, t.records[i - 1].cum_work);
      EXPECT_GT(t.records[i].n_elements, t.records[i - 1].n_elements);
    }
  }
}

} // namespace

TEST(RunAdaptive, SmoothLinearProblemHasOptimalRate) {
  DriverConfig cfg;
  cfg.theta = 0.5;
  cfg.max_dofs = 4000;
  const AdaptiveTrace t = run_adaptive(smooth_poisson(), afem::testing::criss_cross_square(), cfg);
  expect_well_formed(t);
  EXPECT_EQ(t.termination, Termination::budget_reached);
  EXPECT_GE(t.records.back().n_dofs, 4000);
  EXPECT_NEAR(fit_rate(t, RateAxis::elements), 0.5, 0.1);
  EXPECT_NEAR(fit_rate(t, RateAxis::dofs), 0.5, 0.1);
}

TEST(RunAdaptive, ThetaOneRefinesEverything) {
  DriverConfig cfg;
  cfg.theta = 1.0;
  cfg.max_dofs = 2000;
  const ProblemSpec spec = make_problem_spec("zshape-unknown");
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  expect_well_formed(t);
  for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
    EXPECT_EQ(t.records[i].n_marked, t.records[i].n_elements);
    EXPECT_EQ(t.records[i + 1].n_elements, 2 * t.records[i].n_elements);
  }
}

TEST(RunAdaptive, LinearConvergenceOfEstimator) {
  DriverConfig cfg;
  cfg.theta = 0.4;
  cfg.max_dofs = 5000;
  const ProblemSpec spec = make_problem_spec("zshape-known");
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  const std::size_t n = t.records.size();
  ASSERT_GT(n, 10u);
  // fit log η² against the level and bound η_{ℓ+k}² / (q^k η_ℓ²) uniformly
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(2.0 * std::log(t.records[i].estimator));
  }
  const double q_lin = std::exp(fit_line(x, y).slope);
  EXPECT_LT(q_lin, 1.0);
  double c_lin = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; l + k < n; ++k)
      c_lin = std::max(c_lin, std::pow(t.records[l + k].estimator / t.records[l].estimator, 2) / std::pow(q_lin, k));
  EXPECT_LT(c_lin, 10.0);
}

TEST(RunAdaptive, NestedInnerIncrementsContract) {
  DriverConfig cfg;
  cfg.theta = 0.5;
  cfg.max_dofs = 1500;
  cfg.picard.lambda = 1e-4;
  cfg.keep_inner_traces = true;
  const ProblemSpec spec = make_problem_spec("zshape-known");
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  const double q = spec.problem->q;
  ASSERT_EQ(t.inner_traces.size(), t.records.size());
  for (const auto& inner : t.inner_traces) {
    const double first = inner.steps.front().increment;
    for (const auto& s : inner.steps) EXPECT_LE(s.increment, std::pow(q, s.n - 1) * first * (1.0 + 1e-8) + 1e-13);
  }
}

TEST(RunAdaptive, LuckyBreakdown) {
  const auto problem = make_problem(builtin_arctan());
  DriverConfig cfg;
  cfg.keep_iterates = true;
  const AdaptiveTrace t = run_adaptive(problem, build_zshape(ZShapeBoundary::dirichlet), cfg);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.termination, Termination::lucky_breakdown);
  EXPECT_EQ(t.records[0].estimator, 0.0);
  // one more step on a refined mesh keeps the exact solution after one Picard step
  const auto fine = std::make_shared<const Triangulation>(refine_uniform(*t.snapshots[0].mesh));
  const DiscreteProblem dp(problem, build_space(fine));
  const PicardResult again = iterate_until_stop(dp, prolongate(t.snapshots[0].u, dp.space_ptr()),
                                                [&](const FEFunction& v) { return estimator(dp, v); }, {});
  EXPECT_EQ(again.trace.count(), 1);
  EXPECT_EQ(again.u.values.norm(), 0.0);
}

TEST(RunAdaptive, PicardNonTerminationIsReported) {
  DriverConfig cfg;
  cfg.picard.lambda = 1e-300;
  cfg.picard.max_iter = 5;
  const ProblemSpec spec = make_problem_spec("zshape-known");
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  EXPECT_EQ(t.termination, Termination::picard_nontermination);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].picard_count, 5);
}

TEST(RunAdaptive, InvalidConfig) {
  const ProblemSpec spec = make_problem_spec("zshape-known");
  DriverConfig cfg;
  cfg.theta = 0.0;
  EXPECT_THROW(run_adaptive(spec.problem, spec.mesh, cfg), ConfigurationError);
  cfg.theta = 0.5;
  cfg.picard.lambda = -1.0;
  EXPECT_THROW(run_adaptive(spec.problem, spec.mesh, cfg), ConfigurationError);
}

TEST(RunAdaptive, EnergyOfGalerkinSolutionsDecreases) {
  const ProblemSpec spec = make_problem_spec("zshape-unknown");
  DriverConfig cfg;
  cfg.theta = 0.5;
  cfg.max_levels = 8;
  cfg.keep_iterates = true;
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  ASSERT_EQ(t.snapshots.size(), 8u);
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& snap : t.snapshots) {
    const DiscreteProblem dp(spec.problem, build_space(snap.mesh));
    const double e = energy(dp, newton_reference(dp));
    EXPECT_LE(e, previous + 1e-13);
    previous = e;
  }
}

// η_{ℓ+1}(u⋆_{ℓ+1})² ≤ q̂ η_ℓ(u⋆_ℓ)² + Ĉ ‖u⋆_{ℓ+1} − u⋆_ℓ‖² with q̂ = 1 − (1 − 2^{-1/2})θ²
// and a moderate Ĉ. Levels whose refinement adds no free dof leave u⋆ unchanged.
TEST(RunAdaptive, EstimatorReductionForGalerkinSolutions) {
  const ProblemSpec spec = make_problem_spec("zshape-unknown");
  DriverConfig cfg;
  cfg.theta = 0.5;
  cfg.max_levels = 10;
  cfg.keep_iterates = true;
  const AdaptiveTrace t = run_adaptive(spec.problem, spec.mesh, cfg);
  std::vector<double> eta;
  std::vector<FEFunction> u;
  for (const auto& snap : t.snapshots) {
    const DiscreteProblem dp(spec.problem, build_space(snap.mesh));
    u.push_back(newton_reference(dp));
    eta.push_back(estimator(dp, u.back()));
  }
  const double q_hat = 1.0 - (1.0 - std::sqrt(0.5)) * cfg.theta * cfg.theta;
  double c_hat = 0.0;
  for (std::size_t l = 0; l + 1 < u.size(); ++l) {
    const double gap = h_distance(u[l + 1], prolongate(u[l], u[l + 1].space));
    const double excess = eta[l + 1] * eta[l + 1] - q_hat * eta[l] * eta[l];
    if (gap < 1e-12 * eta[l]) {
      EXPECT_LE(excess, 1e-12) << "level " << l;
      continue;
    }
    c_hat = std::max(c_hat, excess / (gap * gap));
  }
  EXPECT_LT(c_hat, 100.0);
}

TEST(FullSequence, MatchesMeshIndexedLoop) {
  for (const char* name : {"zshape-known", "zshape-unknown"}) {
    for (bool nested : {true, false}) {
      const ProblemSpec spec = make_problem_spec(name);
      DriverConfig cfg;
      cfg.theta = 0.5;
      cfg.nested = nested;
      cfg.max_dofs = 600;
      cfg.picard.lambda = 0.05;
      cfg.keep_iterates = true;
      const AdaptiveTrace a = run_adaptive(spec.problem, spec.mesh, cfg, spec.error_functional());
      const FullSequenceTrace f = run_full_sequence(spec.problem, spec.mesh, cfg, spec.error_functional());
      ASSERT_EQ(a.records.size(), f.levels.records.size());
      EXPECT_EQ(a.termination, f.levels.termination);
      int total = 0;
      for (std::size_t k = 0; k < a.records.size(); ++k) {
        const auto& ra = a.records[k];
        const auto& rf = f.levels.records[k];
        EXPECT_EQ(ra.n_elements, rf.n_elements);
        EXPECT_EQ(ra.picard_count, rf.picard_count);
        EXPECT_EQ(ra.cum_work, rf.cum_work);
        EXPECT_EQ(ra.estimator, rf.estimator);
        EXPECT_EQ(ra.h1_error, rf.h1_error);
        EXPECT_EQ(a.snapshots[k].mesh->elements().size(), f.levels.snapshots[k].mesh->elements().size());
        EXPECT_LE((a.snapshots[k].u.values - f.levels.snapshots[k].u.values).lpNorm<Eigen::Infinity>(), 1e-14);
        total += ra.picard_count;
      }
      EXPECT_EQ(static_cast<int>(f.steps.size()), total);
      // the mesh only changes right after a step that met the stopping criterion
      for (std::size_t i = 0; i + 1 < f.steps.size(); ++i) {
        if (f.steps[i].refined)
          EXPECT_EQ(f.steps[i + 1].mesh_level, f.steps[i].mesh_level + 1);
        else
          EXPECT_EQ(f.steps[i + 1].n_elements, f.steps[i].n_elements);
      }
      const auto ends = level_end_indices(f.steps);
      ASSERT_EQ(ends.size(), a.records.size());
      int partial = -1;
      for (std::size_t k = 0; k < ends.size(); ++k) {
        partial += a.records[k].picard_count;
        EXPECT_EQ(ends[k], partial);
      }
    }
  }
}

TEST(FitRate, ExactPowerLaws) {
  const auto n = geometric(14, 1.7, 12);
  EXPECT_NEAR(fit_rate(synthetic(n, [](double x) { return std::pow(x, -0.5); }), RateAxis::elements), 0.5, 1e-12);
  EXPECT_NEAR(fit_rate(synthetic(n, [](double x) { return 3.0 * std::pow(x, -2.0 / 7.0); }), RateAxis::elements),
              2.0 / 7.0, 1e-12);
  AdaptiveTrace w = synthetic(n, [](double) { return 1.0; }, [](double x) { return x < 100 ? 3 : 2; });
  for (auto& r : w.records) r.estimator = 4.0 * std::pow(static_cast<double>(r.cum_work), -0.5);
  EXPECT_NEAR(fit_rate(w, RateAxis::work), 0.5, 1e-12);
}

TEST(FitRate, WindowUsesTrailingPoints) {
  const auto n = geometric(10, 2.0, 12);
  // slope changes after the sixth point; the trailing half only sees the second law
  const AdaptiveTrace t = synthetic(n, [&](double x) { return x < n[6] ? std::pow(x, -0.1) : 5.0 * std::pow(x, -0.4); });
  EXPECT_NEAR(fit_rate(t, RateAxis::elements, 0.5), 0.4, 1e-12);
}

TEST(FitRate, InsufficientData) {
  EXPECT_THROW(fit_rate(synthetic(geometric(10, 2, 4), [](double x) { return 1 / x; }), RateAxis::elements),
               InsufficientDataError);
  EXPECT_NO_THROW(fit_rate(synthetic(geometric(10, 2, 5), [](double x) { return 1 / x; }), RateAxis::elements));
}

TEST(PicardGrowth, Classification) {
  const auto n = geometric(14, 1.5, 20);
  const auto eta = [](double x) { return 1.0 / x; };
  EXPECT_EQ(picard_growth_check(synthetic(n, eta, [](double) { return 4; })), PicardGrowth::bounded);
  EXPECT_EQ(picard_growth_check(synthetic(n, eta, [](double x) { return static_cast<int>(std::round(2.0 * std::log2(x))); })),
            PicardGrowth::logarithmic);
  int k = 0;
  EXPECT_EQ(picard_growth_check(synthetic(n, eta, [&](double) { return (k++ % 2) ? 1 : 12; })), PicardGrowth::irregular);
  EXPECT_THROW(picard_growth_check(synthetic(geometric(14, 2, 7), eta)), InsufficientDataError);
}

TEST(TraceCsv, RoundTrip) {
  AdaptiveTrace t = synthetic(geometric(14, 1.9, 6), [](double x) { return std::pow(x, -1.0 / 3.0); });
  t.records[2].h1_error = 0.1234567890123456789;
  std::stringstream ss;
  write_trace_csv(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "level,n_elements,n_dofs,estimator,picard_count,h1_error,cum_work");
  const AdaptiveTrace back = read_trace_csv(ss);
  ASSERT_EQ(back.records.size(), t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(back.records[i].estimator, t.records[i].estimator);
    EXPECT_EQ(back.records[i].h1_error, t.records[i].h1_error);
    EXPECT_EQ(back.records[i].cum_work, t.records[i].cum_work);
    EXPECT_EQ(back.records[i].n_elements, t.records[i].n_elements);
  }
  std::stringstream bad("level,n\n");
  EXPECT_THROW(read_trace_csv(bad), InputError);
  std::stringstream short_row(std::string(trace_csv_header) + "\n1,2,3\n");
  EXPECT_THROW(read_trace_csv(short_row), InputError);
}
