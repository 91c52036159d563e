#pragma once

/// θ × λ × {nested, naive} sweeps over a benchmark problem with one CSV trace
/// per run and a JSON summary of fitted rates and Picard-count classes.

#include <afem/adaptive.hpp>
#include <afem/error.hpp>
#include <afem/zshape.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace afem {

struct SweepConfig {
  std::vector<double> thetas{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> lambdas{0.1};
  std::vector<bool> nested{true, false};
  Index max_dofs = 200000;
  std::filesystem::path out_dir = "results";
  LinearSolverOptions linear;
  int max_picard = 10000;

  void validate() const {
    if (thetas.empty() || lambdas.empty() || nested.empty())
      throw ConfigurationError("sweep: theta, lambda and nested lists must be non-empty");
    for (double t : thetas)
      if (!(t > 0.0 && t <= 1.0)) throw ConfigurationError("sweep: theta must lie in (0, 1]");
    for (double l : lambdas)
      if (!(l > 0.0)) throw ConfigurationError("sweep: lambda must be positive");
    if (max_dofs < 1) throw ConfigurationError("sweep: max_dofs must be positive");
  }
};

struct RunSummary {
  std::string problem;
  double theta = 0.0;
  double lambda = 0.0;
  bool nested = true;
  std::optional<double> rate_elements;
  std::optional<double> rate_work;
  std::optional<std::string> picard_class;
  int levels = 0;
  std::optional<double> final_estimator;
  std::optional<double> final_error;
  std::optional<Termination> termination;
  std::string csv_file;
  std::string failure; // empty when the run completed
  [[nodiscard]] bool completed() const {
    return failure.empty() && termination && *termination != Termination::picard_nontermination;
  }
};

inline std::string run_file_name(const std::string& problem, double theta, double lambda, bool nested) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s_theta%.2f_lambda%.0e_%s.csv", problem.c_str(), theta, lambda,
                nested ? "nested" : "naive");
  return buf;
}

inline nlohmann::json to_json(const RunSummary& s) {
  const auto opt = [](const auto& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::json j;
  j["problem"] = s.problem;
  j["theta"] = s.theta;
  j["lambda"] = s.lambda;
  j["nested"] = s.nested;
  j["label"] = s.theta == 1.0 ? "uniform" : "adaptive";
  j["rate_elements"] = opt(s.rate_elements);
  j["rate_work"] = opt(s.rate_work);
  j["picard_class"] = opt(s.picard_class);
  j["levels"] = s.levels;
  j["final_estimator"] = opt(s.final_estimator);
  j["final_error"] = opt(s.final_error);
  j["termination"] = s.termination ? nlohmann::json(to_string(*s.termination)) : nlohmann::json(nullptr);
  j["csv"] = s.csv_file;
  j["completed"] = s.completed();
  if (!s.failure.empty()) j["failure"] = s.failure;
  return j;
}

inline RunSummary summarize(const std::string& problem, double theta, double lambda, bool nested,
                            const AdaptiveTrace& trace) {
  RunSummary s{problem, theta, lambda, nested};
  s.levels = static_cast<int>(trace.records.size());
  s.termination = trace.termination;
  if (!trace.records.empty()) {
    s.final_estimator = trace.records.back().estimator;
    s.final_error = trace.records.back().h1_error;
  }
  try {
    s.rate_elements = fit_rate(trace, RateAxis::elements);
    s.rate_work = fit_rate(trace, RateAxis::work);
  } catch (const Error&) {
    // too few levels or a vanishing estimator; rates stay null
  }
  try {
    s.picard_class = to_string(picard_growth_check(trace));
  } catch (const InsufficientDataError&) {
  }
  return s;
}

/// Runs every (θ, λ, nested) combination once. Driver failures are recorded in
/// the summary and the sweep continues.
inline std::vector<RunSummary> run_experiment(const ProblemSpec& spec, const SweepConfig& sweep) {
  sweep.validate();
  std::filesystem::create_directories(sweep.out_dir);
  std::vector<RunSummary> runs;
  for (bool nested : sweep.nested) {
    for (double lambda : sweep.lambdas) {
      for (double theta : sweep.thetas) {
        DriverConfig cfg;
        cfg.theta = theta;
        cfg.nested = nested;
        cfg.max_dofs = sweep.max_dofs;
        cfg.picard.lambda = lambda;
        cfg.picard.max_iter = sweep.max_picard;
        cfg.picard.linear = sweep.linear;
        const std::string file = run_file_name(spec.name, theta, lambda, nested);
        try {
          const AdaptiveTrace trace = run_adaptive(spec.problem, spec.mesh, cfg, spec.error_functional());
          std::ofstream os(sweep.out_dir / file);
          write_trace_csv(os, trace);
          if (!os) throw InputError("cannot write " + (sweep.out_dir / file).string());
          RunSummary s = summarize(spec.name, theta, lambda, nested, trace);
          s.csv_file = file;
          runs.push_back(std::move(s));
        } catch (const std::exception& ex) {
          RunSummary s{spec.name, theta, lambda, nested};
          s.failure = ex.what();
          runs.push_back(std::move(s));
        }
      }
    }
  }
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : runs) all.push_back(to_json(r));
  std::ofstream os(sweep.out_dir / "summary.json");
  os << all.dump(2) << '\n';
  if (!os) throw InputError("cannot write summary.json");
  return runs;
}

} // namespace afem
