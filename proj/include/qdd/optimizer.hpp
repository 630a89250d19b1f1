#pragma once
#include <chrono>
#include <utility>
#include <vector>

#include "qdd/adjoint.hpp"

namespace qdd {

struct ArmijoConfig {
  double c1 = 1e-4;          // sufficient-decrease constant
  double backtrack = 0.5;
  double alpha0 = 1.0;       // first trial step; later steps warm-start at 2x
  int max_backtracks = 30;
  double grad_tol = 1e-6;    // H1 norm of the Sobolev gradient
  int max_iters = 100;
};

enum class StopReason { tolerance, max_iters, line_search_failure };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

struct TraceRow {
  int k = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;  // step accepted from this iterate; 0 on the last row
  double current = 0.0;
  double seconds = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRow> rows;
  ScalarField C_opt;
  StateTriple state;
  StopReason reason = StopReason::max_iters;
  int forward_solves = 0;
};

// model context a descent run operates in
struct DescentProblem {
  const BoundaryData& bc;
  const ModelParams& params;
  const CostConfig& cost;
  const SolverConfig& solver;
};

struct LineSearchResult {
  double alpha = 0.0;
  ScalarField C_new;
  double cost_new = 0.0;
  SolveResult solve;
  int backtracks = 0;
};

// backtracking search along -g; a trial whose forward solve diverges or
// whose doping loses positivity counts as a too-long step
inline LineSearchResult armijo_search(const ScalarField& C,
                                      const ScalarField& g, double J0,
                                      double slope, const ArmijoConfig& acfg,
                                      const DescentProblem& prob,
                                      const StateTriple* warm = nullptr,
                                      int* forward_solves = nullptr) {
  if (!(slope > 0.0))
    throw line_search_error("descent direction has no slope", 0.0, J0);
  double alpha = acfg.alpha0;
  double last_J = std::numeric_limits<double>::quiet_NaN();
  for (int m = 0; m < acfg.max_backtracks; ++m, alpha *= acfg.backtrack) {
    ScalarField Ct = C;
    for (int i = 0; i < Ct.size(); ++i) Ct.v[i] -= alpha * g.v[i];
    if (min_value(Ct) <= 0.0) continue;
    SolveResult sr;
    try {
      sr = solve_state(Ct, prob.bc, prob.params, prob.solver, warm);
      if (forward_solves) ++*forward_solves;
    } catch (const nonconvergence_error&) {
      continue;
    }
    double Jt = cost_eval(sr.state, Ct, prob.cost);
    last_J = Jt;
    if (Jt <= J0 - acfg.c1 * alpha * slope)
      return {alpha, std::move(Ct), Jt, std::move(sr), m + 1};
  }
  throw line_search_error("no admissible decrease step",
                          alpha / acfg.backtrack, last_J);
}

// steepest descent on the reduced cost in the Sobolev metric:
// solve state, solve adjoint, lift to the gradient, line-search, repeat
inline OptimizationTrace gradient_descent(const ScalarField& C_init,
                                          const BoundaryData& bc,
                                          const ModelParams& p,
                                          const ArmijoConfig& acfg,
                                          const CostConfig& cost,
                                          const SolverConfig& scfg,
                                          const StateTriple* warm_init = nullptr) {
  DescentProblem prob{bc, p, cost, scfg};
  OptimizationTrace tr;
  ScalarField C = C_init;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  SolveResult sr = solve_state(C, bc, p, scfg, warm_init);
  ++tr.forward_solves;
  double J = cost_eval(sr.state, C, cost);
  double alpha_next = acfg.alpha0;

  for (int k = 0;; ++k) {
    AdjointTriple xi = solve_adjoint(sr.state, C, p, cost, scfg.linear);
    ScalarField g = riesz_gradient(xi.xi_V, C, cost, scfg.linear);
    double slope = dirichlet_form(g, g);
    double gnorm = norm_h1(g);
    tr.rows.push_back(
        {k, J, gnorm, 0.0, observed_current(sr.state, cost), elapsed()});
    if (gnorm <= acfg.grad_tol) {
      tr.reason = StopReason::tolerance;
      break;
    }
    if (k >= acfg.max_iters) {
      tr.reason = StopReason::max_iters;
      break;
    }
    ArmijoConfig step = acfg;
    step.alpha0 = alpha_next;
    LineSearchResult ls;
    try {
      ls = armijo_search(C, g, J, slope, step, prob, &sr.state,
                         &tr.forward_solves);
    } catch (const line_search_error&) {
      tr.reason = StopReason::line_search_failure;
      break;
    }
    tr.rows.back().alpha = ls.alpha;
    C = std::move(ls.C_new);
    sr = std::move(ls.solve);
    J = ls.cost_new;
    alpha_next = 2.0 * ls.alpha;
  }
  tr.C_opt = std::move(C);
  tr.state = std::move(sr.state);
  return tr;
}

}  // namespace qdd
