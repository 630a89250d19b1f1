#pragma once
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qdd/config.hpp"
#include "qdd/io.hpp"
#include "qdd/optimizer.hpp"

namespace qdd {

// one optimization run of the ladder; n = -1 is the classical baseline
struct SweepRow {
  int n = 0;
  double eps2 = 0.0;
  bool ok = false;
  std::string error;
  double cost = 0.0;
  double dist_C = 0.0, dist_n = 0.0, dist_S = 0.0, cost_gap = 0.0;
  int descent_iters = 0;
  int forward_solves = 0;
  ScalarField C_opt;
  StateTriple state;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // classical baseline first, then n = 0..n_max
};

// optimize at eps2 * 10^-2n for n = 0..n_max against the classical baseline,
// measuring how the minimizers and the minimum approach the limit model;
// every rung descends from the reference doping, with its forward solves
// warm-started from the previous rung's optimal state unless warm_start is off
inline SweepReport run_epsilon_sweep(const ScalarField& C_ref,
                                     const BoundaryData& bc,
                                     const ModelParams& base,
                                     const ArmijoConfig& acfg,
                                     const CostConfig& cost,
                                     const SolverConfig& scfg, int n_max,
                                     double eps2_base, bool warm_start = true) {
  SweepReport rep;
  rep.rows.reserve(static_cast<size_t>(n_max) + 2);

  ModelParams pdd = base;
  pdd.eps2 = 0.0;
  OptimizationTrace dd = gradient_descent(C_ref, bc, pdd, acfg, cost, scfg);
  SweepRow bl;
  bl.n = -1;
  bl.ok = true;
  bl.cost = dd.rows.back().cost;
  bl.descent_iters = static_cast<int>(dd.rows.size()) - 1;
  bl.forward_solves = dd.forward_solves;
  bl.C_opt = std::move(dd.C_opt);
  bl.state = std::move(dd.state);
  rep.rows.push_back(std::move(bl));
  const SweepRow& b = rep.rows.front();
  ScalarField n_dd = squared(b.state.rho);
  if (scfg.verbose)
    std::printf("sweep baseline: cost %.6e after %d steps\n", b.cost,
                b.descent_iters);

  const StateTriple* warm = nullptr;
  for (int n = 0; n <= n_max; ++n) {
    SweepRow row;
    row.n = n;
    ModelParams p = base;
    p.eps2 = eps2_base * std::pow(10.0, -2.0 * n);
    row.eps2 = p.eps2;
    try {
      OptimizationTrace tr =
          gradient_descent(C_ref, bc, p, acfg, cost, scfg, warm);
      row.ok = true;
      row.cost = tr.rows.back().cost;
      row.descent_iters = static_cast<int>(tr.rows.size()) - 1;
      row.forward_solves = tr.forward_solves;
      row.C_opt = std::move(tr.C_opt);
      row.state = std::move(tr.state);
      row.dist_C = rel_l2(row.C_opt, b.C_opt);
      row.dist_n = rel_l2(squared(row.state.rho), n_dd);
      row.dist_S = rel_l2(row.state.S, b.state.S);
      row.cost_gap = std::abs(row.cost - b.cost);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    if (scfg.verbose) {
      if (row.ok)
        std::printf(
            "sweep n=%d eps2=%.3e: cost %.6e dist C %.3e n %.3e S %.3e\n",
            row.n, row.eps2, row.cost, row.dist_C, row.dist_n, row.dist_S);
      else
        std::printf("sweep n=%d eps2=%.3e: failed: %s\n", row.n, row.eps2,
                    row.error.c_str());
    }
    rep.rows.push_back(std::move(row));
    const SweepRow& last = rep.rows.back();
    if (last.ok && warm_start) warm = &last.state;
  }
  return rep;
}

inline SweepReport run_epsilon_sweep(const RunConfig& rc) {
  RunSetup s = make_run_setup(rc);
  double I_ref = 0.0;
  if (rc.cost.kind == CostKind::current_tracking &&
      std::isnan(rc.cost.target_current)) {
    SolveResult ref = solve_state(s.C, s.bc, s.params, rc.solver);
    ScalarField mask = make_contact_mask(s.mesh, rc.cost.contact,
                                         rc.solver.linear);
    I_ref = boundary_current(squared(ref.state.rho), mask, ref.state.S);
  }
  CostConfig cost = make_cost(rc, s, I_ref);
  double base =
      std::isnan(rc.sweep.eps2_base) ? rc.params.eps2 : rc.sweep.eps2_base;
  return run_epsilon_sweep(s.C, s.bc, s.params, rc.optimizer, cost, rc.solver,
                           rc.sweep.n_max, base, rc.sweep.warm_start);
}

inline void emit_results(const SweepReport& rep, const std::string& out_dir) {
  detail::make_dirs(out_dir);
  detail::File out(out_dir + "/sweep.csv");
  std::fprintf(out.f, "n,eps2,cost,dist_C,dist_n,dist_S,cost_gap,iterations,status\n");
  for (const SweepRow& r : rep.rows)
    std::fprintf(out.f, "%d,%s,%s,%s,%s,%s,%s,%d,%s\n", r.n,
                 g17(r.eps2).c_str(), g17(r.cost).c_str(),
                 g17(r.dist_C).c_str(), g17(r.dist_n).c_str(),
                 g17(r.dist_S).c_str(), g17(r.cost_gap).c_str(),
                 r.descent_iters, r.ok ? "ok" : "failed");
}

}  // namespace qdd
