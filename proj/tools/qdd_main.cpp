#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qdd/qdd.hpp"

namespace {

using qdd::g17;

double max_current_density(const qdd::StateTriple& u) {
  qdd::ScalarField n = qdd::squared(u.rho);
  qdd::ScalarField g = qdd::nodal_gradient_magnitude(u.S);
  double m = 0.0;
  for (size_t i = 0; i < n.v.size(); ++i)
    m = std::max(m, n.v[i] * g.v[i]);
  return m;
}

double contact_current(const qdd::RunSetup& s, const qdd::StateTriple& u,
                       const std::string& contact,
                       const qdd::LinearConfig& lin) {
  qdd::ScalarField mask = qdd::make_contact_mask(s.mesh, contact, lin);
  return qdd::boundary_current(qdd::squared(u.rho), mask, u.S);
}

using KV = std::vector<std::pair<std::string, std::string>>;

void append_echo(KV& kv, const qdd::RunConfig& rc) {
  for (auto& p : qdd::config_echo(rc)) kv.push_back(p);
}

int cmd_solve(const qdd::RunConfig& rc) {
  qdd::RunSetup s = qdd::make_run_setup(rc);
  qdd::SolveResult r = qdd::solve_state(s.C, s.bc, s.params, rc.solver);
  qdd::emit_results(r.state, s.C, rc.out_dir);

  KV kv;
  kv.emplace_back("grid", std::to_string(rc.sweep.grid));
  kv.emplace_back("eps2", g17(s.params.eps2));
  kv.emplace_back("residual", g17(r.residual));
  kv.emplace_back("outer_iterations", std::to_string(r.outer_iters));
  kv.emplace_back("newton_iterations", std::to_string(r.newton_iters));
  for (const auto& c : rc.geometry.contacts)
    kv.emplace_back("current." + c.name,
                    g17(contact_current(s, r.state, c.name, rc.solver.linear)));
  kv.emplace_back("current_density_max", g17(max_current_density(r.state)));
  append_echo(kv, rc);
  qdd::write_summary(rc.out_dir + "/summary.txt", kv);

  std::printf("solve: grid %d, eps2 = %s\n", rc.sweep.grid,
              g17(s.params.eps2).c_str());
  std::printf("  residual %.3e after %d outer + %d newton iterations\n",
              r.residual, r.outer_iters, r.newton_iters);
  std::printf("  I(%s) = %.9e, max n|grad S| = %.6f\n", rc.cost.contact.c_str(),
              contact_current(s, r.state, rc.cost.contact, rc.solver.linear),
              max_current_density(r.state));
  std::printf("  results in %s\n", rc.out_dir.c_str());
  return 0;
}

int cmd_optimize(const qdd::RunConfig& rc) {
  qdd::RunSetup s = qdd::make_run_setup(rc);
  qdd::SolveResult ref = qdd::solve_state(s.C, s.bc, s.params, rc.solver);
  double I_ref = contact_current(s, ref.state, rc.cost.contact, rc.solver.linear);
  qdd::CostConfig cost = qdd::make_cost(rc, s, I_ref);
  qdd::OptimizationTrace tr = qdd::gradient_descent(
      s.C, s.bc, s.params, rc.optimizer, cost, rc.solver, &ref.state);
  qdd::emit_results(tr, rc.out_dir);

  double I_final = qdd::observed_current(tr.state, cost);
  KV kv;
  kv.emplace_back("grid", std::to_string(rc.sweep.grid));
  kv.emplace_back("eps2", g17(s.params.eps2));
  kv.emplace_back("cost_initial", g17(tr.rows.front().cost));
  kv.emplace_back("cost_final", g17(tr.rows.back().cost));
  kv.emplace_back("iterations", std::to_string(tr.rows.back().k));
  kv.emplace_back("forward_solves", std::to_string(tr.forward_solves));
  kv.emplace_back("stop_reason", qdd::stop_reason_name(tr.reason));
  kv.emplace_back("current_reference", g17(I_ref));
  kv.emplace_back("current_target", g17(cost.target_current));
  kv.emplace_back("current_final", g17(I_final));
  kv.emplace_back("current_density_max_reference",
                  g17(max_current_density(ref.state)));
  kv.emplace_back("current_density_max_optimized",
                  g17(max_current_density(tr.state)));
  append_echo(kv, rc);
  qdd::write_summary(rc.out_dir + "/summary.txt", kv);

  std::printf("optimize: J %s -> %s in %d accepted steps (%s)\n",
              g17(tr.rows.front().cost).c_str(),
              g17(tr.rows.back().cost).c_str(), tr.rows.back().k,
              qdd::stop_reason_name(tr.reason));
  std::printf("  I(%s): %.9e -> %.9e, target %.9e\n", rc.cost.contact.c_str(),
              I_ref, I_final, cost.target_current);
  std::printf("  results in %s\n", rc.out_dir.c_str());
  return tr.reason == qdd::StopReason::line_search_failure ? 4 : 0;
}

int cmd_sweep(const qdd::RunConfig& rc) {
  qdd::SweepReport rep = qdd::run_epsilon_sweep(rc);
  qdd::emit_results(rep, rc.out_dir);

  const qdd::SweepRow& base = rep.rows.front();
  const qdd::SweepRow& last = rep.rows.back();
  int failures = 0;
  for (const qdd::SweepRow& r : rep.rows) failures += r.ok ? 0 : 1;
  KV kv;
  kv.emplace_back("grid", std::to_string(rc.sweep.grid));
  kv.emplace_back("rows", std::to_string(rep.rows.size()));
  kv.emplace_back("failed_rows", std::to_string(failures));
  kv.emplace_back("cost_classical", g17(base.cost));
  kv.emplace_back("cost_final", g17(last.cost));
  kv.emplace_back("dist_C_final", g17(last.dist_C));
  kv.emplace_back("dist_n_final", g17(last.dist_n));
  kv.emplace_back("dist_S_final", g17(last.dist_S));
  kv.emplace_back("cost_gap_final", g17(last.cost_gap));
  append_echo(kv, rc);
  qdd::write_summary(rc.out_dir + "/summary.txt", kv);

  std::printf("sweep: %zu rows (%d failed)\n", rep.rows.size(), failures);
  std::printf("  %3s %12s %14s %12s %12s %12s %12s %5s %s\n", "n", "eps2",
              "cost", "dist_C", "dist_n", "dist_S", "cost_gap", "iters",
              "status");
  for (const qdd::SweepRow& r : rep.rows)
    std::printf("  %3d %12.4e %14.8e %12.4e %12.4e %12.4e %12.4e %5d %s\n",
                r.n, r.eps2, r.cost, r.dist_C, r.dist_n, r.dist_S, r.cost_gap,
                r.descent_iters, r.ok ? "ok" : "failed");
  std::printf("  results in %s\n", rc.out_dir.c_str());
  return 0;
}

int cmd_gradcheck(const qdd::RunConfig& rc) {
  qdd::RunSetup s = qdd::make_run_setup(rc);
  qdd::SolveResult ref = qdd::solve_state(s.C, s.bc, s.params, rc.solver);
  double I_ref = contact_current(s, ref.state, rc.cost.contact, rc.solver.linear);
  qdd::CostConfig cost = qdd::make_cost(rc, s, I_ref);
  qdd::GradCheckReport rep =
      qdd::fd_gradient_check(s.C, s.bc, s.params, cost, rc.solver);

  std::printf("gradcheck: grid %d, eps2 = %s\n", rc.sweep.grid,
              g17(s.params.eps2).c_str());
  std::printf("  %3s %9s %22s %22s %10s\n", "dir", "tau", "adjoint",
              "central_fd", "rel_err");
  for (const qdd::GradCheckRow& r : rep.rows)
    std::printf("  %3d %9.1e %22.15e %22.15e %10.3e\n", r.direction, r.tau,
                r.adjoint, r.fd, r.rel_err);

  KV kv;
  kv.emplace_back("grid", std::to_string(rc.sweep.grid));
  kv.emplace_back("eps2", g17(s.params.eps2));
  for (size_t d = 0; d < rep.best.size(); ++d)
    kv.emplace_back("best_rel_err." + std::to_string(d), g17(rep.best[d]));
  kv.emplace_back("worst_best_rel_err", g17(rep.worst_best));
  append_echo(kv, rc);
  qdd::write_summary(rc.out_dir + "/summary.txt", kv);

  std::printf("  worst best-in-direction relative error: %.3e\n",
              rep.worst_best);
  std::printf("  results in %s\n", rc.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "finite-difference solver and adjoint-based doping optimizer for the "
      "quantum drift-diffusion model"};
  app.require_subcommand(1);
  app.footer(qdd::config_help());

  struct Common {
    std::string config, out;
    int grid = 0;
    double eps2 = 0.0;
    CLI::Option* out_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
  };
  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "run configuration file")->required();
    c.out_opt = sub->add_option("--out", c.out,
                                "output directory (overrides config)");
    c.grid_opt = sub->add_option("--grid", c.grid,
                                 "grid nodes per side (overrides config)");
    c.eps_opt = sub->add_option("--epsilon2", c.eps2,
                                "scaled Planck constant squared (overrides config)");
  };

  Common c_solve, c_opt, c_sweep, c_grad;
  CLI::App* solve = app.add_subcommand("solve", "one forward state solve");
  CLI::App* optimize =
      app.add_subcommand("optimize", "gradient descent on the doping profile");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "epsilon ladder down to the classical drift-diffusion model");
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "adjoint derivative against central finite differences");
  add_common(solve, c_solve);
  add_common(optimize, c_opt);
  add_common(sweep, c_sweep);
  add_common(gradcheck, c_grad);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Common& c = solve->parsed()      ? c_solve
              : optimize->parsed() ? c_opt
              : sweep->parsed()    ? c_sweep
                                   : c_grad;
  try {
    qdd::RunConfig rc = qdd::parse_config(c.config);
    if (*c.out_opt) rc.out_dir = c.out;
    if (*c.grid_opt) rc.sweep.grid = c.grid;
    if (*c.eps_opt) rc.params.eps2 = c.eps2;
    qdd::validate_config(rc);
    if (solve->parsed()) return cmd_solve(rc);
    if (optimize->parsed()) return cmd_optimize(rc);
    if (sweep->parsed()) return cmd_sweep(rc);
    return cmd_gradcheck(rc);
  } catch (const qdd::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qdd::geometry_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qdd::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const qdd::line_search_error& e) {
    std::fprintf(stderr, "line search failed: %s\n", e.what());
    return 4;
  } catch (const qdd::nonconvergence_error& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 3;
  } catch (const qdd::linear_solver_error& e) {
    std::fprintf(stderr, "linear solve failed: %s\n", e.what());
    return 3;
  } catch (const qdd::positivity_error& e) {
    std::fprintf(stderr, "density positivity lost: %s\n", e.what());
    return 3;
  }
}
