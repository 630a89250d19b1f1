#include "helpers.hpp"
#include "qdd/adjoint.hpp"
#include "qdd/optimizer.hpp"

using namespace qdd;
using namespace qdd::testing;
using Catch::Approx;

namespace {

// reference doping plus a bump that vanishes on the contact edge
ScalarField bumped_doping(const Setup& s, double amp) {
  ScalarField C = s.C;
  ScalarField bump = make_field(s.mesh, [&](double x, double y) {
    return amp * std::sin(M_PI * x) * y * (1.0 - y);
  });
  for (int i = 0; i < C.size(); ++i) C.v[i] += bump.v[i];
  return C;
}

}  // namespace

TEST_CASE("penalty-dominated landscape is solved in one exact step") {
  Setup s = mesfet_setup(16);
  ScalarField C0 = bumped_doping(s, 0.05);

  SolveResult base = solve_state(C0, s.bc, s.params, s.cfg);
  CostConfig probe = make_current_cost(s.C, 0.0);
  double I0 = observed_current(base.state, probe);

  // target matched to the start: the tracking term and its gradient vanish
  // there, leaving the pure doping penalty with its known minimizer
  const double gamma = 1.0e4;
  CostConfig cost = make_current_cost(s.C, I0, gamma);

  ScalarField e = C0;
  for (int i = 0; i < e.size(); ++i) e.v[i] -= s.C.v[i];
  double J0 = cost_eval(base.state, C0, cost);
  CHECK(J0 == Approx(0.5 * gamma * dirichlet_form(e, e)).epsilon(1e-10));

  AdjointTriple xi = solve_adjoint(base.state, C0, s.params, cost, s.cfg.linear);
  CHECK(norm_linf(xi.xi_V) <= 1e-11);
  ScalarField g = riesz_gradient(xi.xi_V, C0, cost, s.cfg.linear);

  SECTION("the lifted gradient is the scaled doping offset") {
    double scale = gamma * norm_linf(e);
    for (int i = 0; i < g.size(); ++i)
      CHECK(std::abs(g.v[i] - gamma * e.v[i]) <= 1e-8 * scale);
  }

  SECTION("the first trial at the exact step length is accepted") {
    DescentProblem prob{s.bc, s.params, cost, s.cfg};
    ArmijoConfig acfg;
    acfg.alpha0 = 1.0 / gamma;
    double slope = dirichlet_form(g, g);
    LineSearchResult ls =
        armijo_search(C0, g, J0, slope, acfg, prob, &base.state);
    CHECK(ls.backtracks == 1);
    CHECK(ls.alpha == acfg.alpha0);
    double drift = 0.0;
    for (int i = 0; i < ls.C_new.size(); ++i)
      drift = std::max(drift, std::abs(ls.C_new.v[i] - s.C.v[i]));
    CHECK(drift <= 1e-9);
    CHECK(ls.cost_new < 1e-6);
  }
}

TEST_CASE("line search rejects sterile directions") {
  Setup s = mesfet_setup(12);
  ScalarField C0 = bumped_doping(s, 0.05);
  SolveResult base = solve_state(C0, s.bc, s.params, s.cfg);
  CostConfig probe = make_current_cost(s.C, 0.0);
  CostConfig cost = make_current_cost(s.C, observed_current(base.state, probe),
                                      1.0e4);
  double J0 = cost_eval(base.state, C0, cost);
  AdjointTriple xi = solve_adjoint(base.state, C0, s.params, cost, s.cfg.linear);
  ScalarField g = riesz_gradient(xi.xi_V, C0, cost, s.cfg.linear);
  double slope = dirichlet_form(g, g);
  DescentProblem prob{s.bc, s.params, cost, s.cfg};

  SECTION("a direction with no slope is refused outright") {
    ArmijoConfig acfg;
    CHECK_THROWS_AS(armijo_search(C0, g, J0, 0.0, acfg, prob, &base.state),
                    line_search_error);
  }

  SECTION("an uphill direction exhausts the backtracks") {
    ScalarField up = g;
    for (int i = 0; i < up.size(); ++i) up.v[i] = -up.v[i];
    ArmijoConfig acfg;
    acfg.alpha0 = 1.0 / 1.0e4;
    acfg.max_backtracks = 4;
    try {
      armijo_search(C0, up, J0, slope, acfg, prob, &base.state);
      FAIL("uphill direction was accepted");
    } catch (const line_search_error& err) {
      CHECK(err.last_alpha ==
            Approx(acfg.alpha0 * std::pow(acfg.backtrack, 3)));
      CHECK(err.last_cost > J0);
    }
  }
}

TEST_CASE("short descent run is monotone, admissible, and repeatable") {
  Setup s = mesfet_setup(20);
  SolveResult base = solve_state(s.C, s.bc, s.params, s.cfg);
  CostConfig probe = make_current_cost(s.C, 0.0);
  double I_ref = observed_current(base.state, probe);
  CostConfig cost = make_current_cost(s.C, 2.0 * I_ref, 1.0);

  ArmijoConfig acfg;
  acfg.max_iters = 2;
  acfg.grad_tol = 1e-12;

  OptimizationTrace a = gradient_descent(s.C, s.bc, s.params, acfg, cost, s.cfg);
  REQUIRE(a.rows.size() >= 2);
  CHECK(a.rows.front().current == Approx(I_ref).epsilon(1e-10));
  for (size_t k = 0; k + 1 < a.rows.size(); ++k) {
    CHECK(a.rows[k + 1].cost < a.rows[k].cost);
    CHECK(a.rows[k].alpha > 0.0);
  }
  CHECK(a.rows.back().alpha == 0.0);
  CHECK(min_value(a.C_opt) > 0.0);
  CHECK(a.forward_solves >= static_cast<int>(a.rows.size()));
  for (int i : dirichlet_nodes(*s.mesh)) CHECK(a.C_opt.v[i] == s.C.v[i]);

  OptimizationTrace b = gradient_descent(s.C, s.bc, s.params, acfg, cost, s.cfg);
  REQUIRE(b.rows.size() == a.rows.size());
  for (size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(b.rows[k].cost == a.rows[k].cost);
    CHECK(b.rows[k].grad_norm == a.rows[k].grad_norm);
    CHECK(b.rows[k].alpha == a.rows[k].alpha);
    CHECK(b.rows[k].current == a.rows[k].current);
  }
  for (int i = 0; i < a.C_opt.size(); ++i) CHECK(b.C_opt.v[i] == a.C_opt.v[i]);
}

TEST_CASE("matched density target stops at the start") {
  Setup s = mesfet_setup(16);
  SolveResult base = solve_state(s.C, s.bc, s.params, s.cfg);
  CostConfig cost = make_density_cost(s.C, squared(base.state.rho), 2.0);

  ArmijoConfig acfg;
  OptimizationTrace tr = gradient_descent(s.C, s.bc, s.params, acfg, cost, s.cfg);
  CHECK(tr.reason == StopReason::tolerance);
  REQUIRE(tr.rows.size() == 1);
  CHECK(tr.rows[0].cost == Approx(0.0).margin(1e-14));
  CHECK(tr.rows[0].grad_norm <= acfg.grad_tol);
  CHECK(tr.forward_solves == 1);
  for (int i = 0; i < tr.C_opt.size(); ++i) CHECK(tr.C_opt.v[i] == s.C.v[i]);
}

TEST_CASE("classical limit descends its own landscape") {
  Setup s = mesfet_setup(16);
  s.params.eps2 = 0.0;
  SolveResult base = solve_state(s.C, s.bc, s.params, s.cfg);
  CostConfig probe = make_current_cost(s.C, 0.0);
  double I_ref = observed_current(base.state, probe);
  CostConfig cost = make_current_cost(s.C, 2.0 * I_ref, 1.0);

  ArmijoConfig acfg;
  acfg.max_iters = 1;
  acfg.grad_tol = 1e-12;
  OptimizationTrace tr = gradient_descent(s.C, s.bc, s.params, acfg, cost, s.cfg);
  REQUIRE(tr.rows.size() == 2);
  CHECK(tr.reason == StopReason::max_iters);
  CHECK(tr.rows[1].cost < tr.rows[0].cost);
  CHECK(min_value(tr.C_opt) > 0.0);
  for (int i : dirichlet_nodes(*s.mesh)) CHECK(tr.C_opt.v[i] == s.C.v[i]);
}
