#pragma once
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "qdd/cost.hpp"
#include "qdd/solver.hpp"

namespace qdd {

// Lagrange multipliers of the tracking cost; zero trace on every contact
struct AdjointTriple {
  ScalarField xi_rho, xi_V, xi_S;
};

// transpose of the exact state Jacobian against the cost's state gradient;
// Dirichlet rows of the forward matrix are identity with decoupled columns,
// so the transposed solve pins the multipliers to zero there by itself
inline AdjointTriple solve_adjoint(const StateTriple& u, const ScalarField& C,
                                   const ModelParams& p, const CostConfig& cost,
                                   const LinearConfig& lin = {}) {
  auto mesh = u.rho.mesh;
  const int n = mesh->n_nodes();
  AdjointTriple xi{ScalarField(mesh, 0.0, BcRole::homogeneous),
                   ScalarField(mesh, 0.0, BcRole::homogeneous),
                   ScalarField(mesh, 0.0, BcRole::homogeneous)};
  if (p.eps2 > 0.0) {
    SparseMat A = qdd_jacobian(u, C, p);
    Vec rhs = -tracking_state_gradient(u, cost);
    SparseMat At = A.transpose();
    Vec x = solve_general(At, rhs, lin);
    for (int i = 0; i < n; ++i) {
      xi.xi_rho.v[i] = x[i];
      xi.xi_V.v[i] = x[n + i];
      xi.xi_S.v[i] = x[2 * n + i];
    }
  } else {
    SparseMat A = dd_jacobian(u.V, u.S, C, u.rho, p);
    Vec rhs = -tracking_state_gradient_dd(u, cost);
    SparseMat At = A.transpose();
    Vec x = solve_general(At, rhs, lin);
    for (int i = 0; i < n; ++i) {
      xi.xi_V.v[i] = x[i];
      xi.xi_S.v[i] = x[n + i];
    }
  }
  return xi;
}

// raw derivative vector of the reduced cost: pairing it with any zero-trace
// direction d gives d/dt J(C + t d) at t = 0
inline ScalarField reduced_derivative(const ScalarField& xi_V,
                                      const ScalarField& C,
                                      const CostConfig& cost) {
  ScalarField d = C;
  for (int i = 0; i < d.size(); ++i) d.v[i] -= cost.C_ref.v[i];
  ScalarField g = flux_apply(d);
  const Mesh& m = *C.mesh;
  for (int i = 0; i < g.size(); ++i)
    g.v[i] = cost.gamma * g.v[i] + m.vol[i] * xi_V.v[i];
  return g;
}

inline double pair_with_direction(const ScalarField& dJ,
                                  const ScalarField& dir) {
  require_same_mesh(dJ, dir);
  double s = 0.0;
  for (int i = 0; i < dJ.size(); ++i) s += dJ.v[i] * dir.v[i];
  return s;
}

// Riesz representative in the zero-trace H1 inner product: the Sobolev
// gradient used for descent; vanishing trace keeps doping updates admissible
inline ScalarField riesz_gradient(const ScalarField& xi_V, const ScalarField& C,
                                  const CostConfig& cost,
                                  const LinearConfig& lin = {}) {
  const Mesh& m = *C.mesh;
  ScalarField dJ = reduced_derivative(xi_V, C, cost);
  auto pin = dirichlet_mask(m);
  SparseMat A = assemble_weighted_laplacian(m, nullptr, {}, pin);
  Vec b(m.n_nodes());
  for (int i = 0; i < m.n_nodes(); ++i) b[i] = pin[i] ? 0.0 : dJ.v[i];
  Vec x = solve_spd(A, b, lin);
  ScalarField g(C.mesh, 0.0, BcRole::homogeneous);
  for (int i = 0; i < g.size(); ++i) g.v[i] = x[i];
  return g;
}

struct GradCheckRow {
  int direction;
  double tau, adjoint, fd, rel_err;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  std::vector<double> best;  // per direction: smallest relative error
  double worst_best = 0.0;
};

// central-difference validation of the adjoint directional derivative over
// random zero-trace directions; forward solves run at a tightened tolerance
inline GradCheckReport fd_gradient_check(const ScalarField& C,
                                         const BoundaryData& bc,
                                         const ModelParams& p,
                                         const CostConfig& cost,
                                         const SolverConfig& scfg,
                                         int n_directions = 5,
                                         unsigned long long seed = 20260822ull) {
  SolverConfig tight = scfg;
  tight.nonlinear_tol = std::min(scfg.nonlinear_tol, 1e-12);
  const Mesh& m = *C.mesh;
  const int n = m.n_nodes();

  SolveResult base = solve_state(C, bc, p, tight);
  AdjointTriple xi = solve_adjoint(base.state, C, p, cost, tight.linear);
  ScalarField dJ = reduced_derivative(xi.xi_V, C, cost);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  GradCheckReport rep;
  for (int dir = 0; dir < n_directions; ++dir) {
    ScalarField d(C.mesh, 0.0, BcRole::homogeneous);
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) {
      if (m.is_dirichlet(i)) continue;
      d.v[i] = uni(rng);
      dmax = std::max(dmax, std::abs(d.v[i]));
    }
    for (double& x : d.v) x /= dmax;
    double adj = pair_with_direction(dJ, d);

    double best = std::numeric_limits<double>::infinity();
    for (double tau : {1e-3, 1e-4, 1e-5}) {
      double J[2];
      for (int s = 0; s < 2; ++s) {
        double sign = s == 0 ? 1.0 : -1.0;
        ScalarField Ct = C;
        for (int i = 0; i < n; ++i) Ct.v[i] += sign * tau * d.v[i];
        SolveResult sr = solve_state(Ct, bc, p, tight, &base.state);
        J[s] = cost_eval(sr.state, Ct, cost);
      }
      double fd = (J[0] - J[1]) / (2.0 * tau);
      double scale = std::max({std::abs(adj), std::abs(fd), 1e-300});
      double rel = std::abs(adj - fd) / scale;
      rep.rows.push_back({dir, tau, adj, fd, rel});
      best = std::min(best, rel);
    }
    rep.best.push_back(best);
    rep.worst_best = std::max(rep.worst_best, best);
  }
  return rep;
}

inline std::string format_gradcheck(const GradCheckReport& rep) {
  std::string out =
      "  dir        tau              adjoint                   fd    rel_err\n";
  char line[160];
  for (const GradCheckRow& r : rep.rows) {
    std::snprintf(line, sizeof line, "%5d  %9.1e  %19.12e  %19.12e  %9.2e\n",
                  r.direction, r.tau, r.adjoint, r.fd, r.rel_err);
    out += line;
  }
  for (std::size_t i = 0; i < rep.best.size(); ++i) {
    std::snprintf(line, sizeof line, "best[%zu] = %9.2e\n", i, rep.best[i]);
    out += line;
  }
  return out;
}

}  // namespace qdd
