#pragma once
#include <cstdio>
#include <limits>

#include "qdd/boundary.hpp"
#include "qdd/elliptic.hpp"
#include "qdd/system.hpp"

namespace qdd {

// (vol + sigma^2 L) u = vol target with u pinned to trace on contacts:
// blends the contact trace into the bulk target over a few cells
inline ScalarField screened_extension(const ScalarField& target,
                                      const ScalarField& trace, double cells,
                                      const LinearConfig& lin = {}) {
  const Mesh& m = *target.mesh;
  auto pin = dirichlet_mask(m);
  double sigma2 = std::max(cells, 1e-3) * std::max(cells, 1e-3) * m.hx * m.hy;
  ScalarField w(target.mesh, sigma2);
  std::vector<double> vol_diag(m.vol.begin(), m.vol.end());
  SparseMat A = assemble_weighted_laplacian(m, &w, vol_diag, pin);
  ScalarField fvol = target;
  for (int i = 0; i < fvol.size(); ++i) fvol.v[i] *= m.vol[i];
  Vec b = dirichlet_rhs(m, &w, fvol, trace, pin);
  Vec x = solve_spd(A, b, lin);
  ScalarField u(target.mesh, 0.0, BcRole::dirichlet_lifted);
  for (int i = 0; i < u.size(); ++i) u.v[i] = x[i];
  return u;
}

// cold start: density blends contact traces into the neutral bulk level,
// potential solves the space charge it induces, S extends harmonically
inline StateTriple initial_state(const ScalarField& C, const BoundaryData& bc,
                                 const ModelParams& p,
                                 const SolverConfig& cfg) {
  if (min_value(C) <= 0.0)
    throw positivity_error("doping must be positive");
  ScalarField sqrtC = C;
  for (double& x : sqrtC.v) x = std::sqrt(x);
  ScalarField rho0 = screened_extension(sqrtC, bc.rho,
                                        cfg.init_smoothing_cells, cfg.linear);
  ScalarField S0 = harmonic_extension(bc.S, nullptr, cfg.linear);
  ScalarField wl(C.mesh, p.lambda2);
  ScalarField f = squared(rho0);
  for (int i = 0; i < f.size(); ++i) f.v[i] -= C.v[i];
  ScalarField V0 =
      solve_weighted_poisson(&wl, f, bc.V, dirichlet_mask(*C.mesh), cfg.linear);
  return {rho0, V0, S0};
}

namespace detail {

inline Vec rv_residual(const StateTriple& u, const ScalarField& C,
                       const ModelParams& p) {
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  ScalarField rho2 = squared(u.rho);
  ScalarField L1rho = flux_apply(u.rho);
  ScalarField L1V = flux_apply(u.V);
  Vec R = Vec::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    if (m.is_dirichlet(i)) continue;
    double chem = p.enthalpy.h(rho2.v[i]) + u.V.v[i] + vext_at(p, i) - u.S.v[i];
    R[i] = p.eps2 * L1rho.v[i] + m.vol[i] * u.rho.v[i] * chem;
    R[n + i] = p.lambda2 * L1V.v[i] - m.vol[i] * (rho2.v[i] - C.v[i]);
  }
  return R;
}

inline SparseMat rv_jacobian(const StateTriple& u, const ScalarField& C,
                             const ModelParams& p) {
  (void)C;
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  auto pin = dirichlet_mask(m);
  qdd::detail::TripletSink s{pin, n, {}};
  s.t.reserve(14 * static_cast<std::size_t>(n));
  ScalarField rho2 = squared(u.rho);
  for_each_face(m, [&](int P, int Q, double c) {
    for (auto [b, w] : {std::pair<int, double>{0, p.eps2},
                        std::pair<int, double>{1, p.lambda2}}) {
      s.add(b, P, b, P, w * c);
      s.add(b, P, b, Q, -w * c);
      s.add(b, Q, b, Q, w * c);
      s.add(b, Q, b, P, -w * c);
    }
  });
  for (int i = 0; i < n; ++i) {
    if (pin[i]) continue;
    double vol = m.vol[i];
    double t = rho2.v[i];
    double chem = p.enthalpy.h(t) + u.V.v[i] + vext_at(p, i) - u.S.v[i];
    s.add(0, i, 0, i, vol * (chem + 2.0 * t * p.enthalpy.dh(t)));
    s.add(0, i, 1, i, vol * u.rho.v[i]);
    s.add(1, i, 0, i, -2.0 * vol * u.rho.v[i]);
  }
  s.pin_rows(2);
  SparseMat A(2 * n, 2 * n);
  A.setFromTriplets(s.t.begin(), s.t.end());
  A.makeCompressed();
  return A;
}

// coupled Newton in (rho, V) at frozen S; keeps the density positive
inline void rv_newton(StateTriple& u, const ScalarField& C,
                      const ModelParams& p, const SolverConfig& cfg,
                      double tol, int max_iters) {
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  for (int it = 0; it < max_iters; ++it) {
    Vec R = rv_residual(u, C, p);
    double r = residual_norm(m, R);
    if (r <= tol) return;
    SparseMat A = rv_jacobian(u, C, p);
    Vec d = solve_general(A, (-R).eval(), cfg.linear);
    double alpha = 1.0;
    for (int i = 0; i < n; ++i)  // start from the largest positive step
      if (d[i] < 0.0 && u.rho.v[i] > cfg.rho_floor)
        alpha = std::min(alpha, 0.9 * (cfg.rho_floor - u.rho.v[i]) / d[i]);
    StateTriple best = u;
    double best_r = std::numeric_limits<double>::infinity();
    for (int half = 0; half < 14; ++half, alpha *= 0.5) {
      StateTriple trial = u;
      for (int i = 0; i < n; ++i) {
        trial.rho.v[i] += alpha * d[i];
        trial.V.v[i] += alpha * d[n + i];
      }
      if (min_value(trial.rho) <= cfg.rho_floor) continue;
      double rt = residual_norm(m, rv_residual(trial, C, p));
      if (rt < r) {
        u = trial;
        best_r = rt;
        break;
      }
      if (rt < best_r) {
        best_r = rt;
        best = trial;
      }
    }
    if (best_r >= r) {
      if (!std::isfinite(best_r))
        throw nonconvergence_error("density update lost positivity", r, it);
      u = best;  // accept the least-bad step and let the outer loop damp
      return;
    }
  }
}

}  // namespace detail

// energy of a density profile against a frozen S field: quantum part,
// pressure integral, self-consistent field energy, and the drive term
inline double energy_eval(const ScalarField& rho, const ScalarField& S,
                          const ScalarField& C, const BoundaryData& bc,
                          const ModelParams& p, const LinearConfig& lin = {}) {
  const Mesh& m = *rho.mesh;
  auto pin = dirichlet_mask(m);
  ScalarField phi_e = harmonic_extension(bc.V, nullptr, lin);
  ScalarField wl(rho.mesh, p.lambda2);
  ScalarField f = squared(rho);
  for (int i = 0; i < f.size(); ++i) f.v[i] -= C.v[i];
  ScalarField zero(rho.mesh, 0.0);
  ScalarField Vt = solve_weighted_poisson(&wl, f, zero, pin, lin);

  double E = p.eps2 * dirichlet_form(rho, rho);
  E += 0.5 * p.lambda2 * dirichlet_form(Vt, Vt);
  for (int i = 0; i < m.n_nodes(); ++i) {
    double t = rho.v[i] * rho.v[i];
    E += m.vol[i] * p.enthalpy.H(t);
    E -= m.vol[i] * (S.v[i] - phi_e.v[i] - vext_at(p, i)) * t;
  }
  return E;
}

// outer loop: damped S update, coupled (rho, V) Newton inside, and a full
// three-field Newton polish once the residual is small
inline SolveResult gummel_solve(const ScalarField& C, const BoundaryData& bc,
                                const ModelParams& p, const SolverConfig& cfg,
                                const StateTriple* warm = nullptr) {
  const Mesh& m = *C.mesh;
  const int n = m.n_nodes();
  StateTriple u = warm ? *warm : initial_state(C, bc, p, cfg);
  double r = residual_norm(m, qdd_residual(u, C, p));
  SolveResult out{u, r, 0, 0};
  if (warm && r <= cfg.nonlinear_tol) return out;

  // each sweep refreshes S against the current density, measures the
  // residual at that consistent point, then retunes (rho, V) for the next one
  double beta = 1.0;
  double r_prev = warm ? r : std::numeric_limits<double>::infinity();
  while (out.outer_iters < cfg.max_outer) {
    ++out.outer_iters;
    StateTriple snap = u;
    ScalarField rho2 = squared(u.rho);
    ScalarField S_new = harmonic_extension(bc.S, &rho2, cfg.linear);
    for (int i = 0; i < n; ++i)
      u.S.v[i] = (1.0 - beta) * u.S.v[i] + beta * S_new.v[i];
    r = residual_norm(m, qdd_residual(u, C, p));
    if (cfg.verbose)
      std::printf("  sweep %3d  residual %.3e  damping %.4f\n",
                  out.outer_iters, r, beta);
    if (r <= cfg.nonlinear_tol) {
      out.state = u;
      out.residual = r;
      return out;
    }
    if (r < cfg.newton_switch) break;
    if (r > r_prev && beta > cfg.damping_floor) {
      u = snap;
      beta = std::max(cfg.damping_floor, 0.5 * beta);
      continue;
    }
    r_prev = r;
    beta = std::min(1.0, 2.0 * beta);
    double tol_in = std::max(0.2 * cfg.nonlinear_tol,
                             0.02 * std::min(r_prev, 1.0));
    detail::rv_newton(u, C, p, cfg, tol_in, 25);
  }
  if (r >= cfg.newton_switch)
    throw nonconvergence_error("outer sweep budget exhausted", r,
                               out.outer_iters);

  while (out.newton_iters < cfg.max_newton) {
    Vec R = qdd_residual(u, C, p);
    r = residual_norm(m, R);
    if (r <= cfg.nonlinear_tol) {
      out.state = u;
      out.residual = r;
      return out;
    }
    ++out.newton_iters;
    SparseMat A = qdd_jacobian(u, C, p);
    Vec d = solve_general(A, (-R).eval(), cfg.linear);
    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half < 22; ++half, alpha *= 0.5) {
      StateTriple trial = u;
      for (int i = 0; i < n; ++i) {
        trial.rho.v[i] += alpha * d[i];
        trial.V.v[i] += alpha * d[n + i];
        trial.S.v[i] += alpha * d[2 * n + i];
      }
      if (min_value(trial.rho) <= cfg.rho_floor) continue;
      double rt = residual_norm(m, qdd_residual(trial, C, p));
      if (rt < r) {
        u = trial;
        accepted = true;
        if (cfg.verbose)
          std::printf("  newton %3d residual %.3e  step %.2e\n",
                      out.newton_iters, rt, alpha);
        break;
      }
    }
    if (!accepted)
      throw nonconvergence_error("newton line search stalled", r,
                                 out.newton_iters);
  }
  throw nonconvergence_error("newton budget exhausted", r, out.newton_iters);
}

namespace detail {

// nonlinear Poisson in V for a frozen S: density follows exp(S - V - vext)
// at free nodes; if pinned_n is given its values override contact nodes
inline void poisson_newton(ScalarField& V, const ScalarField& S,
                           const ScalarField& C, const ModelParams& p,
                           const SolverConfig& cfg, double tol) {
  const Mesh& m = *V.mesh;
  const int n = m.n_nodes();
  auto pin = dirichlet_mask(m);
  for (int it = 0; it < 60; ++it) {
    ScalarField nB = boltzmann_density(V, S, p);
    ScalarField L1V = flux_apply(V);
    Vec R(n);
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
      R[i] = pin[i] ? 0.0
                    : p.lambda2 * L1V.v[i] - m.vol[i] * (nB.v[i] - C.v[i]);
      r = std::max(r, std::abs(R[i]) / m.vol[i]);
    }
    if (r <= tol) return;
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (!pin[i]) diag[i] = m.vol[i] * nB.v[i];
    ScalarField wl(V.mesh, p.lambda2);
    SparseMat A = assemble_weighted_laplacian(m, &wl, diag, pin);
    Vec d = solve_spd(A, (-R).eval(), cfg.linear);
    double alpha = std::min(1.0, 4.0 / std::max(1e-300,
                                                d.lpNorm<Eigen::Infinity>()));
    for (int half = 0; half < 30; ++half, alpha *= 0.5) {
      ScalarField Vt = V;
      for (int i = 0; i < n; ++i) Vt.v[i] += alpha * d[i];
      ScalarField nt = boltzmann_density(Vt, S, p);
      ScalarField Lt = flux_apply(Vt);
      double rt = 0.0;
      for (int i = 0; i < n; ++i)
        if (!pin[i])
          rt = std::max(rt, std::abs(p.lambda2 * Lt.v[i] -
                                     m.vol[i] * (nt.v[i] - C.v[i])) /
                                m.vol[i]);
      if (rt < r) {
        V = Vt;
        break;
      }
      if (half == 29)
        throw nonconvergence_error("field update line search stalled", r, it);
    }
  }
  throw nonconvergence_error("field solve budget exhausted", -1.0, 60);
}

}  // namespace detail

// zero quantum length: Boltzmann closure at free nodes, the imposed density
// trace at contact rows, unknowns (V, S)
inline SolveResult solve_dd(const ScalarField& C, const BoundaryData& bc,
                            const ModelParams& p, const SolverConfig& cfg,
                            const StateTriple* warm = nullptr) {
  const Mesh& m = *C.mesh;
  const int n = m.n_nodes();
  ScalarField V = warm ? warm->V : harmonic_extension(bc.V, nullptr, cfg.linear);
  ScalarField S = warm ? warm->S : harmonic_extension(bc.S, nullptr, cfg.linear);

  auto pack_state = [&](const ScalarField& Vv, const ScalarField& Ss) {
    ScalarField rho = dd_density(Vv, Ss, bc.rho, p);
    for (double& x : rho.v) x = std::sqrt(x);
    for (int i = 0; i < n; ++i)
      if (m.is_dirichlet(i)) rho.v[i] = bc.rho.v[i];
    return StateTriple{rho, Vv, Ss};
  };

  double r = residual_norm(m, dd_residual(V, S, C, bc.rho, p));
  SolveResult out{pack_state(V, S), r, 0, 0};
  if (warm && r <= cfg.nonlinear_tol) return out;

  double beta = 1.0;
  double r_prev = warm ? r : std::numeric_limits<double>::infinity();
  while (out.outer_iters < cfg.max_outer) {
    ++out.outer_iters;
    ScalarField Vs = V, Ss = S;
    double tol_in = std::max(0.2 * cfg.nonlinear_tol,
                             0.02 * std::min(r_prev, 1.0));
    detail::poisson_newton(V, S, C, p, cfg, tol_in);
    ScalarField nB = dd_density(V, S, bc.rho, p);
    ScalarField S_new = harmonic_extension(bc.S, &nB, cfg.linear);
    for (int i = 0; i < n; ++i)
      S.v[i] = (1.0 - beta) * S.v[i] + beta * S_new.v[i];
    r = residual_norm(m, dd_residual(V, S, C, bc.rho, p));
    if (cfg.verbose)
      std::printf("  sweep %3d  residual %.3e  damping %.4f\n",
                  out.outer_iters, r, beta);
    if (r <= cfg.nonlinear_tol) {
      out.state = pack_state(V, S);
      out.residual = r;
      return out;
    }
    if (r < cfg.newton_switch) break;
    if (r > r_prev && beta > cfg.damping_floor) {
      V = Vs;
      S = Ss;
      beta = std::max(cfg.damping_floor, 0.5 * beta);
      continue;
    }
    r_prev = r;
    beta = std::min(1.0, 2.0 * beta);
  }
  if (r >= cfg.newton_switch)
    throw nonconvergence_error("outer sweep budget exhausted", r,
                               out.outer_iters);

  while (out.newton_iters < cfg.max_newton) {
    Vec R = dd_residual(V, S, C, bc.rho, p);
    r = residual_norm(m, R);
    if (r <= cfg.nonlinear_tol) {
      out.state = pack_state(V, S);
      out.residual = r;
      return out;
    }
    ++out.newton_iters;
    SparseMat A = dd_jacobian(V, S, C, bc.rho, p);
    Vec d = solve_general(A, (-R).eval(), cfg.linear);
    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half < 22; ++half, alpha *= 0.5) {
      ScalarField Vt = V, St = S;
      for (int i = 0; i < n; ++i) {
        Vt.v[i] += alpha * d[i];
        St.v[i] += alpha * d[n + i];
      }
      double rt = residual_norm(m, dd_residual(Vt, St, C, bc.rho, p));
      if (rt < r) {
        V = Vt;
        S = St;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw nonconvergence_error("newton line search stalled", r,
                                 out.newton_iters);
  }
  throw nonconvergence_error("newton budget exhausted", r, out.newton_iters);
}

// density of the zero quantum length model at a frozen S, with the contact
// density held at its trace: the comparison profile for the energy bound
inline ScalarField semiclassical_density(const ScalarField& C,
                                         const BoundaryData& bc,
                                         const ScalarField& S,
                                         const ModelParams& p,
                                         const SolverConfig& cfg) {
  const Mesh& m = *C.mesh;
  const int n = m.n_nodes();
  auto pin = dirichlet_mask(m);
  ScalarField V = harmonic_extension(bc.V, nullptr, cfg.linear);
  auto density = [&](const ScalarField& Vv) {
    ScalarField nb(C.mesh, 0.0);
    for (int i = 0; i < n; ++i)
      nb.v[i] = pin[i] ? bc.rho.v[i] * bc.rho.v[i]
                       : std::exp(S.v[i] - Vv.v[i] - vext_at(p, i));
    return nb;
  };
  for (int it = 0; it < 80; ++it) {
    ScalarField nB = density(V);
    ScalarField L1V = flux_apply(V);
    Vec R(n);
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
      R[i] = pin[i] ? 0.0
                    : p.lambda2 * L1V.v[i] - m.vol[i] * (nB.v[i] - C.v[i]);
      r = std::max(r, std::abs(R[i]) / m.vol[i]);
    }
    if (r <= 0.1 * cfg.nonlinear_tol) {
      ScalarField rho = nB;
      for (double& x : rho.v) x = std::sqrt(x);
      return rho;
    }
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (!pin[i]) diag[i] = m.vol[i] * nB.v[i];
    ScalarField wl(C.mesh, p.lambda2);
    SparseMat A = assemble_weighted_laplacian(m, &wl, diag, pin);
    Vec d = solve_spd(A, (-R).eval(), cfg.linear);
    double alpha = std::min(1.0, 4.0 / std::max(1e-300,
                                                d.lpNorm<Eigen::Infinity>()));
    for (int half = 0; half < 30; ++half, alpha *= 0.5) {
      ScalarField Vt = V;
      for (int i = 0; i < n; ++i) Vt.v[i] += alpha * d[i];
      ScalarField nt = density(Vt);
      ScalarField Lt = flux_apply(Vt);
      double rt = 0.0;
      for (int i = 0; i < n; ++i)
        if (!pin[i])
          rt = std::max(rt, std::abs(p.lambda2 * Lt.v[i] -
                                     m.vol[i] * (nt.v[i] - C.v[i])) /
                                m.vol[i]);
      if (rt < r) {
        V = Vt;
        break;
      }
    }
  }
  throw nonconvergence_error("semiclassical solve budget exhausted", -1.0, 80);
}

// dispatch on the quantum length: zero selects the Boltzmann closure
inline SolveResult solve_state(const ScalarField& C, const BoundaryData& bc,
                               const ModelParams& p, const SolverConfig& cfg,
                               const StateTriple* warm = nullptr) {
  return p.eps2 > 0.0 ? gummel_solve(C, bc, p, cfg, warm)
                      : solve_dd(C, bc, p, cfg, warm);
}

}  // namespace qdd
