#pragma once
#include <string>

#include "qdd/elliptic.hpp"
#include "qdd/system.hpp"

namespace qdd {

enum class CostKind { current_tracking, density_tracking };

// tracking target plus gradient penalty anchored at the reference doping;
// observation is the harmonic weight with trace 1 on the observed contact
struct CostConfig {
  CostKind kind = CostKind::current_tracking;
  double target_current = 0.0;
  ScalarField target_density;
  double gamma = 1.0;
  ScalarField C_ref;
  ScalarField observation;
};

inline CostConfig make_current_cost(const ScalarField& C_ref,
                                    double target_current, double gamma = 1.0,
                                    const std::string& contact = "drain",
                                    const LinearConfig& lin = {}) {
  if (gamma <= 0.0) throw config_error("cost.gamma must be > 0");
  CostConfig c;
  c.kind = CostKind::current_tracking;
  c.target_current = target_current;
  c.gamma = gamma;
  c.C_ref = C_ref;
  c.observation = make_contact_mask(C_ref.mesh, contact, lin);
  return c;
}

inline CostConfig make_density_cost(const ScalarField& C_ref,
                                    const ScalarField& target_density,
                                    double gamma = 1.0,
                                    const std::string& contact = "drain",
                                    const LinearConfig& lin = {}) {
  if (gamma <= 0.0) throw config_error("cost.gamma must be > 0");
  require_same_mesh(C_ref, target_density);
  CostConfig c;
  c.kind = CostKind::density_tracking;
  c.target_density = target_density;
  c.gamma = gamma;
  c.C_ref = C_ref;
  c.observation = make_contact_mask(C_ref.mesh, contact, lin);
  return c;
}

inline double observed_current(const StateTriple& u, const CostConfig& cost) {
  ScalarField n = squared(u.rho);
  return boundary_current(n, cost.observation, u.S);
}

inline double cost_eval(const StateTriple& u, const ScalarField& C,
                        const CostConfig& cost) {
  require_same_mesh(C, cost.C_ref);
  ScalarField d = C;
  for (int i = 0; i < d.size(); ++i) d.v[i] -= cost.C_ref.v[i];
  double J = 0.5 * cost.gamma * dirichlet_form(d, d);
  if (cost.kind == CostKind::current_tracking) {
    double gap = observed_current(u, cost) - cost.target_current;
    J += 0.5 * gap * gap;
  } else {
    ScalarField e = squared(u.rho);
    for (int i = 0; i < e.size(); ++i) e.v[i] -= cost.target_density.v[i];
    J += 0.5 * inner_vol(e, e);
  }
  return J;
}

// derivative of the tracking term in the stacked [rho; V; S] unknowns,
// zeroed on Dirichlet rows (their values are data, not unknowns)
inline Vec tracking_state_gradient(const StateTriple& u,
                                   const CostConfig& cost) {
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  Vec g = Vec::Zero(3 * n);
  if (cost.kind == CostKind::current_tracking) {
    double gap = observed_current(u, cost) - cost.target_current;
    ScalarField n2 = squared(u.rho);
    ScalarField dIdS = flux_apply(&n2, cost.observation);
    Vec dIdrho = Vec::Zero(n);
    for_each_face(m, [&](int P, int Q, double c) {
      double t = c * (cost.observation.v[P] - cost.observation.v[Q]) *
                 (u.S.v[P] - u.S.v[Q]);
      dIdrho[P] += u.rho.v[P] * t;
      dIdrho[Q] += u.rho.v[Q] * t;
    });
    for (int i = 0; i < n; ++i) {
      if (m.is_dirichlet(i)) continue;
      g[i] = gap * dIdrho[i];
      g[2 * n + i] = gap * dIdS.v[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (m.is_dirichlet(i)) continue;
      double t = u.rho.v[i] * u.rho.v[i];
      g[i] = 2.0 * m.vol[i] * (t - cost.target_density.v[i]) * u.rho.v[i];
    }
  }
  return g;
}

// same derivative in the Boltzmann-closure unknowns [V; S]; the packed
// density carries the closure values, contact traces included
inline Vec tracking_state_gradient_dd(const StateTriple& u,
                                      const CostConfig& cost) {
  const Mesh& m = *u.V.mesh;
  const int n = m.n_nodes();
  ScalarField nB = squared(u.rho);
  Vec g = Vec::Zero(2 * n);
  if (cost.kind == CostKind::current_tracking) {
    double gap = boundary_current(nB, cost.observation, u.S) -
                 cost.target_current;
    ScalarField dIdS = flux_apply(&nB, cost.observation);
    Vec dIdn = Vec::Zero(n);
    for_each_face(m, [&](int P, int Q, double c) {
      double t = 0.5 * c * (cost.observation.v[P] - cost.observation.v[Q]) *
                 (u.S.v[P] - u.S.v[Q]);
      dIdn[P] += t;
      dIdn[Q] += t;
    });
    for (int i = 0; i < n; ++i) {
      if (m.is_dirichlet(i)) continue;
      g[i] = -gap * nB.v[i] * dIdn[i];
      g[n + i] = gap * (dIdS.v[i] + nB.v[i] * dIdn[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (m.is_dirichlet(i)) continue;
      double t = m.vol[i] * (nB.v[i] - cost.target_density.v[i]) * nB.v[i];
      g[i] = -t;
      g[n + i] = t;
    }
  }
  return g;
}

}  // namespace qdd
