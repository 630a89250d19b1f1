#pragma once
#include <string>
#include <vector>

#include "qdd/linear_solver.hpp"
#include "qdd/operators.hpp"

namespace qdd {

// -div(w grad u) = f with u = g on pinned nodes, zero-flux elsewhere
inline ScalarField solve_weighted_poisson(const ScalarField* w,
                                          const ScalarField& f,
                                          const ScalarField& g,
                                          const std::vector<std::uint8_t>& pinned,
                                          const LinearConfig& cfg = {}) {
  const Mesh& m = *f.mesh;
  ScalarField fvol = f;
  for (int n = 0; n < fvol.size(); ++n) fvol.v[n] *= m.vol[n];
  SparseMat A = assemble_weighted_laplacian(m, w, {}, pinned);
  Vec b = dirichlet_rhs(m, w, fvol, g, pinned);
  Vec x = solve_spd(A, b, cfg);
  ScalarField u(f.mesh, 0.0, BcRole::dirichlet_lifted);
  for (int n = 0; n < u.size(); ++n) u.v[n] = x[n];
  return u;
}

inline ScalarField harmonic_extension(const ScalarField& g,
                                      const ScalarField* w = nullptr,
                                      const LinearConfig& cfg = {}) {
  ScalarField zero(g.mesh, 0.0);
  return solve_weighted_poisson(w, zero, g, dirichlet_mask(*g.mesh), cfg);
}

// trace 1 on the named contact, 0 on every other Dirichlet node,
// harmonic inside: the observation weight for contact currents
inline ScalarField make_contact_mask(std::shared_ptr<const Mesh> mesh,
                                     const std::string& contact,
                                     const LinearConfig& cfg = {}) {
  const Mesh& m = *mesh;
  if (boundary_nodes(m, contact).empty())
    throw geometry_error("no nodes on contact " + contact);
  ScalarField g(mesh, 0.0);
  for (int n : boundary_nodes(m, contact)) g.v[n] = 1.0;
  return harmonic_extension(g, nullptr, cfg);
}

// current through the named contact for carrier weight w and potential S
inline double boundary_current(const ScalarField& w, const ScalarField& mask,
                               const ScalarField& S) {
  return dirichlet_form(&w, mask, S);
}

// (vol + sigma^2 L) u = vol f, pure Neumann: preserves constants and bounds
inline ScalarField screened_smooth(const ScalarField& f, double sigma_cells,
                                   const LinearConfig& cfg = {}) {
  const Mesh& m = *f.mesh;
  if (sigma_cells <= 0.0) return f;
  double sigma2 = sigma_cells * sigma_cells * m.hx * m.hy;
  const int n = m.n_nodes();
  std::vector<std::uint8_t> none(n, 0);
  std::vector<double> vol_diag(m.vol.begin(), m.vol.end());
  ScalarField wconst(f.mesh, sigma2);
  SparseMat A = assemble_weighted_laplacian(m, &wconst, vol_diag, none);
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = m.vol[i] * f.v[i];
  Vec x = solve_spd(A, b, cfg);
  ScalarField u(f.mesh, 0.0);
  for (int i = 0; i < n; ++i) u.v[i] = x[i];
  return u;
}

}  // namespace qdd
