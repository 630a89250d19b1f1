#pragma once
#include <vector>

#include "qdd/operators.hpp"
#include "qdd/state.hpp"

namespace qdd {

// Stacked discrete systems for the coupled model. Unknown ordering is
// [rho; V; S] (quantum) or [V; S] (zero quantum length, Boltzmann closure).
// Dirichlet rows are identity and their columns are dropped, so one matrix
// serves the Newton step and, transposed, the sensitivity solve.

inline ScalarField squared(const ScalarField& a) {
  ScalarField b = a;
  for (double& x : b.v) x *= x;
  return b;
}

// box residual of the quantum triple; zero on Dirichlet rows
inline Vec qdd_residual(const StateTriple& u, const ScalarField& C,
                        const ModelParams& p) {
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  ScalarField rho2 = squared(u.rho);
  ScalarField L1rho = flux_apply(u.rho);
  ScalarField L1V = flux_apply(u.V);
  ScalarField LrS = flux_apply(&rho2, u.S);
  Vec R = Vec::Zero(3 * n);
  for (int i = 0; i < n; ++i) {
    if (m.is_dirichlet(i)) continue;
    double chem = p.enthalpy.h(rho2.v[i]) + u.V.v[i] + vext_at(p, i) - u.S.v[i];
    R[i] = p.eps2 * L1rho.v[i] + m.vol[i] * u.rho.v[i] * chem;
    R[n + i] = p.lambda2 * L1V.v[i] - m.vol[i] * (rho2.v[i] - C.v[i]);
    R[2 * n + i] = LrS.v[i];
  }
  return R;
}

// largest residual density over free nodes: max |R| / vol per equation
inline double residual_norm(const Mesh& m, const Vec& R) {
  const int n = m.n_nodes();
  const int blocks = static_cast<int>(R.size()) / n;
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    if (m.is_dirichlet(i)) continue;
    for (int b = 0; b < blocks; ++b)
      r = std::max(r, std::abs(R[b * n + i]) / m.vol[i]);
  }
  return r;
}

namespace detail {

struct TripletSink {
  const std::vector<std::uint8_t>& pin;
  int n;
  std::vector<Eigen::Triplet<double>> t;

  void add(int block_r, int i, int block_c, int j, double v) {
    if (pin[i] || pin[j] || v == 0.0) return;
    t.emplace_back(block_r * n + i, block_c * n + j, v);
  }
  void pin_rows(int blocks) {
    for (int b = 0; b < blocks; ++b)
      for (int i = 0; i < n; ++i)
        if (pin[i]) t.emplace_back(b * n + i, b * n + i, 1.0);
  }
};

}  // namespace detail

// derivative of the quantum triple residual, rows/columns pinned
inline SparseMat qdd_jacobian(const StateTriple& u, const ScalarField& C,
                              const ModelParams& p) {
  (void)C;
  const Mesh& m = *u.rho.mesh;
  const int n = m.n_nodes();
  auto pin = dirichlet_mask(m);
  detail::TripletSink s{pin, n, {}};
  s.t.reserve(30 * static_cast<std::size_t>(n));
  ScalarField rho2 = squared(u.rho);

  for_each_face(m, [&](int P, int Q, double c) {
    // plain Laplacian stencils for the quantum and Poisson blocks
    for (auto [b, w] : {std::pair<int, double>{0, p.eps2},
                        std::pair<int, double>{1, p.lambda2}}) {
      s.add(b, P, b, P, w * c);
      s.add(b, P, b, Q, -w * c);
      s.add(b, Q, b, Q, w * c);
      s.add(b, Q, b, P, -w * c);
    }
    // current block: density-weighted Laplacian plus its density derivative
    double wbar = 0.5 * (rho2.v[P] + rho2.v[Q]);
    double dS = u.S.v[P] - u.S.v[Q];
    s.add(2, P, 2, P, wbar * c);
    s.add(2, P, 2, Q, -wbar * c);
    s.add(2, Q, 2, Q, wbar * c);
    s.add(2, Q, 2, P, -wbar * c);
    s.add(2, P, 0, P, u.rho.v[P] * c * dS);
    s.add(2, P, 0, Q, u.rho.v[Q] * c * dS);
    s.add(2, Q, 0, Q, -u.rho.v[Q] * c * dS);
    s.add(2, Q, 0, P, -u.rho.v[P] * c * dS);
  });

  for (int i = 0; i < n; ++i) {
    if (pin[i]) continue;
    double vol = m.vol[i];
    double t = rho2.v[i];
    double chem = p.enthalpy.h(t) + u.V.v[i] + vext_at(p, i) - u.S.v[i];
    s.add(0, i, 0, i, vol * (chem + 2.0 * t * p.enthalpy.dh(t)));
    s.add(0, i, 1, i, vol * u.rho.v[i]);
    s.add(0, i, 2, i, -vol * u.rho.v[i]);
    s.add(1, i, 0, i, -2.0 * vol * u.rho.v[i]);
  }
  s.pin_rows(3);

  SparseMat A(3 * n, 3 * n);
  A.setFromTriplets(s.t.begin(), s.t.end());
  A.makeCompressed();
  return A;
}

// Boltzmann closure used when the quantum term is switched off
inline ScalarField boltzmann_density(const ScalarField& V, const ScalarField& S,
                                     const ModelParams& p) {
  ScalarField nB(V.mesh, 0.0);
  for (int i = 0; i < nB.size(); ++i)
    nB.v[i] = std::exp(S.v[i] - V.v[i] - vext_at(p, i));
  return nB;
}

// zero quantum length density: Boltzmann at free nodes, while contact rows
// keep the imposed density trace (only Dirichlet-node values of rho_D are
// read). The algebraic relation holds weakly, so it never applies at rows
// whose value is data.
inline ScalarField dd_density(const ScalarField& V, const ScalarField& S,
                              const ScalarField& rho_D, const ModelParams& p) {
  const Mesh& m = *V.mesh;
  ScalarField nB = boltzmann_density(V, S, p);
  for (int i = 0; i < nB.size(); ++i)
    if (m.is_dirichlet(i)) nB.v[i] = rho_D.v[i] * rho_D.v[i];
  return nB;
}

inline Vec dd_residual(const ScalarField& V, const ScalarField& S,
                       const ScalarField& C, const ScalarField& rho_D,
                       const ModelParams& p) {
  const Mesh& m = *V.mesh;
  const int n = m.n_nodes();
  ScalarField nB = dd_density(V, S, rho_D, p);
  ScalarField L1V = flux_apply(V);
  ScalarField LnS = flux_apply(&nB, S);
  Vec R = Vec::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    if (m.is_dirichlet(i)) continue;
    R[i] = p.lambda2 * L1V.v[i] - m.vol[i] * (nB.v[i] - C.v[i]);
    R[n + i] = LnS.v[i];
  }
  return R;
}

inline SparseMat dd_jacobian(const ScalarField& V, const ScalarField& S,
                             const ScalarField& C, const ScalarField& rho_D,
                             const ModelParams& p) {
  (void)C;
  const Mesh& m = *V.mesh;
  const int n = m.n_nodes();
  auto pin = dirichlet_mask(m);
  detail::TripletSink s{pin, n, {}};
  s.t.reserve(22 * static_cast<std::size_t>(n));
  ScalarField nB = dd_density(V, S, rho_D, p);

  for_each_face(m, [&](int P, int Q, double c) {
    s.add(0, P, 0, P, p.lambda2 * c);
    s.add(0, P, 0, Q, -p.lambda2 * c);
    s.add(0, Q, 0, Q, p.lambda2 * c);
    s.add(0, Q, 0, P, -p.lambda2 * c);

    double wbar = 0.5 * (nB.v[P] + nB.v[Q]);
    double dS = S.v[P] - S.v[Q];
    s.add(1, P, 1, P, wbar * c + 0.5 * nB.v[P] * c * dS);
    s.add(1, P, 1, Q, -wbar * c + 0.5 * nB.v[Q] * c * dS);
    s.add(1, Q, 1, Q, wbar * c - 0.5 * nB.v[Q] * c * dS);
    s.add(1, Q, 1, P, -wbar * c - 0.5 * nB.v[P] * c * dS);

    s.add(1, P, 0, P, -0.5 * nB.v[P] * c * dS);
    s.add(1, P, 0, Q, -0.5 * nB.v[Q] * c * dS);
    s.add(1, Q, 0, Q, 0.5 * nB.v[Q] * c * dS);
    s.add(1, Q, 0, P, 0.5 * nB.v[P] * c * dS);
  });

  for (int i = 0; i < n; ++i) {
    if (pin[i]) continue;
    s.add(0, i, 0, i, m.vol[i] * nB.v[i]);
    s.add(0, i, 1, i, -m.vol[i] * nB.v[i]);
  }
  s.pin_rows(2);

  SparseMat A(2 * n, 2 * n);
  A.setFromTriplets(s.t.begin(), s.t.end());
  A.makeCompressed();
  return A;
}

}  // namespace qdd
