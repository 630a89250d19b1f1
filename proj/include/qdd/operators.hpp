#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "qdd/field.hpp"
#include "qdd/mesh.hpp"

namespace qdd {

using SparseMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Visit every face of the box-scheme dual mesh in a fixed order:
// horizontal faces row by row, then vertical faces row by row.
// coef = (dual edge length) / (node distance), halved along boundary rows.
template <class F>
void for_each_face(const Mesh& m, F&& f) {
  for (int j = 0; j < m.ny; ++j) {
    double len = (j == 0 || j == m.ny - 1) ? 0.5 * m.hy : m.hy;
    double c = len / m.hx;
    for (int i = 0; i + 1 < m.nx; ++i) f(m.idx(i, j), m.idx(i + 1, j), c);
  }
  for (int j = 0; j + 1 < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      double len = (i == 0 || i == m.nx - 1) ? 0.5 * m.hx : m.hx;
      f(m.idx(i, j), m.idx(i, j + 1), len / m.hy);
    }
  }
}

inline double face_weight(const ScalarField* w, int p, int q) {
  return w ? 0.5 * (w->v[p] + w->v[q]) : 1.0;
}

// a_w(u,v) = sum over faces of mean(w) * coef * (u_P - u_Q)(v_P - v_Q)
inline double dirichlet_form(const ScalarField* w, const ScalarField& u,
                             const ScalarField& v) {
  double s = 0.0;
  for_each_face(*u.mesh, [&](int p, int q, double c) {
    s += face_weight(w, p, q) * c * (u.v[p] - u.v[q]) * (v.v[p] - v.v[q]);
  });
  return s;
}

inline double dirichlet_form(const ScalarField& u, const ScalarField& v) {
  return dirichlet_form(nullptr, u, v);
}

// y_P = sum over faces at P of mean(w) * coef * (u_P - u_Q):
// the box integral of -div(w grad u), no boundary conditions applied
inline ScalarField flux_apply(const ScalarField* w, const ScalarField& u) {
  ScalarField y(u.mesh, 0.0);
  for_each_face(*u.mesh, [&](int p, int q, double c) {
    double t = face_weight(w, p, q) * c * (u.v[p] - u.v[q]);
    y.v[p] += t;
    y.v[q] -= t;
  });
  return y;
}

inline ScalarField flux_apply(const ScalarField& u) {
  return flux_apply(nullptr, u);
}

inline double inner_vol(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a, b);
  double s = 0.0;
  for (int n = 0; n < a.size(); ++n) s += a.mesh->vol[n] * a.v[n] * b.v[n];
  return s;
}

inline double norm_l2(const ScalarField& a) {
  return std::sqrt(inner_vol(a, a));
}

inline double norm_h1(const ScalarField& a) {
  return std::sqrt(inner_vol(a, a) + dirichlet_form(a, a));
}

inline double norm_linf(const ScalarField& a) {
  double s = 0.0;
  for (double x : a.v) s = std::max(s, std::abs(x));
  return s;
}

inline double rel_l2(const ScalarField& a, const ScalarField& ref) {
  require_same_mesh(a, ref);
  ScalarField d = a;
  for (int n = 0; n < d.size(); ++n) d.v[n] -= ref.v[n];
  double den = norm_l2(ref);
  double num = norm_l2(d);
  return den > 0.0 ? num / den : num;
}

// pointwise |grad u| from central differences, one-sided at the boundary
inline ScalarField nodal_gradient_magnitude(const ScalarField& u) {
  const Mesh& m = *u.mesh;
  ScalarField g(u.mesh, 0.0);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      int il = std::max(i - 1, 0), ir = std::min(i + 1, m.nx - 1);
      int jl = std::max(j - 1, 0), jr = std::min(j + 1, m.ny - 1);
      double gx = (u.v[m.idx(ir, j)] - u.v[m.idx(il, j)]) / ((ir - il) * m.hx);
      double gy = (u.v[m.idx(i, jr)] - u.v[m.idx(i, jl)]) / ((jr - jl) * m.hy);
      g.v[m.idx(i, j)] = std::hypot(gx, gy);
    }
  return g;
}

// Matrix of the box scheme for -div(w grad .) + diag(extra), with rows and
// columns of pinned nodes replaced by identity. The dropped column entries
// belong on the right hand side; see dirichlet_rhs.
inline SparseMat assemble_weighted_laplacian(
    const Mesh& m, const ScalarField* w, const std::vector<double>& extra_diag,
    const std::vector<std::uint8_t>& pinned) {
  const int n = m.n_nodes();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(n));
  for_each_face(m, [&](int p, int q, double c) {
    double a = face_weight(w, p, q) * c;
    if (!pinned[p]) {
      t.emplace_back(p, p, a);
      if (!pinned[q]) t.emplace_back(p, q, -a);
    }
    if (!pinned[q]) {
      t.emplace_back(q, q, a);
      if (!pinned[p]) t.emplace_back(q, p, -a);
    }
  });
  for (int i = 0; i < n; ++i) {
    if (pinned[i])
      t.emplace_back(i, i, 1.0);
    else if (!extra_diag.empty())
      t.emplace_back(i, i, extra_diag[i]);
  }
  SparseMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

// b for A u = b matching assemble_weighted_laplacian: free rows carry
// f plus the pinned-column contribution, pinned rows carry the pinned value g
inline Vec dirichlet_rhs(const Mesh& m, const ScalarField* w,
                         const ScalarField& f, const ScalarField& g,
                         const std::vector<std::uint8_t>& pinned) {
  const int n = m.n_nodes();
  ScalarField gext(f.mesh, 0.0);
  for (int i = 0; i < n; ++i)
    if (pinned[i]) gext.v[i] = g.v[i];
  ScalarField lg = flux_apply(w, gext);
  Vec b(n);
  for (int i = 0; i < n; ++i)
    b[i] = pinned[i] ? g.v[i] : f.v[i] - lg.v[i];
  return b;
}

inline std::vector<std::uint8_t> dirichlet_mask(const Mesh& m) {
  std::vector<std::uint8_t> p(m.n_nodes(), 0);
  for (int n = 0; n < m.n_nodes(); ++n)
    if (m.is_dirichlet(n)) p[n] = 1;
  return p;
}

// net outflow through one contact: sum of box residuals of -div(w grad u)
// over the contact's nodes
inline double direct_contact_flux(const ScalarField* w, const ScalarField& u,
                                  const std::string& contact) {
  const Mesh& m = *u.mesh;
  ScalarField r = flux_apply(w, u);
  double s = 0.0;
  for (int n : boundary_nodes(m, contact)) s += r.v[n];
  return s;
}

}  // namespace qdd
