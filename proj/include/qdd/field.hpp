#pragma once
#include <cmath>
#include <memory>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/mesh.hpp"

namespace qdd {

enum class BcRole : std::uint8_t { dirichlet_lifted, homogeneous, free_field };

struct ScalarField {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> v;
  BcRole role = BcRole::free_field;

  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const Mesh> m, double fill = 0.0,
                       BcRole r = BcRole::free_field)
      : mesh(std::move(m)), v(mesh->n_nodes(), fill), role(r) {}

  double& operator[](int n) { return v[n]; }
  double operator[](int n) const { return v[n]; }
  int size() const { return static_cast<int>(v.size()); }
};

inline bool all_finite(const ScalarField& a) {
  for (double x : a.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_same_mesh(const ScalarField& a, const ScalarField& b) {
  if (a.mesh.get() != b.mesh.get())
    throw geometry_error("fields live on different meshes");
}

// exact zeros on every Dirichlet node
inline bool is_homogeneous(const ScalarField& a) {
  const Mesh& m = *a.mesh;
  for (int n = 0; n < m.n_nodes(); ++n)
    if (m.is_dirichlet(n) && a.v[n] != 0.0) return false;
  return true;
}

template <class F>
ScalarField make_field(std::shared_ptr<const Mesh> mesh, F&& f,
                       BcRole role = BcRole::free_field) {
  ScalarField out(mesh, 0.0, role);
  const Mesh& m = *mesh;
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) out.v[m.idx(i, j)] = f(m.x(i), m.y(j));
  return out;
}

inline double min_value(const ScalarField& a) {
  double s = a.v[0];
  for (double x : a.v) s = std::min(s, x);
  return s;
}

inline double max_value(const ScalarField& a) {
  double s = a.v[0];
  for (double x : a.v) s = std::max(s, x);
  return s;
}

}  // namespace qdd
