#pragma once
#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "qdd/geometry.hpp"

namespace qdd {

enum class NodeKind : std::uint8_t { interior, neumann, dirichlet };

struct Mesh {
  DeviceGeometry geom;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::vector<NodeKind> kind;       // per node
  std::vector<std::int8_t> contact; // contact index in geom.contacts, -1 if none
  std::vector<double> vol;          // trapezoidal control areas

  int n_nodes() const { return nx * ny; }
  int idx(int i, int j) const { return j * nx + i; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  bool is_dirichlet(int n) const { return kind[n] == NodeKind::dirichlet; }
  int contact_index(const std::string& name) const {
    for (size_t k = 0; k < geom.contacts.size(); ++k)
      if (geom.contacts[k].name == name) return static_cast<int>(k);
    return -1;
  }
};

namespace detail {

// nodes of one edge as (index along edge -> node id)
inline int edge_node(const Mesh& m, Edge e, int k) {
  switch (e) {
    case Edge::bottom: return m.idx(k, 0);
    case Edge::top: return m.idx(k, m.ny - 1);
    case Edge::left: return m.idx(0, k);
    case Edge::right: return m.idx(m.nx - 1, k);
  }
  return -1;
}

inline int edge_count(const Mesh& m, Edge e) {
  return (e == Edge::left || e == Edge::right) ? m.ny : m.nx;
}

inline double edge_spacing(const Mesh& m, Edge e) {
  return (e == Edge::left || e == Edge::right) ? m.hy : m.hx;
}

}  // namespace detail

inline std::shared_ptr<const Mesh> build_mesh(const DeviceGeometry& g, int nx, int ny) {
  validate(g);
  if (nx < 3 || ny < 3) throw geometry_error("mesh needs nx, ny >= 3");

  auto mesh = std::make_shared<Mesh>();
  Mesh& m = *mesh;
  m.geom = g;
  m.nx = nx;
  m.ny = ny;
  m.hx = g.width / (nx - 1);
  m.hy = g.height / (ny - 1);
  m.kind.assign(m.n_nodes(), NodeKind::interior);
  m.contact.assign(m.n_nodes(), -1);

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (m.on_boundary(i, j)) m.kind[m.idx(i, j)] = NodeKind::neumann;

  // claim contact nodes: a node belongs to a contact iff its coordinate lies in
  // the span (small tolerance); widen to the nearest nodes only if the span is
  // narrower than the grid, so classification is stable under refinement
  struct Run { int a, b; int id; Edge e; };
  std::vector<Run> runs;
  for (size_t c = 0; c < g.contacts.size(); ++c) {
    const ContactSpec& cs = g.contacts[c];
    const double h = detail::edge_spacing(m, cs.edge);
    const int n = detail::edge_count(m, cs.edge);
    const double tol = 1e-6;
    int a = static_cast<int>(std::ceil(cs.lo / h - tol));
    int b = static_cast<int>(std::floor(cs.hi / h + tol));
    a = std::clamp(a, 0, n - 1);
    b = std::clamp(b, 0, n - 1);
    if (b < a) {  // span between two nodes: snap outward
      a = std::clamp(static_cast<int>(std::floor(cs.lo / h + tol)), 0, n - 1);
      b = std::clamp(static_cast<int>(std::ceil(cs.hi / h - tol)), 0, n - 1);
    }
    while (b - a + 1 < 2) {
      double left_gap = a > 0 ? cs.lo - (a - 1) * h : 1e300;
      double right_gap = b < n - 1 ? (b + 1) * h - cs.hi : 1e300;
      if (left_gap <= right_gap && a > 0) --a;
      else if (b < n - 1) ++b;
      else if (a > 0) --a;
      else throw geometry_error("contact " + cs.name + " cannot cover 2 nodes");
    }
    runs.push_back({a, b, static_cast<int>(c), cs.edge});
    for (int k = a; k <= b; ++k) {
      int n_id = detail::edge_node(m, cs.edge, k);
      if (m.kind[n_id] == NodeKind::dirichlet)
        throw geometry_error("contacts " + g.contacts[m.contact[n_id]].name + " and " +
                             cs.name + " share grid node(s): zero gap after snapping");
      m.kind[n_id] = NodeKind::dirichlet;
      m.contact[n_id] = static_cast<std::int8_t>(c);
    }
  }

  // separation: distinct contacts on one edge keep at least one cell apart
  for (size_t p = 0; p < runs.size(); ++p)
    for (size_t q = p + 1; q < runs.size(); ++q) {
      if (runs[p].e != runs[q].e) continue;
      const Run& lo = runs[p].a <= runs[q].a ? runs[p] : runs[q];
      const Run& hi = runs[p].a <= runs[q].a ? runs[q] : runs[p];
      if (hi.a - lo.b < 1)
        throw geometry_error("contacts " + g.contacts[lo.id].name + " and " +
                             g.contacts[hi.id].name + " have zero gap after snapping");
    }

  m.vol.resize(m.n_nodes());
  for (int j = 0; j < ny; ++j) {
    double wy = (j == 0 || j == ny - 1) ? 0.5 * m.hy : m.hy;
    for (int i = 0; i < nx; ++i) {
      double wx = (i == 0 || i == nx - 1) ? 0.5 * m.hx : m.hx;
      m.vol[m.idx(i, j)] = wx * wy;
    }
  }
  return mesh;
}

// nodes of one boundary segment, ascending node index.
// `which` is a contact name (source|gate|drain) or "neumann".
inline std::vector<int> boundary_nodes(const Mesh& m, const std::string& which) {
  std::vector<int> out;
  if (which == "neumann") {
    for (int n = 0; n < m.n_nodes(); ++n)
      if (m.kind[n] == NodeKind::neumann) out.push_back(n);
    return out;
  }
  if (!known_contact_name(which))
    throw geometry_error("unknown boundary selector: " + which);
  int id = m.contact_index(which);
  if (id < 0) return out;  // geometry has no such contact
  for (int n = 0; n < m.n_nodes(); ++n)
    if (m.contact[n] == id) out.push_back(n);
  return out;
}

inline std::vector<int> dirichlet_nodes(const Mesh& m) {
  std::vector<int> out;
  for (int n = 0; n < m.n_nodes(); ++n)
    if (m.kind[n] == NodeKind::dirichlet) out.push_back(n);
  return out;
}

}  // namespace qdd
