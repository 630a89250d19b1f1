#pragma once
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <memory>

#include "qdd/boundary.hpp"
#include "qdd/doping.hpp"
#include "qdd/field.hpp"
#include "qdd/geometry.hpp"
#include "qdd/mesh.hpp"
#include "qdd/state.hpp"

namespace qdd::testing {

// everything a solve needs, on one device and grid
struct Setup {
  std::shared_ptr<const Mesh> mesh;
  ScalarField C;
  BoundaryData bc;
  ModelParams params;
  SolverConfig cfg;
};

inline Setup make_setup(const DeviceGeometry& g, int n) {
  Setup s;
  s.mesh = build_mesh(g, n, n);
  s.C = reference_doping(s.mesh);
  s.bc = make_boundary_data(s.C);
  return s;
}

inline Setup mesfet_setup(int n) { return make_setup(default_mesfet(), n); }

// unit square, single full-width contact on the left edge, rest zero-flux
inline DeviceGeometry strip_geometry() {
  DeviceGeometry g;
  g.contacts = {{"source", Edge::left, 0.0, 1.0, 0.0, 1.0}};
  g.nplus = {};
  return g;
}

// Dirichlet on both left and right edge, Neumann top and bottom
inline DeviceGeometry channel_geometry(double width = 1.0) {
  DeviceGeometry g;
  g.width = width;
  g.contacts = {{"source", Edge::left, 0.0, 1.0, 0.0, 1.0},
                {"drain", Edge::right, 0.0, 1.0, 0.0, 1.0}};
  g.nplus = {};
  return g;
}

// the default device flattened: uniform doping 1, zero bias, no depletion
inline DeviceGeometry equilibrium_geometry() {
  DeviceGeometry g = default_mesfet();
  g.nplus = {{0.0, g.width, 0.0, g.height}};
  for (auto& c : g.contacts) {
    c.U = 0.0;
    c.alpha = 1.0;
  }
  return g;
}

inline std::shared_ptr<const Mesh> strip_mesh(int n) {
  return build_mesh(strip_geometry(), n, n);
}

inline std::shared_ptr<const Mesh> channel_mesh(int nx, int ny,
                                                double width = 1.0) {
  return build_mesh(channel_geometry(width), nx, ny);
}

}  // namespace qdd::testing
