#pragma once
#include <cmath>
#include <memory>

#include "qdd/elliptic.hpp"
#include "qdd/field.hpp"
#include "qdd/mesh.hpp"

namespace qdd {

// contact traces for the three unknowns; zero away from contact nodes
struct BoundaryData {
  ScalarField rho, V, S;
};

// rho = alpha sqrt(C) at each contact node; V and S pick up the built-in
// potential -log(rho^2 / delta_c^2) with opposite signs, shifted by the
// applied voltage
inline BoundaryData make_boundary_data(const ScalarField& C,
                                       double delta_c = 1.0) {
  if (!(delta_c > 0.0))
    throw positivity_error("intrinsic density scale must be positive");
  auto mesh = C.mesh;
  const Mesh& m = *mesh;
  BoundaryData bc{ScalarField(mesh, 0.0), ScalarField(mesh, 0.0),
                  ScalarField(mesh, 0.0)};
  for (const ContactSpec& c : m.geom.contacts) {
    for (int n : boundary_nodes(m, c.name)) {
      if (C.v[n] <= 0.0)
        throw positivity_error("doping must be positive at contact " + c.name);
      double rho = c.alpha * std::sqrt(C.v[n]);
      double built_in = std::log(rho * rho / (delta_c * delta_c));
      bc.rho.v[n] = rho;
      bc.V.v[n] = -built_in + c.U;
      bc.S.v[n] = built_in + c.U;
    }
  }
  return bc;
}

}  // namespace qdd
