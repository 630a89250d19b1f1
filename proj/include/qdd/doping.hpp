#pragma once
#include <cmath>

#include "qdd/elliptic.hpp"
#include "qdd/field.hpp"
#include "qdd/mesh.hpp"

namespace qdd {

// blockwise doping before mollification: plateau inside the nplus
// rectangles, channel level elsewhere
inline ScalarField raw_doping(std::shared_ptr<const Mesh> mesh) {
  const DeviceGeometry& g = mesh->geom;
  double tol = 1e-9 * std::max(g.width, g.height);
  return make_field(mesh, [&](double x, double y) {
    for (const Rect& r : g.nplus)
      if (x >= r.x0 - tol && x <= r.x1 + tol && y >= r.y0 - tol &&
          y <= r.y1 + tol)
        return g.nplus_doping;
    return g.channel_doping;
  });
}

// mollified reference doping: screened smoothing keeps the total dose,
// the plateau bounds, and positivity
inline ScalarField reference_doping(std::shared_ptr<const Mesh> mesh,
                                    const LinearConfig& cfg = {}) {
  return screened_smooth(raw_doping(mesh), mesh->geom.smoothing_cells, cfg);
}

}  // namespace qdd
