#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "qdd/errors.hpp"

namespace qdd {

enum class Edge { bottom, top, left, right };

inline const char* edge_name(Edge e) {
  switch (e) {
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
    case Edge::left: return "left";
    case Edge::right: return "right";
  }
  return "?";
}

inline Edge edge_from_name(const std::string& s) {
  if (s == "bottom") return Edge::bottom;
  if (s == "top") return Edge::top;
  if (s == "left") return Edge::left;
  if (s == "right") return Edge::right;
  throw geometry_error("unknown edge name: " + s);
}

// Dirichlet contact segment on one edge of the rectangle.
struct ContactSpec {
  std::string name;       // source | gate | drain
  Edge edge = Edge::top;
  double lo = 0.0;        // span along the edge, in domain coordinates
  double hi = 0.0;
  double U = 0.0;         // applied voltage
  double alpha = 1.0;     // boundary density depletion factor, 1 = ohmic
};

struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

struct DeviceGeometry {
  double width = 1.0;
  double height = 1.0;
  std::vector<ContactSpec> contacts;
  std::vector<Rect> nplus;        // highly doped blocks
  double channel_doping = 0.01;
  double nplus_doping = 1.0;
  double smoothing_cells = 3.0;   // doping mollifier length, in grid cells
};

inline double edge_length(const DeviceGeometry& g, Edge e) {
  return (e == Edge::left || e == Edge::right) ? g.height : g.width;
}

inline bool known_contact_name(const std::string& s) {
  return s == "source" || s == "gate" || s == "drain";
}

inline void validate(const DeviceGeometry& g) {
  if (!(g.width > 0.0) || !(g.height > 0.0))
    throw geometry_error("domain extent must be positive");
  if (g.contacts.empty())
    throw geometry_error("at least one contact is required");
  if (!(g.nplus_doping > g.channel_doping) || !(g.channel_doping > 0.0))
    throw geometry_error("dopings must satisfy nplus_doping > channel_doping > 0");
  if (!(g.smoothing_cells >= 0.0))
    throw geometry_error("smoothing_cells must be >= 0");
  for (const auto& c : g.contacts) {
    if (!known_contact_name(c.name))
      throw geometry_error("unknown contact name: " + c.name);
    if (!(c.hi > c.lo))
      throw geometry_error("contact " + c.name + " has empty span");
    if (c.lo < 0.0 || c.hi > edge_length(g, c.edge))
      throw geometry_error("contact " + c.name + " span leaves the domain edge");
    if (!(c.alpha > 0.0) || c.alpha > 1.0)
      throw geometry_error("contact " + c.name + " needs alpha in (0, 1]");
  }
  for (size_t a = 0; a < g.contacts.size(); ++a)
    for (size_t b = a + 1; b < g.contacts.size(); ++b) {
      if (g.contacts[a].name == g.contacts[b].name)
        throw geometry_error("duplicate contact name: " + g.contacts[a].name);
      if (g.contacts[a].edge != g.contacts[b].edge) continue;
      double gap = std::max(g.contacts[a].lo, g.contacts[b].lo) -
                   std::min(g.contacts[a].hi, g.contacts[b].hi);
      if (gap <= 0.0)
        throw geometry_error("contacts " + g.contacts[a].name + " and " +
                             g.contacts[b].name + " overlap or touch");
    }
  for (const auto& r : g.nplus) {
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
      throw geometry_error("degenerate nplus rectangle");
    if (r.x0 < 0.0 || r.x1 > g.width || r.y0 < 0.0 || r.y1 > g.height)
      throw geometry_error("nplus rectangle leaves the domain");
  }
}

// Default device: unit square, three top-edge contacts, doped blocks under
// source and drain. Voltages carry the gate depletion factor 0.1 already
// multiplied in (0.1 * {0.0375, 0.075, 0.15}).
inline DeviceGeometry default_mesfet() {
  DeviceGeometry g;
  g.width = 1.0;
  g.height = 1.0;
  g.channel_doping = 0.01;
  g.nplus_doping = 1.0;
  g.smoothing_cells = 3.0;
  g.contacts = {
      {"source", Edge::top, 0.0, 0.15, 0.00375, 1.0},
      {"gate", Edge::top, 0.425, 0.575, 0.0075, 0.1},
      {"drain", Edge::top, 0.85, 1.0, 0.015, 1.0},
  };
  g.nplus = {
      {0.0, 0.25, 0.8, 1.0},
      {0.75, 1.0, 0.8, 1.0},
  };
  return g;
}

}  // namespace qdd
