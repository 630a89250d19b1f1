#pragma once
#include <cmath>

#include "qdd/field.hpp"
#include "qdd/linear_solver.hpp"

namespace qdd {

// pressure enthalpy h(t) = log t; a positive cap K flattens it below 1/K
// as a robustness escape hatch (off by default, leaves the model exact)
struct EnthalpyModel {
  double cap = 0.0;

  double floor_arg() const { return cap > 0.0 ? 1.0 / cap : 0.0; }
  double h(double t) const {
    return std::log(cap > 0.0 ? std::max(t, floor_arg()) : t);
  }
  double dh(double t) const {
    if (cap > 0.0 && t <= floor_arg()) return 0.0;
    return 1.0 / t;
  }
  // primitive of h with H(1) = 0, used by the energy
  double H(double t) const { return t * std::log(t) - t + 1.0; }
};

struct ModelParams {
  double eps2 = 1.88e-4;    // scaled quantum length, squared
  double lambda2 = 0.0017;  // scaled Debye length, squared
  EnthalpyModel enthalpy;
  ScalarField V_ext;        // optional fixed barrier potential; empty = zero
};

inline double vext_at(const ModelParams& p, int n) {
  return p.V_ext.mesh ? p.V_ext.v[n] : 0.0;
}

struct StateTriple {
  ScalarField rho, V, S;
};

struct SolverConfig {
  double nonlinear_tol = 1e-8;
  int max_outer = 500;
  double damping_floor = 1.0 / 16.0;
  double newton_switch = 1e-3;  // residual where the coupled polish takes over
  int max_newton = 60;
  double rho_floor = 1e-12;     // density iterates must stay above this
  double init_smoothing_cells = 2.0;
  LinearConfig linear;
  bool verbose = false;
};

struct SolveResult {
  StateTriple state;
  double residual = 0.0;
  int outer_iters = 0;
  int newton_iters = 0;
};

}  // namespace qdd
