#pragma once
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "qdd/errors.hpp"
#include "qdd/operators.hpp"

namespace qdd {

struct LinearConfig {
  double tol = 1e-12;
  // direct factorization up to this many unknowns, CG above
  int direct_limit = 160 * 160;
  int max_cg_iters = 20000;
};

namespace detail {

inline double residual_inf(const SparseMat& A, const Vec& x, const Vec& b) {
  return (A * x - b).lpNorm<Eigen::Infinity>();
}

template <class Factorized>
Vec refine_and_check(const Factorized& fac, const SparseMat& A, const Vec& b,
                     Vec x, double tol) {
  double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  double r = residual_inf(A, x, b);
  if (r > tol * scale) {
    x += fac.solve((b - A * x).eval());
    r = residual_inf(A, x, b);
  }
  if (!x.allFinite() || r > tol * scale)
    throw linear_solver_error("residual check failed", r / scale);
  return x;
}

}  // namespace detail

// symmetric positive definite systems (box-scheme operators with pinned rows)
inline Vec solve_spd(const SparseMat& A, const Vec& b,
                     const LinearConfig& cfg = {}) {
  if (A.rows() <= cfg.direct_limit) {
    Eigen::SimplicialLDLT<SparseMat> fac(A);
    if (fac.info() != Eigen::Success)
      throw linear_solver_error("SPD factorization failed");
    return detail::refine_and_check(fac, A, b, fac.solve(b), cfg.tol);
  }
  Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(cfg.tol * 1e-2);
  cg.setMaxIterations(cfg.max_cg_iters);
  cg.compute(A);
  if (cg.info() != Eigen::Success)
    throw linear_solver_error("CG preconditioner setup failed");
  return detail::refine_and_check(cg, A, b, cg.solve(b), cfg.tol);
}

// general sparse systems (coupled Newton blocks, adjoint transpose)
inline Vec solve_general(const SparseMat& A, const Vec& b,
                         const LinearConfig& cfg = {}) {
  Eigen::SparseLU<SparseMat> fac;
  fac.analyzePattern(A);
  fac.factorize(A);
  if (fac.info() != Eigen::Success)
    throw linear_solver_error("LU factorization failed");
  return detail::refine_and_check(fac, A, b, fac.solve(b), cfg.tol);
}

}  // namespace qdd
