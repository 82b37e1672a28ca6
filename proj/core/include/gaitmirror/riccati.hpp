#pragma once

#include <Eigen/Core>

namespace gaitmirror {

struct DareOptions {
  double tolerance = 1e-12;   // max-abs change of P between sweeps
  int max_iterations = 10000;
  double divergence_norm = 1e12;  // treat ||P|| beyond this as divergence
};

struct DareSolution {
  Eigen::MatrixXd cost_to_go;  // P
  Eigen::MatrixXd gain;        // (R + B^T P B)^{-1} B^T P A
  int iterations = 0;
};

/// Fixed-point iteration for the discrete algebraic Riccati equation
///
///   P = Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A
///
/// starting from P = Q. Throws OracleDivergenceError when the iteration
/// fails to settle within the budget (e.g. unstabilizable (A, B)). Kept
/// deliberately independent of the policy-iteration code it serves as an
/// oracle for.
DareSolution solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                        const DareOptions& opts = {});

}  // namespace gaitmirror
