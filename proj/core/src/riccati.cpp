#include "gaitmirror/riccati.hpp"

#include <string>

#include <Eigen/Dense>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

DareSolution solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                        const DareOptions& opts) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols())
    throw ConfigError("inconsistent matrix dimensions in Riccati solve");
  if (!a.allFinite() || !b.allFinite() || !q.allFinite() || !r.allFinite())
    throw ConfigError("non-finite matrix entries in Riccati solve");

  Eigen::MatrixXd p = q;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const Eigen::MatrixXd btp = b.transpose() * p;
    const Eigen::MatrixXd gain = (r + btp * b).ldlt().solve(btp * a);
    const Eigen::MatrixXd next = q + a.transpose() * p * a - a.transpose() * p * b * gain;

    const double change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (!p.allFinite() || p.norm() > opts.divergence_norm)
      throw OracleDivergenceError("Riccati iteration diverged after " + std::to_string(iter) +
                                  " sweeps");
    if (change < opts.tolerance) {
      const Eigen::MatrixXd btp_final = b.transpose() * p;
      DareSolution solution;
      solution.cost_to_go = p;
      solution.gain = (r + btp_final * b).ldlt().solve(btp_final * a);
      solution.iterations = iter;
      return solution;
    }
  }
  throw OracleDivergenceError("Riccati iteration did not settle within " +
                              std::to_string(opts.max_iterations) + " sweeps");
}

}  // namespace gaitmirror
