#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "acs/linalg.hpp"

namespace acs::admm {

// Generalized LASSO instance min_x 1/2 ||Ax - y||_2^2 + lambda ||Phi x||_1.
// eta is the noise bound of the constrained form, kept as metadata only.
struct ClassicalProblem {
  Matrix a;    // m x n
  Matrix phi;  // N x n (N = n is tolerated here for decoupled unit tests)
  Vector y;    // m
  double lambda = 1e-4;
  double rho = 1.0;
  std::optional<double> eta;

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
  Index big_n() const { return phi.rows(); }
  void validate() const;
};

struct AdmmState {
  Vector x;  // n
  Vector z;  // N
  Vector u;  // N
  int k = 0;

  static AdmmState zeros(Index n, Index big_n);
};

struct ConvergenceTrace {
  std::vector<double> objective;        // per iteration
  std::vector<double> primal_residual;  // ||Phi x^k - z^k||_2 per iteration
  double p_star_estimate = 0.0;         // best objective seen
};

double objective(const ClassicalProblem& p, const Vector& x);

// Factor of A^T A + rho Phi^T Phi, computed once per solve and reused.
SpdFactor normal_matrix_factor(const ClassicalProblem& p);

// One scaled-form iteration:
//   x' = (A^T A + rho Phi^T Phi)^{-1} (A^T y + rho Phi^T (z - u))
//   z' = S_{lambda/rho}(Phi x' + u)
//   u' = u + Phi x' - z'
AdmmState admm_step(const ClassicalProblem& p, const AdmmState& s,
                    const SpdFactor& factor);

// Iterates until ||Phi x^k - z^k||_2 <= primal_tol or max_iters is reached.
std::pair<Vector, ConvergenceTrace> admm_solve(const ClassicalProblem& p,
                                               int max_iters = 2000,
                                               double primal_tol = 1e-6);

}  // namespace acs::admm
