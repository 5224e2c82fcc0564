#include "acs/admm_classical.hpp"

#include <string>

namespace acs::admm {

void ClassicalProblem::validate() const {
  if (a.rows() == 0 || a.cols() == 0)
    throw_invalid_argument("admm: empty measurement matrix");
  if (phi.cols() != a.cols())
    throw_invalid_argument("admm: Phi has " + std::to_string(phi.cols()) +
                           " columns, expected " + std::to_string(a.cols()));
  if (y.size() != a.rows())
    throw_invalid_argument("admm: y has dim " + std::to_string(y.size()) +
                           ", expected " + std::to_string(a.rows()));
  if (!(lambda > 0.0)) throw_invalid_argument("admm: lambda must be positive");
  if (!(rho > 0.0)) throw_invalid_argument("admm: rho must be positive");
}

AdmmState AdmmState::zeros(Index n, Index big_n) {
  AdmmState s;
  s.x = Vector::Zero(n);
  s.z = Vector::Zero(big_n);
  s.u = Vector::Zero(big_n);
  s.k = 0;
  return s;
}

double objective(const ClassicalProblem& p, const Vector& x) {
  p.validate();
  if (x.size() != p.n())
    throw_invalid_argument("admm objective: x has dim " +
                           std::to_string(x.size()) + ", expected " +
                           std::to_string(p.n()));
  const Vector residual = p.a * x - p.y;
  return 0.5 * residual.squaredNorm() + p.lambda * (p.phi * x).lpNorm<1>();
}

SpdFactor normal_matrix_factor(const ClassicalProblem& p) {
  p.validate();
  const Matrix m = p.a.transpose() * p.a + p.rho * (p.phi.transpose() * p.phi);
  return spd_factor(m);
}

AdmmState admm_step(const ClassicalProblem& p, const AdmmState& s,
                    const SpdFactor& factor) {
  if (s.x.size() != p.n() || s.z.size() != p.big_n() || s.u.size() != p.big_n())
    throw_invalid_argument("admm_step: state dims do not match problem");
  if (factor.dim() != p.n())
    throw_invalid_argument("admm_step: factor dim does not match problem");

  AdmmState next;
  const Vector rhs = p.a.transpose() * p.y + p.rho * (p.phi.transpose() * (s.z - s.u));
  next.x = factor.solve(rhs);
  next.z = soft_threshold(Vector(p.phi * next.x + s.u), p.lambda / p.rho);
  next.u = s.u + p.phi * next.x - next.z;
  next.k = s.k + 1;
  return next;
}

std::pair<Vector, ConvergenceTrace> admm_solve(const ClassicalProblem& p,
                                               int max_iters,
                                               double primal_tol) {
  if (max_iters < 1)
    throw_invalid_argument("admm_solve: max_iters must be >= 1");
  const SpdFactor factor = normal_matrix_factor(p);

  AdmmState s = AdmmState::zeros(p.n(), p.big_n());
  ConvergenceTrace trace;
  trace.p_star_estimate = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    const Vector x_prev = s.x;
    s = admm_step(p, s, factor);
    const double obj = objective(p, s.x);
    const double residual = (p.phi * s.x - s.z).norm();
    trace.objective.push_back(obj);
    trace.primal_residual.push_back(residual);
    trace.p_star_estimate = std::min(trace.p_star_estimate, obj);
    // The primal residual alone can hit zero transiently while the iterate is
    // still moving (u clamps to +-lambda/rho on fully active components), so
    // also require the x-update to have stabilized.
    const double step_norm = (s.x - x_prev).norm();
    if (residual <= primal_tol &&
        step_norm <= primal_tol * std::max(1.0, s.x.norm()))
      break;
  }
  return {s.x, std::move(trace)};
}

}  // namespace acs::admm
