#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "acs/errors.hpp"

namespace acs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Componentwise soft thresholding sign(x) * max(0, |x| - tau).
Vector soft_threshold(const Vector& x, double tau);
Matrix soft_threshold(const Matrix& x, double tau);

// sigma(x) = x for ||x||_2 <= bound, else bound * x / ||x||_2.
// Inputs inside the ball are returned unchanged bit-for-bit.
Vector norm_clip(const Vector& x, double bound);

// norm_clip applied to every column independently.
Matrix norm_clip_columns(const Matrix& x, double bound);

// Cholesky factor of a symmetric positive definite matrix. If the plain
// factorization fails, escalating diagonal jitter is added (starting at
// 1e-12 * trace(M)/dim, x10 per retry, at most 3 retries) and recorded.
class SpdFactor {
 public:
  Index dim() const { return llt_.matrixL().rows(); }
  double jitter_used() const { return jitter_; }
  Matrix matrix_l() const { return llt_.matrixL(); }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

 private:
  friend SpdFactor spd_factor(const Matrix& m);
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

SpdFactor spd_factor(const Matrix& m);

Vector spd_solve(const SpdFactor& f, const Vector& b);
Matrix spd_solve(const SpdFactor& f, const Matrix& b);

// Dense matrix with i.i.d. normal entries, filled in row-major order so the
// stream of draws is a deterministic function of the seed.
Matrix gaussian_matrix(Index rows, Index cols, double mean, double stddev,
                       std::uint64_t seed);

Vector gaussian_vector(Index dim, double mean, double stddev,
                       std::uint64_t seed);

// He-normal initialization for a redundant analysis operator: big_n x n with
// zero-mean entries of std sqrt(2/n). Requires big_n > n.
Matrix he_normal_init(Index big_n, Index n, std::uint64_t seed);

// Deterministic per-purpose sub-seed derivation (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace acs
