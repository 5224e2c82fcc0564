#include "acs/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

namespace acs {

Vector soft_threshold(const Vector& x, double tau) {
  if (!(tau >= 0.0))
    throw_invalid_argument("soft_threshold: tau must be nonnegative, got " +
                           std::to_string(tau));
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double mag = std::abs(v) - tau;
    out[i] = mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

Matrix soft_threshold(const Matrix& x, double tau) {
  if (!(tau >= 0.0))
    throw_invalid_argument("soft_threshold: tau must be nonnegative, got " +
                           std::to_string(tau));
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      const double mag = std::abs(v) - tau;
      out(i, j) = mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
    }
  return out;
}

Vector norm_clip(const Vector& x, double bound) {
  if (!(bound > 0.0))
    throw_invalid_argument("norm_clip: bound must be positive, got " +
                           std::to_string(bound));
  double norm = x.norm();
  if (norm <= bound) return x;
  Vector out = x;
  // Rescaling can overshoot the ball by an ulp; settle onto a fixed point so
  // clipping is exactly idempotent.
  for (int i = 0; i < 4 && norm > bound; ++i) {
    out *= bound / norm;
    norm = out.norm();
  }
  return out;
}

Matrix norm_clip_columns(const Matrix& x, double bound) {
  if (!(bound > 0.0))
    throw_invalid_argument("norm_clip_columns: bound must be positive, got " +
                           std::to_string(bound));
  Matrix out = x;
  for (Index j = 0; j < x.cols(); ++j) {
    double norm = out.col(j).norm();
    for (int i = 0; i < 4 && norm > bound; ++i) {
      out.col(j) *= bound / norm;
      norm = out.col(j).norm();
    }
  }
  return out;
}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != dim())
    throw_invalid_argument("spd_solve: rhs dim " + std::to_string(b.size()) +
                           " does not match factor dim " +
                           std::to_string(dim()));
  return llt_.solve(b);
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != dim())
    throw_invalid_argument("spd_solve: rhs rows " + std::to_string(b.rows()) +
                           " do not match factor dim " + std::to_string(dim()));
  return llt_.solve(b);
}

SpdFactor spd_factor(const Matrix& m) {
  if (m.rows() != m.cols())
    throw_invalid_argument("spd_factor: matrix must be square, got " +
                           std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()));
  if (m.rows() == 0) throw_invalid_argument("spd_factor: empty matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw_invalid_argument("spd_factor: matrix is not symmetric (max |M - M^T| = " +
                           std::to_string(asym) + ")");

  SpdFactor f;
  f.llt_.compute(m);
  if (f.llt_.info() == Eigen::Success) {
    f.jitter_ = 0.0;
    return f;
  }

  double jitter = 1e-12 * m.trace() / static_cast<double>(m.rows());
  if (!(jitter > 0.0)) jitter = 1e-12;
  for (int retry = 0; retry < 3; ++retry) {
    Matrix jittered = m;
    jittered.diagonal().array() += jitter;
    f.llt_.compute(jittered);
    if (f.llt_.info() == Eigen::Success) {
      f.jitter_ = jitter;
      return f;
    }
    jitter *= 10.0;
  }
  throw_singular("spd_factor: factorization failed after maximum jitter");
}

Vector spd_solve(const SpdFactor& f, const Vector& b) { return f.solve(b); }

Matrix spd_solve(const SpdFactor& f, const Matrix& b) { return f.solve(b); }

Matrix gaussian_matrix(Index rows, Index cols, double mean, double stddev,
                       std::uint64_t seed) {
  if (rows <= 0 || cols <= 0)
    throw_invalid_argument("gaussian_matrix: dimensions must be positive, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
  if (!(stddev > 0.0))
    throw_invalid_argument("gaussian_matrix: stddev must be positive, got " +
                           std::to_string(stddev));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, stddev);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

Vector gaussian_vector(Index dim, double mean, double stddev,
                       std::uint64_t seed) {
  if (dim <= 0)
    throw_invalid_argument("gaussian_vector: dim must be positive, got " +
                           std::to_string(dim));
  if (!(stddev > 0.0))
    throw_invalid_argument("gaussian_vector: stddev must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, stddev);
  Vector out(dim);
  for (Index i = 0; i < dim; ++i) out[i] = dist(rng);
  return out;
}

Matrix he_normal_init(Index big_n, Index n, std::uint64_t seed) {
  if (n <= 0) throw_invalid_argument("he_normal_init: n must be positive");
  if (big_n <= n)
    throw_invalid_argument("he_normal_init: requires N > n, got N = " +
                           std::to_string(big_n) + ", n = " + std::to_string(n));
  return gaussian_matrix(big_n, n, 0.0, std::sqrt(2.0 / static_cast<double>(n)),
                         seed);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer on master + stream * odd constant
  std::uint64_t z = master + stream * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace acs
