#pragma once

#include <string>
#include <vector>

#include "acs/decoder.hpp"
#include "acs/linalg.hpp"

namespace acs::ista {

// Unfolded ISTA with a learnable orthogonal sparsifier Psi shared across
// layers. Stands in for the cited unfolded-ISTA comparison network; the layer
// equation, defaults and divergences are documented in the README.
struct IstaConfig {
  int layers = 5;
  double step_size = 0.0;   // <= 1 / ||A||_2^2 for a convergence-safe layer
  double threshold = 1e-4;
  Index n = 0;

  void validate() const;
};

// x' = Psi^T S_threshold(Psi (x - step A^T (A x - y))).
Vector ista_layer(const Matrix& psi, const Matrix& a, const Vector& y,
                  const Vector& x, double step, double threshold);

// Composition of `layers` ista_layer maps from x0 = 0.
Vector ista_forward(const IstaConfig& cfg, const Matrix& psi, const Matrix& a,
                    const Vector& y);

// Nearest orthogonal matrix (polar factor U V^T of the SVD), applied after
// each optimizer step to keep Psi orthogonal.
Matrix orthogonal_project(const Matrix& psi);

// Convergence-safe default step 1 / sigma_max(A)^2.
double default_step_size(const Matrix& a);

template <class Alg>
typename Alg::V ista_program(Alg& alg, typename Alg::V psi,
                             const IstaConfig& cfg, const Matrix& a,
                             const Matrix& y_cols) {
  using V = typename Alg::V;
  V psit = alg.transpose(psi);
  V ca = alg.constant(a);
  V cat = alg.constant(Matrix(a.transpose()));
  V y = alg.constant(y_cols);
  V x = alg.constant(Matrix(Matrix::Zero(cfg.n, y_cols.cols())));
  for (int k = 0; k < cfg.layers; ++k) {
    V r = alg.sub(alg.matmul(ca, x), y);
    V g = alg.sub(x, alg.scale(alg.matmul(cat, r), cfg.step_size));
    V s = alg.soft(alg.matmul(psi, g), cfg.threshold);
    x = alg.matmul(psit, s);
  }
  return x;
}

// Same program with the threshold as a tracked 1x1 node (learnable variant).
template <class Alg>
typename Alg::V ista_program_tracked_threshold(Alg& alg, typename Alg::V psi,
                                               typename Alg::V tau,
                                               const IstaConfig& cfg,
                                               const Matrix& a,
                                               const Matrix& y_cols) {
  using V = typename Alg::V;
  V psit = alg.transpose(psi);
  V ca = alg.constant(a);
  V cat = alg.constant(Matrix(a.transpose()));
  V y = alg.constant(y_cols);
  V x = alg.constant(Matrix(Matrix::Zero(cfg.n, y_cols.cols())));
  for (int k = 0; k < cfg.layers; ++k) {
    V r = alg.sub(alg.matmul(ca, x), y);
    V g = alg.sub(x, alg.scale(alg.matmul(cat, r), cfg.step_size));
    V s = alg.soft(alg.matmul(psi, g), tau);
    x = alg.matmul(psit, s);
  }
  return x;
}

class IstaDecoder final : public Decoder {
 public:
  // learn_threshold adds the threshold as a second trainable tensor,
  // projected back to tau >= 0 after each step.
  IstaDecoder(IstaConfig cfg, Matrix a, Matrix psi, bool learn_threshold = false);

  std::string kind() const override { return "ista"; }
  std::vector<Matrix*> params() override;
  int build_loss(ad::Tape& tape, const Matrix& y_cols, const Matrix& x_cols,
                 std::vector<int>& param_nodes) const override;
  Matrix decode_batch(const Matrix& y_cols) const override;
  void post_update() override;

  const IstaConfig& config() const { return cfg_; }
  const Matrix& measurement_matrix() const { return a_; }
  const Matrix& psi() const { return psi_; }
  Matrix& psi() { return psi_; }
  bool learns_threshold() const { return learn_threshold_; }
  double current_threshold() const;

 private:
  IstaConfig cfg_;
  Matrix a_;
  Matrix psi_;
  bool learn_threshold_;
  Matrix tau_;  // 1x1, used when learn_threshold_
};

}  // namespace acs::ista
