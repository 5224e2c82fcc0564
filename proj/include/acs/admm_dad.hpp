#pragma once

#include <string>
#include <vector>

#include "acs/decoder.hpp"
#include "acs/linalg.hpp"

namespace acs::dad {

// Hypothesis-class parameters of the unfolded ADMM decoder. All layers share
// one Phi and one threshold lambda/rho.
struct DecoderConfig {
  double lambda = 1e-4;
  double rho = 1.0;
  int layers = 5;
  double b_out = 1.0;  // output-clip radius
  Index big_n = 0;     // rows of Phi
  Index n = 0;         // signal dimension

  double threshold() const { return lambda / rho; }
  void validate() const;
};

// Per-Phi matrices shared by all layers of one forward pass:
//   W      = rho Phi (A^T A + rho Phi^T Phi)^{-1} Phi^T          (N x N)
//   Theta  = (-I - W | W),  Lambda = (I - W | W)                 (N x 2N)
//   Theta~ = [Lambda; O]                                         (2N x 2N)
struct LayerMatrices {
  SpdFactor m_factor;  // factor of A^T A + rho Phi^T Phi (n x n)
  Matrix w;
  Matrix theta;
  Matrix lambda_mat;
  Matrix theta_tilde;

  Index big_n() const { return w.rows(); }
};

// Stacked dual vector v = [u; z] carried between layers; v0 = 0.
struct DualState {
  Vector v;

  static DualState zeros(Index big_n) {
    return DualState{Vector::Zero(2 * big_n)};
  }
};

LayerMatrices precompute(const Matrix& a, const Matrix& phi, double rho);

// b(y) = Phi (A^T A + rho Phi^T Phi)^{-1} A^T y.
Vector bias(const LayerMatrices& lm, const Matrix& phi, const Matrix& a,
            const Vector& y);

// v' = Theta~ v + I1 b + I2 S_threshold(Lambda v + b), which reduces to
// [t - s; s] with t = Lambda v + b and s = S_threshold(t). One layer equals
// one scaled-ADMM iteration on (u, z).
DualState layer_step(const LayerMatrices& lm, const DualState& v,
                     const Vector& b, double threshold);

// Splits v_l = [u; z] and applies the x-update
// x = (A^T A + rho Phi^T Phi)^{-1} (A^T y + rho Phi^T (z - u)).
Vector output_map(const LayerMatrices& lm, const Matrix& phi, const Matrix& a,
                  const Vector& y, const DualState& v_l, double rho);

// Full decoder: sigma(T(f_L o ... o f_1(y))). Recomputes LayerMatrices, so it
// always reflects the current Phi.
Vector forward(const DecoderConfig& cfg, const Matrix& phi, const Matrix& a,
               const Vector& y);

// Batched forward/loss written once over an op algebra (see autodiff.hpp).
// Running it on a TapeAlg records gradients; on a PlainAlg it evaluates the
// identical operation sequence untaped.
template <class Alg>
typename Alg::V decoder_program(Alg& alg, typename Alg::V phi,
                                const DecoderConfig& cfg, const Matrix& a,
                                const Matrix& y_cols) {
  using V = typename Alg::V;
  const Index big_n = cfg.big_n;
  const Index batch = y_cols.cols();

  V pt = alg.transpose(phi);
  V m = alg.add(alg.scale(alg.matmul(pt, phi), cfg.rho),
                alg.constant(Matrix(a.transpose() * a)));
  auto f = alg.factorize(m);
  V w = alg.scale(alg.matmul(phi, alg.solve(f, pt)), cfg.rho);
  V lambda_mat = alg.hstack(
      alg.sub(alg.constant(Matrix(Matrix::Identity(big_n, big_n))), w), w);

  V aty = alg.constant(Matrix(a.transpose() * y_cols));
  V b = alg.matmul(phi, alg.solve(f, aty));

  V v = alg.constant(Matrix(Matrix::Zero(2 * big_n, batch)));
  const double thr = cfg.threshold();
  for (int k = 0; k < cfg.layers; ++k) {
    V t = alg.add(alg.matmul(lambda_mat, v), b);
    V s = alg.soft(t, thr);
    v = alg.vstack(alg.sub(t, s), s);
  }

  V u = alg.slice_rows(v, 0, big_n);
  V z = alg.slice_rows(v, big_n, big_n);
  V rhs = alg.add(aty, alg.scale(alg.matmul(pt, alg.sub(z, u)), cfg.rho));
  return alg.clip_cols(alg.solve(f, rhs), cfg.b_out);
}

template <class Alg>
typename Alg::V mse_loss_program(Alg& alg, typename Alg::V xhat,
                                 const Matrix& x_cols) {
  typename Alg::V diff = alg.sub(xhat, alg.constant(x_cols));
  return alg.scale(alg.squared_fro(diff),
                   1.0 / static_cast<double>(x_cols.cols()));
}

// Batched untaped forward; columns of y_cols are measurements.
Matrix forward_batch(const DecoderConfig& cfg, const Matrix& phi,
                     const Matrix& a, const Matrix& y_cols);

class AdmmDadDecoder final : public Decoder {
 public:
  AdmmDadDecoder(DecoderConfig cfg, Matrix a, Matrix phi);

  std::string kind() const override { return "admm-dad"; }
  std::vector<Matrix*> params() override { return {&phi_}; }
  int build_loss(ad::Tape& tape, const Matrix& y_cols, const Matrix& x_cols,
                 std::vector<int>& param_nodes) const override;
  Matrix decode_batch(const Matrix& y_cols) const override;

  const DecoderConfig& config() const { return cfg_; }
  DecoderConfig& config() { return cfg_; }
  const Matrix& measurement_matrix() const { return a_; }
  const Matrix& phi() const { return phi_; }
  Matrix& phi() { return phi_; }

 private:
  DecoderConfig cfg_;
  Matrix a_;
  Matrix phi_;
};

}  // namespace acs::dad
