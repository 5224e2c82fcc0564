#include "acs/admm_dad.hpp"

#include <string>

namespace acs::dad {

void DecoderConfig::validate() const {
  if (n <= 0 || big_n <= n)
    throw_invalid_argument("decoder config: requires N > n > 0, got N = " +
                           std::to_string(big_n) + ", n = " + std::to_string(n));
  if (layers < 1) throw_invalid_argument("decoder config: layers must be >= 1");
  if (!(lambda > 0.0)) throw_invalid_argument("decoder config: lambda must be positive");
  if (!(rho > 0.0)) throw_invalid_argument("decoder config: rho must be positive");
  if (!(b_out > 0.0)) throw_invalid_argument("decoder config: b_out must be positive");
}

LayerMatrices precompute(const Matrix& a, const Matrix& phi, double rho) {
  if (a.cols() != phi.cols())
    throw_invalid_argument("precompute: A has " + std::to_string(a.cols()) +
                           " columns, Phi has " + std::to_string(phi.cols()));
  if (!(rho > 0.0)) throw_invalid_argument("precompute: rho must be positive");
  const Index big_n = phi.rows();

  LayerMatrices lm;
  const Matrix m = a.transpose() * a + rho * (phi.transpose() * phi);
  lm.m_factor = spd_factor(m);
  lm.w = rho * (phi * lm.m_factor.solve(Matrix(phi.transpose())));
  lm.theta.resize(big_n, 2 * big_n);
  lm.theta.leftCols(big_n) = -Matrix::Identity(big_n, big_n) - lm.w;
  lm.theta.rightCols(big_n) = lm.w;
  lm.lambda_mat.resize(big_n, 2 * big_n);
  lm.lambda_mat.leftCols(big_n) = Matrix::Identity(big_n, big_n) - lm.w;
  lm.lambda_mat.rightCols(big_n) = lm.w;
  lm.theta_tilde = Matrix::Zero(2 * big_n, 2 * big_n);
  lm.theta_tilde.topRows(big_n) = lm.lambda_mat;
  return lm;
}

Vector bias(const LayerMatrices& lm, const Matrix& phi, const Matrix& a,
            const Vector& y) {
  if (y.size() != a.rows())
    throw_invalid_argument("bias: y has dim " + std::to_string(y.size()) +
                           ", expected " + std::to_string(a.rows()));
  if (phi.cols() != a.cols() || phi.rows() != lm.big_n())
    throw_invalid_argument("bias: Phi shape does not match layer matrices");
  return phi * lm.m_factor.solve(Vector(a.transpose() * y));
}

DualState layer_step(const LayerMatrices& lm, const DualState& v,
                     const Vector& b, double threshold) {
  const Index big_n = lm.big_n();
  if (v.v.size() != 2 * big_n)
    throw_invalid_argument("layer_step: v has dim " + std::to_string(v.v.size()) +
                           ", expected " + std::to_string(2 * big_n));
  if (b.size() != big_n)
    throw_invalid_argument("layer_step: b has dim " + std::to_string(b.size()) +
                           ", expected " + std::to_string(big_n));

  const Vector t = lm.lambda_mat * v.v + b;  // Theta~ v + I1 b, top block
  const Vector s = soft_threshold(t, threshold);
  DualState next{Vector(2 * big_n)};
  next.v.head(big_n) = t - s;
  next.v.tail(big_n) = s;
  return next;
}

Vector output_map(const LayerMatrices& lm, const Matrix& phi, const Matrix& a,
                  const Vector& y, const DualState& v_l, double rho) {
  const Index big_n = lm.big_n();
  if (v_l.v.size() != 2 * big_n)
    throw_invalid_argument("output_map: v has dim " + std::to_string(v_l.v.size()) +
                           ", expected " + std::to_string(2 * big_n));
  if (y.size() != a.rows())
    throw_invalid_argument("output_map: y dim does not match A");
  const Vector u = v_l.v.head(big_n);
  const Vector z = v_l.v.tail(big_n);
  return lm.m_factor.solve(
      Vector(a.transpose() * y + rho * (phi.transpose() * (z - u))));
}

Vector forward(const DecoderConfig& cfg, const Matrix& phi, const Matrix& a,
               const Vector& y) {
  cfg.validate();
  if (phi.rows() != cfg.big_n || phi.cols() != cfg.n)
    throw_invalid_argument("forward: Phi shape does not match config");
  const LayerMatrices lm = precompute(a, phi, cfg.rho);
  const Vector b = bias(lm, phi, a, y);
  DualState v = DualState::zeros(cfg.big_n);
  for (int k = 0; k < cfg.layers; ++k) v = layer_step(lm, v, b, cfg.threshold());
  return norm_clip(output_map(lm, phi, a, y, v, cfg.rho), cfg.b_out);
}

Matrix forward_batch(const DecoderConfig& cfg, const Matrix& phi,
                     const Matrix& a, const Matrix& y_cols) {
  cfg.validate();
  if (phi.rows() != cfg.big_n || phi.cols() != cfg.n)
    throw_invalid_argument("forward_batch: Phi shape does not match config");
  if (y_cols.rows() != a.rows())
    throw_invalid_argument("forward_batch: measurement rows do not match A");
  ad::PlainAlg alg;
  return decoder_program(alg, phi, cfg, a, y_cols);
}

AdmmDadDecoder::AdmmDadDecoder(DecoderConfig cfg, Matrix a, Matrix phi)
    : cfg_(cfg), a_(std::move(a)), phi_(std::move(phi)) {
  cfg_.validate();
  if (phi_.rows() != cfg_.big_n || phi_.cols() != cfg_.n)
    throw_invalid_argument("decoder: Phi shape does not match config");
  if (a_.cols() != cfg_.n)
    throw_invalid_argument("decoder: A columns do not match config");
}

int AdmmDadDecoder::build_loss(ad::Tape& tape, const Matrix& y_cols,
                               const Matrix& x_cols,
                               std::vector<int>& param_nodes) const {
  ad::TapeAlg alg{tape};
  const int phi_node = tape.parameter(phi_);
  param_nodes = {phi_node};
  const int xhat = decoder_program(alg, phi_node, cfg_, a_, y_cols);
  return mse_loss_program(alg, xhat, x_cols);
}

Matrix AdmmDadDecoder::decode_batch(const Matrix& y_cols) const {
  return forward_batch(cfg_, phi_, a_, y_cols);
}

}  // namespace acs::dad
