#include "acs/ista.hpp"

#include <Eigen/SVD>

#include <string>

namespace acs::ista {

void IstaConfig::validate() const {
  if (layers < 1) throw_invalid_argument("ista config: layers must be >= 1");
  if (!(step_size > 0.0))
    throw_invalid_argument("ista config: step_size must be positive");
  if (!(threshold >= 0.0))
    throw_invalid_argument("ista config: threshold must be nonnegative");
  if (n <= 0) throw_invalid_argument("ista config: n must be positive");
}

Vector ista_layer(const Matrix& psi, const Matrix& a, const Vector& y,
                  const Vector& x, double step, double threshold) {
  if (psi.rows() != psi.cols() || psi.rows() != a.cols())
    throw_invalid_argument("ista_layer: Psi must be n x n matching A");
  if (x.size() != a.cols())
    throw_invalid_argument("ista_layer: x has dim " + std::to_string(x.size()) +
                           ", expected " + std::to_string(a.cols()));
  if (y.size() != a.rows())
    throw_invalid_argument("ista_layer: y dim does not match A");
  const Vector grad_step = x - step * (a.transpose() * (a * x - y));
  return psi.transpose() * soft_threshold(Vector(psi * grad_step), threshold);
}

Vector ista_forward(const IstaConfig& cfg, const Matrix& psi, const Matrix& a,
                    const Vector& y) {
  cfg.validate();
  Vector x = Vector::Zero(cfg.n);
  for (int k = 0; k < cfg.layers; ++k)
    x = ista_layer(psi, a, y, x, cfg.step_size, cfg.threshold);
  return x;
}

Matrix orthogonal_project(const Matrix& psi) {
  if (psi.rows() != psi.cols())
    throw_invalid_argument("orthogonal_project: matrix must be square");
  Eigen::JacobiSVD<Matrix> svd(psi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > smax * 1e-12))
    throw_singular("orthogonal_project: matrix is rank deficient");
  return svd.matrixU() * svd.matrixV().transpose();
}

double default_step_size(const Matrix& a) {
  const double smax = a.jacobiSvd().singularValues().maxCoeff();
  if (!(smax > 0.0)) throw_invalid_argument("default_step_size: A is zero");
  return 1.0 / (smax * smax);
}

IstaDecoder::IstaDecoder(IstaConfig cfg, Matrix a, Matrix psi,
                         bool learn_threshold)
    : cfg_(cfg), a_(std::move(a)), psi_(std::move(psi)),
      learn_threshold_(learn_threshold) {
  cfg_.validate();
  if (psi_.rows() != cfg_.n || psi_.cols() != cfg_.n)
    throw_invalid_argument("ista decoder: Psi must be n x n");
  if (a_.cols() != cfg_.n)
    throw_invalid_argument("ista decoder: A columns do not match config");
  tau_.resize(1, 1);
  tau_(0, 0) = cfg_.threshold;
}

std::vector<Matrix*> IstaDecoder::params() {
  if (learn_threshold_) return {&psi_, &tau_};
  return {&psi_};
}

int IstaDecoder::build_loss(ad::Tape& tape, const Matrix& y_cols,
                            const Matrix& x_cols,
                            std::vector<int>& param_nodes) const {
  ad::TapeAlg alg{tape};
  const int psi_node = tape.parameter(psi_);
  int xhat = -1;
  if (learn_threshold_) {
    const int tau_node = tape.parameter(tau_);
    param_nodes = {psi_node, tau_node};
    xhat = ista_program_tracked_threshold(alg, psi_node, tau_node, cfg_, a_,
                                          y_cols);
  } else {
    param_nodes = {psi_node};
    xhat = ista_program(alg, psi_node, cfg_, a_, y_cols);
  }
  const int diff = alg.sub(xhat, alg.constant(x_cols));
  return alg.scale(alg.squared_fro(diff),
                   1.0 / static_cast<double>(x_cols.cols()));
}

Matrix IstaDecoder::decode_batch(const Matrix& y_cols) const {
  ad::PlainAlg alg;
  IstaConfig cfg = cfg_;
  cfg.threshold = current_threshold();
  return ista_program(alg, psi_, cfg, a_, y_cols);
}

void IstaDecoder::post_update() {
  psi_ = orthogonal_project(psi_);
  if (learn_threshold_ && tau_(0, 0) < 0.0) tau_(0, 0) = 0.0;
}

double IstaDecoder::current_threshold() const {
  return learn_threshold_ ? tau_(0, 0) : cfg_.threshold;
}

}  // namespace acs::ista
