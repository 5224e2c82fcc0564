#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "acs/admm_classical.hpp"
#include "acs/admm_dad.hpp"

using namespace acs;
using dad::DecoderConfig;
using dad::DualState;
using dad::LayerMatrices;

namespace {

struct Instance {
  Matrix a;
  Matrix phi;
  Vector y;
};

Instance random_instance(Index m, Index n, Index big_n, std::uint64_t seed) {
  Instance inst;
  inst.a = gaussian_matrix(m, n, 0.0, 1.0, derive_seed(seed, 0)) /
           std::sqrt(static_cast<double>(m));
  inst.phi = he_normal_init(big_n, n, derive_seed(seed, 1));
  const Vector x = gaussian_vector(n, 0.0, 1.0, derive_seed(seed, 2));
  inst.y = inst.a * x;
  return inst;
}

DecoderConfig config_for(const Instance& inst, int layers, double b_out) {
  DecoderConfig cfg;
  cfg.lambda = 1e-4;
  cfg.rho = 1.0;
  cfg.layers = layers;
  cfg.b_out = b_out;
  cfg.big_n = inst.phi.rows();
  cfg.n = inst.phi.cols();
  return cfg;
}

// Classical trajectory oracle: L scaled-ADMM iterations from zero, then one
// extra x-update with (z_L, u_L).
Vector classical_unrolled(const Instance& inst, const DecoderConfig& cfg) {
  admm::ClassicalProblem p;
  p.a = inst.a;
  p.phi = inst.phi;
  p.y = inst.y;
  p.lambda = cfg.lambda;
  p.rho = cfg.rho;
  const SpdFactor f = admm::normal_matrix_factor(p);
  admm::AdmmState s = admm::AdmmState::zeros(cfg.n, cfg.big_n);
  for (int k = 0; k < cfg.layers; ++k) s = admm::admm_step(p, s, f);
  return f.solve(
      Vector(p.a.transpose() * p.y + p.rho * (p.phi.transpose() * (s.z - s.u))));
}

}  // namespace

TEST_CASE("precompute shape law") {
  const Instance inst = random_instance(1, 4, 20, 1);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.0);
  CHECK(lm.w.rows() == 20);
  CHECK(lm.w.cols() == 20);
  CHECK(lm.theta.rows() == 20);
  CHECK(lm.theta.cols() == 40);
  CHECK(lm.lambda_mat.rows() == 20);
  CHECK(lm.lambda_mat.cols() == 40);
  CHECK(lm.theta_tilde.rows() == 40);
  CHECK(lm.theta_tilde.cols() == 40);
}

TEST_CASE("precompute block identities and W symmetry") {
  const Instance inst = random_instance(6, 10, 30, 2);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.3);
  const Index big_n = 30;
  const Matrix eye = Matrix::Identity(big_n, big_n);

  CHECK((lm.w - lm.w.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((lm.theta.leftCols(big_n) - (-eye - lm.w)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lm.theta.rightCols(big_n) - lm.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lm.lambda_mat.leftCols(big_n) - (eye - lm.w)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lm.lambda_mat.rightCols(big_n) - lm.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lm.theta_tilde.topRows(big_n) - lm.lambda_mat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lm.theta_tilde.bottomRows(big_n).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("W is a projection when A = 0 and Phi has orthonormal columns") {
  // Build Phi with Phi^T Phi = I via QR of a random tall matrix.
  const Matrix g = gaussian_matrix(12, 4, 0.0, 1.0, 3);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = Matrix(qr.householderQ()).leftCols(4);
  REQUIRE((q.transpose() * q - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);

  const Matrix a = Matrix::Zero(3, 4);
  const LayerMatrices lm = dad::precompute(a, q, 1.0);
  const Matrix expect = q * q.transpose();
  CHECK((lm.w - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((lm.w * lm.w - lm.w).cwiseAbs().maxCoeff() < 1e-12);  // idempotent
}

TEST_CASE("W eigenvalues lie in [0,1] when A = 0") {
  const Matrix phi = he_normal_init(12, 5, 4);
  const LayerMatrices lm = dad::precompute(Matrix::Zero(2, 5), phi, 1.0);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(
      Matrix(0.5 * (lm.w + lm.w.transpose())));
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  CHECK(eig.eigenvalues().maxCoeff() < 1.0 + 1e-10);
}

TEST_CASE("bias closed forms and explicit-inverse oracle") {
  const Instance inst = random_instance(6, 10, 25, 5);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.0);

  CHECK(dad::bias(lm, inst.phi, inst.a, Vector::Zero(6)).isZero(0.0));

  const Matrix zero_a = Matrix::Zero(6, 10);
  const LayerMatrices lm0 = dad::precompute(zero_a, inst.phi, 1.0);
  CHECK(dad::bias(lm0, inst.phi, zero_a, inst.y).isZero(1e-14));

  const Matrix m =
      inst.a.transpose() * inst.a + inst.phi.transpose() * inst.phi;
  const Vector expect = inst.phi * (m.inverse() * (inst.a.transpose() * inst.y));
  CHECK((dad::bias(lm, inst.phi, inst.a, inst.y) - expect).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("bias is exactly homogeneous in y") {
  const Instance inst = random_instance(5, 9, 20, 6);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.0);
  const Vector b1 = dad::bias(lm, inst.phi, inst.a, inst.y);
  const Vector b2 = dad::bias(lm, inst.phi, inst.a, Vector(2.0 * inst.y));
  CHECK((b2 - 2.0 * b1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layer_step basics and the first-layer identity") {
  const Instance inst = random_instance(4, 8, 20, 7);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.0);
  const double thr = 1e-2;

  const DualState zero = DualState::zeros(20);
  CHECK(dad::layer_step(lm, zero, Vector::Zero(20), thr).v.isZero(0.0));

  // v = 0: the general layer reduces to f1(y) = I1 b + I2 S(b).
  const Vector b = dad::bias(lm, inst.phi, inst.a, inst.y);
  const DualState v1 = dad::layer_step(lm, zero, b, thr);
  const Vector s = soft_threshold(b, thr);
  CHECK((v1.v.head(20) - (b - s)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((v1.v.tail(20) - s).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(dad::layer_step(lm, DualState{Vector::Zero(19)}, b, thr), Error);
  CHECK_THROWS_AS(dad::layer_step(lm, zero, Vector::Zero(19), thr), Error);
}

TEST_CASE("one layer_step from zero equals one admm_step from zero") {
  const Instance inst = random_instance(6, 12, 36, 8);
  const double lambda = 1e-3, rho = 1.0;

  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, rho);
  const Vector b = dad::bias(lm, inst.phi, inst.a, inst.y);
  const DualState v1 =
      dad::layer_step(lm, DualState::zeros(36), b, lambda / rho);

  admm::ClassicalProblem p{inst.a, inst.phi, inst.y, lambda, rho, {}};
  const admm::AdmmState s1 =
      admm::admm_step(p, admm::AdmmState::zeros(12, 36),
                      admm::normal_matrix_factor(p));

  CHECK((v1.v.head(36) - s1.u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((v1.v.tail(36) - s1.z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("output_map closed forms and the classical x-update") {
  const Instance inst = random_instance(5, 10, 30, 9);
  const LayerMatrices lm = dad::precompute(inst.a, inst.phi, 1.0);

  CHECK(dad::output_map(lm, inst.phi, inst.a, Vector::Zero(5),
                        DualState::zeros(30), 1.0)
            .isZero(0.0));

  // v = 0 reduces to the regularized least-squares output M^{-1} A^T y.
  const Vector expect = lm.m_factor.solve(Vector(inst.a.transpose() * inst.y));
  CHECK((dad::output_map(lm, inst.phi, inst.a, inst.y, DualState::zeros(30), 1.0) -
         expect)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("unfolding equivalence: forward equals the classical trajectory") {
  for (const int layers : {1, 5, 10}) {
    const Instance inst = random_instance(12, 25, 125, 100 + layers);
    const DecoderConfig cfg = config_for(inst, layers, 1e12);  // clip disabled
    const Vector net = dad::forward(cfg, inst.phi, inst.a, inst.y);
    const Vector classical = classical_unrolled(inst, cfg);
    CHECK((net - classical).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("forward of zero measurements is zero") {
  const Instance inst = random_instance(4, 9, 27, 11);
  const DecoderConfig cfg = config_for(inst, 5, 1.0);
  CHECK(dad::forward(cfg, inst.phi, inst.a, Vector::Zero(4)).isZero(0.0));
}

TEST_CASE("an active clip pins the output norm to b_out") {
  const Instance inst = random_instance(6, 12, 40, 12);
  DecoderConfig cfg = config_for(inst, 4, 1e12);
  const double unclipped = dad::forward(cfg, inst.phi, inst.a, inst.y).norm();
  REQUIRE(unclipped > 1e-3);
  cfg.b_out = 0.5 * unclipped;
  const Vector clipped = dad::forward(cfg, inst.phi, inst.a, inst.y);
  CHECK(std::abs(clipped.norm() - cfg.b_out) < 1e-12 * std::max(1.0, cfg.b_out));
  CHECK(clipped.norm() <= cfg.b_out);
}

TEST_CASE("forward_batch matches per-sample forward") {
  const Instance inst = random_instance(5, 11, 33, 13);
  const DecoderConfig cfg = config_for(inst, 6, 0.8);
  Matrix y_cols(5, 4);
  for (Index j = 0; j < 4; ++j)
    y_cols.col(j) = gaussian_vector(5, 0.0, 1.0, derive_seed(14, j));
  const Matrix batch = dad::forward_batch(cfg, inst.phi, inst.a, y_cols);
  for (Index j = 0; j < 4; ++j) {
    const Vector single = dad::forward(cfg, inst.phi, inst.a, Vector(y_cols.col(j)));
    CHECK((batch.col(j) - single).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("taped decoder forward is bit-identical to the untaped one") {
  const Instance inst = random_instance(6, 10, 30, 15);
  const DecoderConfig cfg = config_for(inst, 5, 0.9);
  Matrix y_cols(6, 3);
  for (Index j = 0; j < 3; ++j)
    y_cols.col(j) = gaussian_vector(6, 0.0, 1.0, derive_seed(16, j));

  ad::Tape tape;
  ad::TapeAlg alg{tape};
  const int phi_node = tape.parameter(inst.phi);
  const int xhat = dad::decoder_program(alg, phi_node, cfg, inst.a, y_cols);

  const Matrix untaped = dad::forward_batch(cfg, inst.phi, inst.a, y_cols);
  CHECK((tape.value(xhat) - untaped).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full decoder loss gradient matches finite differences") {
  const Instance inst = random_instance(4, 8, 24, 17);
  DecoderConfig cfg = config_for(inst, 3, 5.0);
  Matrix x_cols(8, 6), y_cols(4, 6);
  for (Index j = 0; j < 6; ++j) {
    x_cols.col(j) = gaussian_vector(8, 0.0, 0.5, derive_seed(18, j));
    y_cols.col(j) = inst.a * x_cols.col(j);
  }

  const dad::AdmmDadDecoder decoder(cfg, inst.a, inst.phi);
  ad::Tape tape;
  std::vector<int> params;
  const int loss = decoder.build_loss(tape, y_cols, x_cols, params);
  const ad::GradResult grad = tape.gradients(loss, params);

  auto loss_fn = [&](const Matrix& p) {
    ad::Tape t;
    std::vector<int> ps;
    const dad::AdmmDadDecoder probe(cfg, inst.a, p);
    const int l = probe.build_loss(t, y_cols, x_cols, ps);
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };

  std::mt19937_64 rng(19);
  std::vector<std::pair<Index, Index>> coords;
  for (int c = 0; c < 20; ++c)
    coords.emplace_back(static_cast<Index>(rng() % 24),
                        static_cast<Index>(rng() % 8));
  const ad::FdReport report =
      ad::finite_difference_check(loss_fn, inst.phi, grad.gradients[0], coords,
                                  1e-6);
  CHECK(report.checked > 0);
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("precompute and config validation") {
  const Instance inst = random_instance(4, 8, 24, 20);
  CHECK_THROWS_AS(dad::precompute(inst.a, Matrix::Zero(24, 9), 1.0), Error);
  CHECK_THROWS_AS(dad::precompute(inst.a, inst.phi, 0.0), Error);

  DecoderConfig bad = config_for(inst, 5, 1.0);
  bad.big_n = 8;  // N must exceed n
  CHECK_THROWS_AS(bad.validate(), Error);
  DecoderConfig bad2 = config_for(inst, 0, 1.0);
  CHECK_THROWS_AS(bad2.validate(), Error);
}
