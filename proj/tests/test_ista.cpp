#include <doctest.h>

#include <random>

#include "acs/ista.hpp"

using namespace acs;
using ista::IstaConfig;

namespace {

Matrix small_gain_matrix(Index m, Index n, std::uint64_t seed) {
  Matrix a = gaussian_matrix(m, n, 0.0, 1.0, seed);
  const double smax = a.jacobiSvd().singularValues().maxCoeff();
  return a * (0.9 / smax);  // sigma_max = 0.9 < 1, so step = 1 is safe
}

Matrix random_orthogonal(Index n, std::uint64_t seed) {
  const Matrix g = gaussian_matrix(n, n, 0.0, 1.0, seed);
  const Eigen::HouseholderQR<Matrix> qr(g);
  return Matrix(qr.householderQ());
}

}  // namespace

TEST_CASE("ista_layer fixed point and gradient-step reduction") {
  const Matrix a = small_gain_matrix(3, 6, 1);
  const Matrix psi = Matrix::Identity(6, 6);

  CHECK(ista::ista_layer(psi, a, Vector::Zero(3), Vector::Zero(6), 0.5, 0.1)
            .isZero(0.0));

  // Psi = I and threshold 0 reduce to a plain gradient step.
  const Vector x = gaussian_vector(6, 0.0, 1.0, 2);
  const Vector y = gaussian_vector(3, 0.0, 1.0, 3);
  const Vector expect = x - 0.3 * (a.transpose() * (a * x - y));
  CHECK((ista::ista_layer(psi, a, y, x, 0.3, 0.0) - expect).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("ista_layer descends the composite objective") {
  // With step 1 and sigma_max(A) < 1 the layer is a proximal gradient step
  // for 0.5 |Ax-y|^2 + threshold |x|_1, which decreases monotonically.
  const Matrix a = small_gain_matrix(4, 8, 4);
  const Matrix psi = Matrix::Identity(8, 8);
  const double threshold = 0.05;
  const Vector x_true = gaussian_vector(8, 0.0, 1.0, 5);
  const Vector y = a * x_true;

  auto objective = [&](const Vector& x) {
    return 0.5 * (a * x - y).squaredNorm() + threshold * x.lpNorm<1>();
  };

  Vector x = Vector::Zero(8);
  double prev = objective(x);
  for (int k = 0; k < 50; ++k) {
    x = ista::ista_layer(psi, a, y, x, 1.0, threshold);
    const double obj = objective(x);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("ista_forward composes layers from zero") {
  const Matrix a = small_gain_matrix(4, 7, 6);
  IstaConfig cfg;
  cfg.layers = 30;
  cfg.step_size = 1.0;
  cfg.threshold = 0.02;
  cfg.n = 7;

  CHECK(ista::ista_forward(cfg, Matrix::Identity(7, 7), a, Vector::Zero(4))
            .isZero(0.0));

  // Classical ISTA oracle: the same recursion written out directly.
  const Vector y = gaussian_vector(4, 0.0, 1.0, 7);
  Vector x = Vector::Zero(7);
  for (int k = 0; k < cfg.layers; ++k)
    x = soft_threshold(Vector(x - cfg.step_size * (a.transpose() * (a * x - y))),
                       cfg.threshold);
  const Vector net = ista::ista_forward(cfg, Matrix::Identity(7, 7), a, y);
  CHECK((net - x).cwiseAbs().maxCoeff() < 1e-12);

  const Vector again = ista::ista_forward(cfg, Matrix::Identity(7, 7), a, y);
  CHECK((net - again).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ista_forward is linear in y when Psi is orthogonal and threshold 0") {
  const Matrix a = small_gain_matrix(5, 9, 8);
  const Matrix psi = random_orthogonal(9, 9);
  IstaConfig cfg;
  cfg.layers = 6;
  cfg.step_size = 0.7;
  cfg.threshold = 0.0;
  cfg.n = 9;

  const Vector y1 = gaussian_vector(5, 0.0, 1.0, 10);
  const Vector y2 = gaussian_vector(5, 0.0, 1.0, 11);
  const Vector lhs = ista::ista_forward(cfg, psi, a, Vector(2.0 * y1 - 3.0 * y2));
  const Vector rhs = 2.0 * ista::ista_forward(cfg, psi, a, y1) -
                     3.0 * ista::ista_forward(cfg, psi, a, y2);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("orthogonal_project returns the polar factor") {
  const Matrix q = random_orthogonal(5, 12);
  CHECK((ista::orthogonal_project(q) - q).cwiseAbs().maxCoeff() < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  CHECK((ista::orthogonal_project(d) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-14);

  const Matrix psi = gaussian_matrix(5, 5, 0.0, 1.0, 13);
  const Matrix proj = ista::orthogonal_project(psi);
  CHECK((proj.transpose() * proj - Matrix::Identity(5, 5)).norm() < 1e-10);

  // Frobenius minimality among orthogonal candidates.
  const double dist = (proj - psi).norm();
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix other = random_orthogonal(5, rng());
    CHECK(dist <= (other - psi).norm() + 1e-12);
  }

  CHECK_THROWS_AS(ista::orthogonal_project(Matrix::Zero(3, 3)), Error);
  CHECK_THROWS_AS(ista::orthogonal_project(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("default_step_size is 1 over the squared spectral norm") {
  const Matrix a = gaussian_matrix(4, 9, 0.0, 1.0, 15);
  const double smax = a.jacobiSvd().singularValues().maxCoeff();
  CHECK(ista::default_step_size(a) == doctest::Approx(1.0 / (smax * smax)));
}

TEST_CASE("ista loss gradient wrt Psi matches finite differences") {
  const Matrix a = small_gain_matrix(4, 8, 16);
  IstaConfig cfg;
  cfg.layers = 4;
  cfg.step_size = 0.8;
  cfg.threshold = 5e-3;
  cfg.n = 8;
  const Matrix psi0 = random_orthogonal(8, 17);

  Matrix x_cols(8, 5), y_cols(4, 5);
  for (Index j = 0; j < 5; ++j) {
    x_cols.col(j) = gaussian_vector(8, 0.0, 0.7, derive_seed(18, j));
    y_cols.col(j) = a * x_cols.col(j);
  }

  const ista::IstaDecoder decoder(cfg, a, psi0);
  ad::Tape tape;
  std::vector<int> params;
  const int loss = decoder.build_loss(tape, y_cols, x_cols, params);
  const ad::GradResult grad = tape.gradients(loss, params);

  auto loss_fn = [&](const Matrix& p) {
    ad::Tape t;
    std::vector<int> ps;
    const ista::IstaDecoder probe(cfg, a, p);
    const int l = probe.build_loss(t, y_cols, x_cols, ps);
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };

  std::mt19937_64 rng(19);
  std::vector<std::pair<Index, Index>> coords;
  for (int c = 0; c < 20; ++c)
    coords.emplace_back(static_cast<Index>(rng() % 8),
                        static_cast<Index>(rng() % 8));
  const ad::FdReport report =
      ad::finite_difference_check(loss_fn, psi0, grad.gradients[0], coords, 1e-6);
  CHECK(report.checked > 0);
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("learnable threshold exposes a second parameter with a live gradient") {
  const Matrix a = small_gain_matrix(3, 6, 20);
  IstaConfig cfg;
  cfg.layers = 3;
  cfg.step_size = 0.9;
  cfg.threshold = 0.05;
  cfg.n = 6;

  ista::IstaDecoder decoder(cfg, a, random_orthogonal(6, 21), true);
  CHECK(decoder.params().size() == 2);

  Matrix x_cols(6, 4), y_cols(3, 4);
  for (Index j = 0; j < 4; ++j) {
    x_cols.col(j) = gaussian_vector(6, 0.0, 1.0, derive_seed(22, j));
    y_cols.col(j) = a * x_cols.col(j);
  }
  ad::Tape tape;
  std::vector<int> params;
  const int loss = decoder.build_loss(tape, y_cols, x_cols, params);
  const ad::GradResult grad = tape.gradients(loss, params);
  REQUIRE(grad.gradients.size() == 2);
  CHECK(grad.gradients[1].rows() == 1);
  CHECK(std::abs(grad.gradients[1](0, 0)) > 0.0);
}

TEST_CASE("post_update restores orthogonality") {
  const Matrix a = small_gain_matrix(3, 5, 23);
  IstaConfig cfg;
  cfg.layers = 2;
  cfg.step_size = 0.9;
  cfg.threshold = 1e-3;
  cfg.n = 5;
  ista::IstaDecoder decoder(cfg, a, random_orthogonal(5, 24));
  decoder.psi() += 0.05 * gaussian_matrix(5, 5, 0.0, 1.0, 25);  // drift
  decoder.post_update();
  CHECK((decoder.psi().transpose() * decoder.psi() - Matrix::Identity(5, 5)).norm() <
        1e-8);
}
