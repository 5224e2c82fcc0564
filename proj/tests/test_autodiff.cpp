#include <doctest.h>

#include <random>

#include "acs/autodiff.hpp"

using namespace acs;

TEST_CASE("identity program records a single node") {
  ad::Tape tape;
  const Vector x = gaussian_vector(5, 0.0, 1.0, 1);
  const int id = tape.parameter(x);
  CHECK(tape.size() == 1);
  CHECK((tape.value(id) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("taped soft_threshold(matmul) equals the untaped composition") {
  const Matrix a = gaussian_matrix(4, 3, 0.0, 1.0, 2);
  const Matrix b = gaussian_matrix(3, 2, 0.0, 1.0, 3);
  const double tau = 0.3;

  ad::Tape tape;
  const int out =
      tape.soft_threshold(tape.matmul(tape.constant(a), tape.constant(b)), tau);

  const Matrix prod = a * b;
  const Matrix expect = soft_threshold(prod, tau);
  CHECK((tape.value(out) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient of |Phi x|^2 is 2 (Phi x) x^T") {
  const Matrix phi = gaussian_matrix(6, 4, 0.0, 1.0, 4);
  const Vector x = gaussian_vector(4, 0.0, 1.0, 5);

  ad::Tape tape;
  const int p = tape.parameter(phi);
  const int loss = tape.squared_fro(tape.matmul(p, tape.constant(x)));
  const ad::GradResult res = tape.gradients(loss, {p});

  const Matrix expect = 2.0 * (phi * x) * x.transpose();
  CHECK((res.gradients[0] - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(res.loss_value == doctest::Approx((phi * x).squaredNorm()));
}

TEST_CASE("soft_threshold backward is an all-ones mask far from the kink") {
  Vector x(4);
  x << 2.0, -3.0, 1.5, -4.0;  // all |x| > tau
  ad::Tape tape;
  const int p = tape.parameter(x);
  const int out = tape.soft_threshold(p, 1.0);
  const Matrix seed = Matrix::Ones(4, 1);
  const auto grads = tape.backward(out, seed, {p});
  CHECK((grads[0] - Matrix::Ones(4, 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("soft_threshold backward zeroes inactive coordinates") {
  Vector x(3);
  x << 0.2, -5.0, 0.0;
  ad::Tape tape;
  const int p = tape.parameter(x);
  const int out = tape.soft_threshold(p, 1.0);
  const auto grads = tape.backward(out, Matrix::Ones(3, 1), {p});
  CHECK(grads[0](0, 0) == 0.0);
  CHECK(grads[0](1, 0) == 1.0);
  CHECK(grads[0](2, 0) == 0.0);
}

TEST_CASE("finite differences confirm a smooth quadratic gradient") {
  const Matrix phi = gaussian_matrix(5, 3, 0.0, 1.0, 6);
  const Vector x = gaussian_vector(3, 0.0, 1.0, 7);
  const Vector c = gaussian_vector(5, 0.0, 1.0, 8);

  auto loss = [&](const Matrix& p) {
    ad::Tape t;
    const int pn = t.parameter(p);
    const int l = t.squared_fro(
        t.sub(t.matmul(pn, t.constant(x)), t.constant(c)));
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };

  ad::Tape tape;
  const int pn = tape.parameter(phi);
  const int l = tape.squared_fro(
      tape.sub(tape.matmul(pn, tape.constant(x)), tape.constant(c)));
  const ad::GradResult res = tape.gradients(l, {pn});

  std::vector<std::pair<Index, Index>> coords;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 3; ++j) coords.emplace_back(i, j);
  const ad::FdReport report =
      ad::finite_difference_check(loss, phi, res.gradients[0], coords, 1e-6);
  CHECK(report.skipped == 0);
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("constant loss has zero gradient and zero fd error") {
  const Matrix phi = gaussian_matrix(3, 3, 0.0, 1.0, 9);
  auto loss = [&](const Matrix&) {
    return ad::LossProbe{2.5, std::numeric_limits<double>::infinity()};
  };
  const Matrix zero_grad = Matrix::Zero(3, 3);
  const ad::FdReport report = ad::finite_difference_check(
      loss, phi, zero_grad, {{0, 0}, {1, 2}}, 1e-6);
  CHECK(report.max_rel_error == 0.0);
  CHECK(report.checked == 2);
}

TEST_CASE("coordinates at a soft-threshold kink are skipped") {
  Matrix phi(2, 1);
  phi << 1.0, 0.5;  // second entry exactly at the kink for tau = 0.5
  auto loss = [&](const Matrix& p) {
    ad::Tape t;
    const int pn = t.parameter(p);
    const int l = t.squared_fro(t.soft_threshold(pn, 0.5));
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };
  ad::Tape tape;
  const int pn = tape.parameter(phi);
  const int l = tape.squared_fro(tape.soft_threshold(pn, 0.5));
  const ad::GradResult res = tape.gradients(l, {pn});
  const ad::FdReport report = ad::finite_difference_check(
      loss, phi, res.gradients[0], {{0, 0}, {1, 0}}, 1e-6);
  CHECK(report.skipped == 2);  // the kink taints the shared probe margin
  CHECK(report.checked == 0);
}

TEST_CASE("solve_spd adjoint matches finite differences") {
  const Matrix phi0 = gaussian_matrix(6, 3, 0.0, 1.0, 10);
  const Vector b = gaussian_vector(3, 0.0, 1.0, 11);

  auto build = [&](ad::Tape& t, const Matrix& p) {
    const int pn = t.parameter(p);
    const int m = t.add(t.matmul(t.transpose(pn), pn),
                        t.constant(Matrix(Matrix::Identity(3, 3))));
    return std::pair{t.squared_fro(t.solve_spd(m, t.constant(b))), pn};
  };

  auto loss = [&](const Matrix& p) {
    ad::Tape t;
    const auto [l, pn] = build(t, p);
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };

  ad::Tape tape;
  const auto [l, pn] = build(tape, phi0);
  const ad::GradResult res = tape.gradients(l, {pn});

  std::vector<std::pair<Index, Index>> coords;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 3; ++j) coords.emplace_back(i, j);
  const ad::FdReport report =
      ad::finite_difference_check(loss, phi0, res.gradients[0], coords, 1e-6);
  CHECK(report.skipped == 0);
  CHECK(report.max_rel_error < 1e-7);
}

TEST_CASE("norm clip backward: identity inside the ball, projection outside") {
  // Inside: clip changes nothing, gradient passes through.
  {
    Vector x(2);
    x << 0.3, 0.4;
    ad::Tape tape;
    const int pn = tape.parameter(x);
    const int l = tape.squared_fro(tape.norm_clip_cols(pn, 10.0));
    const ad::GradResult res = tape.gradients(l, {pn});
    CHECK((res.gradients[0] - Matrix(2.0 * x)).cwiseAbs().maxCoeff() < 1e-14);
  }
  // Outside: compare against finite differences of the full map.
  {
    const Vector x0 = 3.0 * gaussian_vector(4, 0.0, 1.0, 12);
    const Vector target = gaussian_vector(4, 0.0, 1.0, 13);
    auto loss = [&](const Matrix& p) {
      ad::Tape t;
      const int pn = t.parameter(p);
      const int l = t.squared_fro(
          t.sub(t.norm_clip_cols(pn, 1.0), t.constant(target)));
      return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
    };
    ad::Tape tape;
    const int pn = tape.parameter(x0);
    const int l = tape.squared_fro(
        tape.sub(tape.norm_clip_cols(pn, 1.0), tape.constant(target)));
    const ad::GradResult res = tape.gradients(l, {pn});
    std::vector<std::pair<Index, Index>> coords = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    const ad::FdReport report =
        ad::finite_difference_check(loss, x0, res.gradients[0], coords, 1e-6);
    CHECK(report.skipped == 0);
    CHECK(report.max_rel_error < 1e-7);
  }
}

TEST_CASE("tracked threshold gradient matches finite differences") {
  const Vector x = gaussian_vector(12, 0.0, 2.0, 14);
  Matrix tau0(1, 1);
  tau0 << 0.7;

  auto loss = [&](const Matrix& tau) {
    ad::Tape t;
    const int tn = t.parameter(tau);
    const int l = t.squared_fro(t.soft_threshold(t.constant(x), tn));
    return ad::LossProbe{t.scalar_value(l), t.min_kink_margin()};
  };
  ad::Tape tape;
  const int tn = tape.parameter(tau0);
  const int l = tape.squared_fro(tape.soft_threshold(tape.constant(x), tn));
  const ad::GradResult res = tape.gradients(l, {tn});
  const ad::FdReport report =
      ad::finite_difference_check(loss, tau0, res.gradients[0], {{0, 0}}, 1e-6);
  CHECK(report.skipped == 0);
  CHECK(report.max_rel_error < 1e-7);
}

TEST_CASE("stack and slice route gradients through the right blocks") {
  const Vector a0 = gaussian_vector(3, 0.0, 1.0, 15);
  const Vector b0 = gaussian_vector(2, 0.0, 1.0, 16);
  ad::Tape tape;
  const int an = tape.parameter(a0);
  const int bn = tape.parameter(b0);
  const int stacked = tape.vstack(an, bn);
  const int top = tape.slice_rows(stacked, 0, 3);  // recovers a
  const int l = tape.squared_fro(top);
  const ad::GradResult res = tape.gradients(l, {an, bn});
  CHECK((res.gradients[0] - Matrix(2.0 * a0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(res.gradients[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward is deterministic") {
  const Matrix phi = gaussian_matrix(5, 4, 0.0, 1.0, 17);
  const Vector x = gaussian_vector(4, 0.0, 1.0, 18);
  ad::Tape tape;
  const int pn = tape.parameter(phi);
  const int l = tape.squared_fro(
      tape.soft_threshold(tape.matmul(pn, tape.constant(x)), 0.2));
  const auto g1 = tape.gradients(l, {pn});
  const auto g2 = tape.gradients(l, {pn});
  CHECK((g1.gradients[0] - g2.gradients[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tape validates shapes and arguments") {
  ad::Tape tape;
  const int a = tape.constant(Matrix::Zero(2, 3));
  const int b = tape.constant(Matrix::Zero(2, 3));
  CHECK_THROWS_AS(tape.matmul(a, b), Error);
  CHECK_THROWS_AS(tape.slice_rows(a, 1, 5), Error);
  CHECK_THROWS_AS(tape.soft_threshold(a, -1.0), Error);
  const int out = tape.add(a, b);
  CHECK_THROWS_AS(tape.backward(out, Matrix::Zero(1, 1), {a}), Error);
  // seeding a non-parameter node
  CHECK_THROWS_AS(tape.backward(out, Matrix::Zero(2, 3), {out}), Error);
}
