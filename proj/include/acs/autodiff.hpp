#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "acs/linalg.hpp"

namespace acs::ad {

// Reverse-mode tape over matrix-valued primitives. Vectors are carried as
// one-column matrices. Ops evaluate eagerly; the tape keeps the forward
// values needed by the backward pass. Node references are strictly backward
// (a node only refers to earlier nodes).
enum class OpKind {
  constant,
  parameter,
  transpose,
  matmul,
  add,
  sub,
  scale,
  solve_spd,
  soft_threshold,
  norm_clip_cols,
  vstack,
  hstack,
  slice_rows,
  squared_fro,
};

struct Node {
  OpKind kind;
  int a = -1;
  int b = -1;            // second input; for soft_threshold: optional tracked threshold node
  double scalar = 0.0;   // scale factor / fixed threshold / clip bound
  Index row0 = 0;        // slice offset
  Index rows = 0;        // slice extent
  Matrix value;
  std::shared_ptr<SpdFactor> factor;  // solve_spd only, shared across solves with the same lhs
};

struct GradResult {
  double loss_value = 0.0;
  std::vector<Matrix> gradients;  // one per requested parameter, same shape
};

class Tape {
 public:
  int constant(Matrix v);
  int parameter(Matrix v);

  int transpose(int a);
  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int scale(int a, double c);
  // x = solve(M, b) for symmetric positive definite M. The factorization is
  // computed once per lhs node and reused by later solves and by backward.
  int solve_spd(int m, int b);
  int soft_threshold(int a, double tau);
  // Variant with the threshold as a tracked 1x1 node.
  int soft_threshold(int a, int tau_node);
  int norm_clip_cols(int a, double bound);
  int vstack(int a, int b);
  int hstack(int a, int b);
  int slice_rows(int a, Index row0, Index rows);
  int squared_fro(int a);

  const Matrix& value(int id) const;
  double scalar_value(int id) const;  // for 1x1 nodes
  std::size_t size() const { return nodes_.size(); }

  // Smallest |.|-distance of any soft-threshold input to its kink, and of any
  // clipped column norm to the clip boundary, seen while building this tape.
  double min_kink_margin() const { return min_kink_margin_; }

  // Vector-Jacobian products for the requested parameter nodes, seeding the
  // output with `seed` (same shape as the output value).
  std::vector<Matrix> backward(int output, const Matrix& seed,
                               const std::vector<int>& params) const;

  // Convenience for scalar (1x1) outputs with seed 1.
  GradResult gradients(int output, const std::vector<int>& params) const;

 private:
  int push(Node n);
  const Node& node(int id) const;
  void check_id(int id) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<int, std::shared_ptr<SpdFactor>>> factors_;
  double min_kink_margin_ = std::numeric_limits<double>::infinity();
};

// Evaluates `loss` at phi with entries perturbed one coordinate at a time and
// compares central differences against `analytic_grad`. Coordinates whose
// probes come within `kink_tol` of a soft-threshold kink or clip boundary are
// skipped rather than counted as failures.
struct LossProbe {
  double value = 0.0;
  double kink_margin = std::numeric_limits<double>::infinity();
};

struct FdReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

FdReport finite_difference_check(
    const std::function<LossProbe(const Matrix&)>& loss, const Matrix& phi,
    const Matrix& analytic_grad,
    const std::vector<std::pair<Index, Index>>& coords, double step,
    double kink_tol = 1e-8);

// The decoders are written once as programs over an algebra of the tape's
// primitive ops. TapeAlg records; PlainAlg evaluates the identical operation
// sequence without recording, so taped and untaped forwards agree bit for bit.
struct TapeAlg {
  Tape& tape;
  using V = int;
  using F = int;  // factor handle = lhs node id; the tape caches the factor

  V constant(Matrix m) { return tape.constant(std::move(m)); }
  V transpose(V a) { return tape.transpose(a); }
  V matmul(V a, V b) { return tape.matmul(a, b); }
  V add(V a, V b) { return tape.add(a, b); }
  V sub(V a, V b) { return tape.sub(a, b); }
  V scale(V a, double c) { return tape.scale(a, c); }
  F factorize(V m) { return m; }
  V solve(F f, V b) { return tape.solve_spd(f, b); }
  V soft(V a, double tau) { return tape.soft_threshold(a, tau); }
  V soft(V a, V tau_node) { return tape.soft_threshold(a, tau_node); }
  V clip_cols(V a, double bound) { return tape.norm_clip_cols(a, bound); }
  V vstack(V a, V b) { return tape.vstack(a, b); }
  V hstack(V a, V b) { return tape.hstack(a, b); }
  V slice_rows(V a, Index row0, Index rows) {
    return tape.slice_rows(a, row0, rows);
  }
  V squared_fro(V a) { return tape.squared_fro(a); }
  Matrix value(V a) const { return tape.value(a); }
};

struct PlainAlg {
  using V = Matrix;
  using F = SpdFactor;

  V constant(Matrix m) { return m; }
  V transpose(const V& a) { return a.transpose(); }
  V matmul(const V& a, const V& b) { return a * b; }
  V add(const V& a, const V& b) { return a + b; }
  V sub(const V& a, const V& b) { return a - b; }
  V scale(const V& a, double c) { return c * a; }
  F factorize(const V& m) { return spd_factor(m); }
  V solve(const F& f, const V& b) { return f.solve(b); }
  V soft(const V& a, double tau) { return acs::soft_threshold(a, tau); }
  V soft(const V& a, const V& tau) { return acs::soft_threshold(a, tau(0, 0)); }
  V clip_cols(const V& a, double bound) { return norm_clip_columns(a, bound); }
  V vstack(const V& a, const V& b) {
    Matrix r(a.rows() + b.rows(), a.cols());
    r.topRows(a.rows()) = a;
    r.bottomRows(b.rows()) = b;
    return r;
  }
  V hstack(const V& a, const V& b) {
    Matrix r(a.rows(), a.cols() + b.cols());
    r.leftCols(a.cols()) = a;
    r.rightCols(b.cols()) = b;
    return r;
  }
  V slice_rows(const V& a, Index row0, Index rows) {
    return a.middleRows(row0, rows);
  }
  V squared_fro(const V& a) {
    Matrix r(1, 1);
    r(0, 0) = a.squaredNorm();
    return r;
  }
  Matrix value(const V& a) const { return a; }
};

}  // namespace acs::ad
