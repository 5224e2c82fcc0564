#include "acs/autodiff.hpp"

#include <cmath>
#include <string>

namespace acs::ad {

namespace {

double kink_margin_of(const Matrix& x, double tau) {
  double margin = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      margin = std::min(margin, std::abs(std::abs(x(i, j)) - tau));
  return margin;
}

}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_id(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size()))
    throw_invalid_argument("tape: bad node id " + std::to_string(id));
}

const Node& Tape::node(int id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

const Matrix& Tape::value(int id) const { return node(id).value; }

double Tape::scalar_value(int id) const {
  const Matrix& v = node(id).value;
  if (v.rows() != 1 || v.cols() != 1)
    throw_invalid_argument("tape: node is not scalar");
  return v(0, 0);
}

int Tape::constant(Matrix v) {
  Node n;
  n.kind = OpKind::constant;
  n.value = std::move(v);
  return push(std::move(n));
}

int Tape::parameter(Matrix v) {
  Node n;
  n.kind = OpKind::parameter;
  n.value = std::move(v);
  return push(std::move(n));
}

int Tape::transpose(int a) {
  Node n;
  n.kind = OpKind::transpose;
  n.a = a;
  n.value = node(a).value.transpose();
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.cols() != bv.rows())
    throw_invalid_argument("tape matmul: inner dims " + std::to_string(av.cols()) +
                           " vs " + std::to_string(bv.rows()));
  Node n;
  n.kind = OpKind::matmul;
  n.a = a;
  n.b = b;
  n.value = av * bv;
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    throw_invalid_argument("tape add: shape mismatch");
  Node n;
  n.kind = OpKind::add;
  n.a = a;
  n.b = b;
  n.value = av + bv;
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    throw_invalid_argument("tape sub: shape mismatch");
  Node n;
  n.kind = OpKind::sub;
  n.a = a;
  n.b = b;
  n.value = av - bv;
  return push(std::move(n));
}

int Tape::scale(int a, double c) {
  Node n;
  n.kind = OpKind::scale;
  n.a = a;
  n.scalar = c;
  n.value = c * node(a).value;
  return push(std::move(n));
}

int Tape::solve_spd(int m, int b) {
  const Matrix& mv = node(m).value;
  const Matrix& bv = node(b).value;
  if (mv.rows() != bv.rows())
    throw_invalid_argument("tape solve_spd: lhs dim " + std::to_string(mv.rows()) +
                           " vs rhs rows " + std::to_string(bv.rows()));
  std::shared_ptr<SpdFactor> factor;
  for (const auto& [id, f] : factors_)
    if (id == m) factor = f;
  if (!factor) {
    factor = std::make_shared<SpdFactor>(spd_factor(mv));
    factors_.emplace_back(m, factor);
  }
  Node n;
  n.kind = OpKind::solve_spd;
  n.a = m;
  n.b = b;
  n.factor = factor;
  n.value = factor->solve(bv);
  return push(std::move(n));
}

int Tape::soft_threshold(int a, double tau) {
  if (!(tau >= 0.0))
    throw_invalid_argument("tape soft_threshold: tau must be nonnegative");
  Node n;
  n.kind = OpKind::soft_threshold;
  n.a = a;
  n.scalar = tau;
  n.value = acs::soft_threshold(node(a).value, tau);
  min_kink_margin_ = std::min(min_kink_margin_, kink_margin_of(node(a).value, tau));
  return push(std::move(n));
}

int Tape::soft_threshold(int a, int tau_node) {
  const double tau = scalar_value(tau_node);
  if (!(tau >= 0.0))
    throw_invalid_argument("tape soft_threshold: tracked tau must be nonnegative");
  Node n;
  n.kind = OpKind::soft_threshold;
  n.a = a;
  n.b = tau_node;
  n.scalar = tau;
  n.value = acs::soft_threshold(node(a).value, tau);
  min_kink_margin_ = std::min(min_kink_margin_, kink_margin_of(node(a).value, tau));
  return push(std::move(n));
}

int Tape::norm_clip_cols(int a, double bound) {
  if (!(bound > 0.0))
    throw_invalid_argument("tape norm_clip_cols: bound must be positive");
  const Matrix& av = node(a).value;
  Node n;
  n.kind = OpKind::norm_clip_cols;
  n.a = a;
  n.scalar = bound;
  n.value = acs::norm_clip_columns(av, bound);
  for (Index j = 0; j < av.cols(); ++j)
    min_kink_margin_ =
        std::min(min_kink_margin_, std::abs(av.col(j).norm() - bound));
  return push(std::move(n));
}

int Tape::vstack(int a, int b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.cols() != bv.cols())
    throw_invalid_argument("tape vstack: column mismatch");
  Node n;
  n.kind = OpKind::vstack;
  n.a = a;
  n.b = b;
  n.value.resize(av.rows() + bv.rows(), av.cols());
  n.value.topRows(av.rows()) = av;
  n.value.bottomRows(bv.rows()) = bv;
  return push(std::move(n));
}

int Tape::hstack(int a, int b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows())
    throw_invalid_argument("tape hstack: row mismatch");
  Node n;
  n.kind = OpKind::hstack;
  n.a = a;
  n.b = b;
  n.value.resize(av.rows(), av.cols() + bv.cols());
  n.value.leftCols(av.cols()) = av;
  n.value.rightCols(bv.cols()) = bv;
  return push(std::move(n));
}

int Tape::slice_rows(int a, Index row0, Index rows) {
  const Matrix& av = node(a).value;
  if (row0 < 0 || rows <= 0 || row0 + rows > av.rows())
    throw_invalid_argument("tape slice_rows: range out of bounds");
  Node n;
  n.kind = OpKind::slice_rows;
  n.a = a;
  n.row0 = row0;
  n.rows = rows;
  n.value = av.middleRows(row0, rows);
  return push(std::move(n));
}

int Tape::squared_fro(int a) {
  Node n;
  n.kind = OpKind::squared_fro;
  n.a = a;
  n.value.resize(1, 1);
  n.value(0, 0) = node(a).value.squaredNorm();
  return push(std::move(n));
}

std::vector<Matrix> Tape::backward(int output, const Matrix& seed,
                                   const std::vector<int>& params) const {
  const Node& out = node(output);
  if (seed.rows() != out.value.rows() || seed.cols() != out.value.cols())
    throw_invalid_argument("tape backward: seed shape does not match output");
  for (int p : params) {
    if (node(p).kind != OpKind::parameter)
      throw_invalid_argument("tape backward: node " + std::to_string(p) +
                             " is not a parameter");
  }

  std::vector<Matrix> adj(nodes_.size());
  std::vector<bool> touched(nodes_.size(), false);
  auto accum = [&](int id, const Matrix& g) {
    auto idx = static_cast<std::size_t>(id);
    if (!touched[idx]) {
      adj[idx] = g;
      touched[idx] = true;
    } else {
      adj[idx] += g;
    }
  };

  accum(output, seed);
  for (int id = output; id >= 0; --id) {
    const auto idx = static_cast<std::size_t>(id);
    if (!touched[idx]) continue;
    const Node& n = nodes_[idx];
    const Matrix& g = adj[idx];
    switch (n.kind) {
      case OpKind::constant:
      case OpKind::parameter:
        break;
      case OpKind::transpose:
        accum(n.a, g.transpose());
        break;
      case OpKind::matmul:
        accum(n.a, g * nodes_[static_cast<std::size_t>(n.b)].value.transpose());
        accum(n.b, nodes_[static_cast<std::size_t>(n.a)].value.transpose() * g);
        break;
      case OpKind::add:
        accum(n.a, g);
        accum(n.b, g);
        break;
      case OpKind::sub:
        accum(n.a, g);
        accum(n.b, -g);
        break;
      case OpKind::scale:
        accum(n.a, n.scalar * g);
        break;
      case OpKind::solve_spd: {
        // X = M^{-1} B with M symmetric: B_adj = M^{-1} G, M_adj = -B_adj X^T.
        Matrix s = n.factor->solve(g);
        accum(n.b, s);
        accum(n.a, -(s * n.value.transpose()));
        break;
      }
      case OpKind::soft_threshold: {
        const Matrix& in = nodes_[static_cast<std::size_t>(n.a)].value;
        Matrix ga(in.rows(), in.cols());
        double gtau = 0.0;
        for (Index c = 0; c < in.cols(); ++c)
          for (Index r = 0; r < in.rows(); ++r) {
            const bool active = std::abs(in(r, c)) > n.scalar;
            ga(r, c) = active ? g(r, c) : 0.0;
            if (active && n.b >= 0)
              gtau -= (in(r, c) > 0.0 ? 1.0 : -1.0) * g(r, c);
          }
        accum(n.a, ga);
        if (n.b >= 0) {
          Matrix gt(1, 1);
          gt(0, 0) = gtau;
          accum(n.b, gt);
        }
        break;
      }
      case OpKind::norm_clip_cols: {
        const Matrix& in = nodes_[static_cast<std::size_t>(n.a)].value;
        Matrix ga(in.rows(), in.cols());
        for (Index c = 0; c < in.cols(); ++c) {
          const double norm = in.col(c).norm();
          if (norm <= n.scalar) {
            ga.col(c) = g.col(c);
          } else {
            const double dot = in.col(c).dot(g.col(c));
            ga.col(c) = (n.scalar / norm) *
                        (g.col(c) - (dot / (norm * norm)) * in.col(c));
          }
        }
        accum(n.a, ga);
        break;
      }
      case OpKind::vstack: {
        const Index ra = nodes_[static_cast<std::size_t>(n.a)].value.rows();
        const Index rb = nodes_[static_cast<std::size_t>(n.b)].value.rows();
        accum(n.a, g.topRows(ra));
        accum(n.b, g.bottomRows(rb));
        break;
      }
      case OpKind::hstack: {
        const Index ca = nodes_[static_cast<std::size_t>(n.a)].value.cols();
        const Index cb = nodes_[static_cast<std::size_t>(n.b)].value.cols();
        accum(n.a, g.leftCols(ca));
        accum(n.b, g.rightCols(cb));
        break;
      }
      case OpKind::slice_rows: {
        const Matrix& in = nodes_[static_cast<std::size_t>(n.a)].value;
        Matrix ga = Matrix::Zero(in.rows(), in.cols());
        ga.middleRows(n.row0, n.rows) = g;
        accum(n.a, ga);
        break;
      }
      case OpKind::squared_fro:
        accum(n.a, 2.0 * g(0, 0) * nodes_[static_cast<std::size_t>(n.a)].value);
        break;
      default:
        throw Error(errc::unsupported_operation,
                    "tape backward: unsupported op tag");
    }
  }

  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (int p : params) {
    const auto idx = static_cast<std::size_t>(p);
    if (touched[idx])
      grads.push_back(adj[idx]);
    else
      grads.push_back(Matrix::Zero(nodes_[idx].value.rows(), nodes_[idx].value.cols()));
  }
  return grads;
}

GradResult Tape::gradients(int output, const std::vector<int>& params) const {
  GradResult res;
  res.loss_value = scalar_value(output);
  Matrix seed(1, 1);
  seed(0, 0) = 1.0;
  res.gradients = backward(output, seed, params);
  return res;
}

FdReport finite_difference_check(
    const std::function<LossProbe(const Matrix&)>& loss, const Matrix& phi,
    const Matrix& analytic_grad,
    const std::vector<std::pair<Index, Index>>& coords, double step,
    double kink_tol) {
  if (!(step > 0.0))
    throw_invalid_argument("finite_difference_check: step must be positive");
  if (analytic_grad.rows() != phi.rows() || analytic_grad.cols() != phi.cols())
    throw_invalid_argument("finite_difference_check: gradient shape mismatch");

  const LossProbe base = loss(phi);
  FdReport report;
  for (const auto& [i, j] : coords) {
    if (i < 0 || i >= phi.rows() || j < 0 || j >= phi.cols())
      throw_invalid_argument("finite_difference_check: coordinate out of range");
    Matrix probe = phi;
    probe(i, j) = phi(i, j) + step;
    const LossProbe plus = loss(probe);
    probe(i, j) = phi(i, j) - step;
    const LossProbe minus = loss(probe);
    const double margin =
        std::min({base.kink_margin, plus.kink_margin, minus.kink_margin});
    if (margin < kink_tol) {
      ++report.skipped;
      continue;
    }
    const double fd = (plus.value - minus.value) / (2.0 * step);
    const double g = analytic_grad(i, j);
    const double denom = std::max({std::abs(fd), std::abs(g), 1e-12});
    report.max_rel_error = std::max(report.max_rel_error, std::abs(fd - g) / denom);
    ++report.checked;
  }
  return report;
}

}  // namespace acs::ad
