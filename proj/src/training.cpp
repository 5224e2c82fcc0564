#include "acs/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "acs/autodiff.hpp"

namespace acs::training {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0))
    throw_invalid_argument("train config: learning_rate must be nonnegative");
  if (batch_size < 1) throw_invalid_argument("train config: batch_size must be >= 1");
  if (epochs < 0) throw_invalid_argument("train config: epochs must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw_invalid_argument("train config: betas must be in [0,1)");
  if (!(epsilon > 0.0)) throw_invalid_argument("train config: epsilon must be positive");
}

double mse(const std::vector<std::pair<Vector, Vector>>& pairs) {
  if (pairs.empty()) throw_invalid_argument("mse: empty sample list");
  double total = 0.0;
  const Index dim = pairs.front().first.size();
  for (const auto& [x, xhat] : pairs) {
    if (x.size() != dim || xhat.size() != dim)
      throw_invalid_argument("mse: inconsistent pair dims");
    total += (xhat - x).squaredNorm();
  }
  return total / static_cast<double>(pairs.size());
}

double mse_columns(const Matrix& x_cols, const Matrix& xhat_cols) {
  if (x_cols.rows() != xhat_cols.rows() || x_cols.cols() != xhat_cols.cols())
    throw_invalid_argument("mse_columns: shape mismatch");
  if (x_cols.cols() == 0) throw_invalid_argument("mse_columns: no samples");
  return (xhat_cols - x_cols).squaredNorm() / static_cast<double>(x_cols.cols());
}

void adam_step(Matrix& params, const Matrix& grad, AdamState& state, int t,
               const TrainConfig& cfg) {
  if (grad.rows() != params.rows() || grad.cols() != params.cols())
    throw_invalid_argument("adam_step: gradient shape does not match params");
  if (t < 1) throw_invalid_argument("adam_step: step index must be >= 1");
  if (state.m.size() == 0) {
    state.m = Matrix::Zero(params.rows(), params.cols());
    state.v = Matrix::Zero(params.rows(), params.cols());
  }
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const Matrix m_hat = state.m / bc1;
  const Matrix v_hat = state.v / bc2;
  params -= cfg.learning_rate *
            (m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon)).matrix();
}

namespace {

EpochRow evaluate(int epoch, Decoder& decoder, const data::Dataset& ds) {
  EpochRow row;
  row.epoch = epoch;
  row.train_mse = mse_columns(ds.x_train, decoder.decode_batch(ds.y_train));
  row.test_mse = mse_columns(ds.x_test, decoder.decode_batch(ds.y_test));
  row.gen_error = std::abs(row.test_mse - row.train_mse);
  return row;
}

}  // namespace

MetricsReport train(Decoder& decoder, const data::Dataset& ds,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (ds.train_count() == 0 || ds.test_count() == 0)
    throw_invalid_argument("train: dataset must have train and test samples");

  MetricsReport report;
  report.history.push_back(evaluate(0, decoder, ds));

  const auto params = decoder.params();
  std::vector<AdamState> moments(params.size());
  std::mt19937_64 rng(cfg.seed);
  std::vector<Index> order(static_cast<std::size_t>(ds.train_count()));
  std::iota(order.begin(), order.end(), Index{0});

  int t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < ds.train_count(); start += cfg.batch_size) {
      const Index count = std::min<Index>(cfg.batch_size, ds.train_count() - start);
      Matrix yb(ds.y_train.rows(), count);
      Matrix xb(ds.x_train.rows(), count);
      for (Index i = 0; i < count; ++i) {
        const Index src = order[static_cast<std::size_t>(start + i)];
        yb.col(i) = ds.y_train.col(src);
        xb.col(i) = ds.x_train.col(src);
      }

      ad::Tape tape;
      std::vector<int> param_nodes;
      const int loss = decoder.build_loss(tape, yb, xb, param_nodes);
      const ad::GradResult grad = tape.gradients(loss, param_nodes);
      if (!std::isfinite(grad.loss_value))
        throw Error(errc::divergence,
                    "train: non-finite batch loss at epoch " + std::to_string(epoch) +
                        ", batch offset " + std::to_string(start));
      ++t;
      for (std::size_t p = 0; p < params.size(); ++p)
        adam_step(*params[p], grad.gradients[p], moments[p], t, cfg);
      decoder.post_update();
    }

    EpochRow row = evaluate(epoch, decoder, ds);
    if (!std::isfinite(row.train_mse) || !std::isfinite(row.test_mse))
      throw Error(errc::divergence,
                  "train: non-finite MSE after epoch " + std::to_string(epoch));
    report.history.push_back(row);
  }

  const EpochRow& last = report.history.back();
  report.train_mse = last.train_mse;
  report.test_mse = last.test_mse;
  report.generalization_error = last.gen_error;
  return report;
}

std::vector<std::pair<double, double>> robustness_sweep(
    const Decoder& decoder, const Matrix& x_test,
    const data::MeasurementEnsemble& ens, const std::vector<double>& stds,
    std::uint64_t seed) {
  if (stds.empty()) throw_invalid_argument("robustness_sweep: empty std list");
  for (std::size_t i = 0; i < stds.size(); ++i) {
    if (stds[i] < 0.0)
      throw_invalid_argument("robustness_sweep: stds must be nonnegative");
    if (i > 0 && stds[i] < stds[i - 1])
      throw_invalid_argument("robustness_sweep: stds must be ascending");
  }

  std::vector<std::pair<double, double>> out;
  out.reserve(stds.size());
  for (std::size_t i = 0; i < stds.size(); ++i) {
    const Matrix y = data::measure_columns(ens, x_test, stds[i],
                                           derive_seed(seed, i + 1));
    out.emplace_back(stds[i], mse_columns(x_test, decoder.decode_batch(y)));
  }
  return out;
}

}  // namespace acs::training
