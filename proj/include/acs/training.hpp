#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "acs/data.hpp"
#include "acs/decoder.hpp"
#include "acs/linalg.hpp"

namespace acs::training {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 128;
  int epochs = 0;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct EpochRow {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double gen_error = 0.0;
};

struct MetricsReport {
  double train_mse = 0.0;
  double test_mse = 0.0;
  double generalization_error = 0.0;  // |test - train| by construction
  std::vector<EpochRow> history;      // row 0 is the untrained decoder
};

// Mean over pairs of ||xhat - x||_2^2; pairs are (truth, estimate).
double mse(const std::vector<std::pair<Vector, Vector>>& pairs);
double mse_columns(const Matrix& x_cols, const Matrix& xhat_cols);

struct AdamState {
  Matrix m;  // first moment, lazily sized
  Matrix v;  // second moment
};

// Bias-corrected Adam update for step index t >= 1.
void adam_step(Matrix& params, const Matrix& grad, AdamState& state, int t,
               const TrainConfig& cfg);

// Mini-batch loop: taped forward -> MSE -> backward -> adam -> post_update.
// Per-epoch train/test MSE are recorded; aborts with a divergence error if
// the loss stops being finite. Deterministic under a fixed seed, including
// batch shuffling.
MetricsReport train(Decoder& decoder, const data::Dataset& ds,
                    const TrainConfig& cfg);

// Re-measures the test signals at each noise level (ascending stds) and
// evaluates test MSE; entry 0 of the seed stream per level.
std::vector<std::pair<double, double>> robustness_sweep(
    const Decoder& decoder, const Matrix& x_test,
    const data::MeasurementEnsemble& ens, const std::vector<double>& stds,
    std::uint64_t seed);

}  // namespace acs::training
