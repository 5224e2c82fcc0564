#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "acs/linalg.hpp"

namespace acs::data {

// Ground-truth signal and its (possibly noisy) measurement y = A~ x + e.
struct SamplePair {
  Vector x;
  Vector y;
};

// Gaussian measurement matrix with the 1/sqrt(m) normalization applied.
struct MeasurementEnsemble {
  Matrix a_raw;    // m x n, i.i.d. N(0,1)
  Matrix a_tilde;  // a_raw / sqrt(m)
  double noise_std = 0.0;
  double cs_ratio = 0.0;
  std::uint64_t seed = 0;

  Index m() const { return a_tilde.rows(); }
  Index n() const { return a_tilde.cols(); }
};

// m = round(cs_ratio * n); requires 0 < m < n.
MeasurementEnsemble make_ensemble(Index n, double cs_ratio, double noise_std,
                                  std::uint64_t seed);

// y = A~ x + e with e ~ N(0, noise_std^2 I).
Vector measure(const MeasurementEnsemble& ens, const Vector& x,
               std::uint64_t noise_seed);

// Column-wise batch variant; noise_std overrides the ensemble default
// (robustness sweeps regenerate measurements at varying noise levels).
Matrix measure_columns(const MeasurementEnsemble& ens, const Matrix& x_cols,
                       double noise_std, std::uint64_t noise_seed);

// Unit-norm signals synthesized from a fixed random dictionary with
// `sparsity` active atoms each, so a generic redundant analysis operator
// sees them as approximately sparse.
std::vector<Vector> synth_sparse_dataset(Index n, Index dict_atoms,
                                         int sparsity, int count,
                                         std::uint64_t seed);

// Row-major interleaved 8-bit image, 1 or 3 channels.
struct Image {
  Index height = 0;
  Index width = 0;
  Index channels = 1;
  std::vector<std::uint8_t> pixels;
};

// Grayscale (BT.601 luma for RGB), scaled to [0,1], row-major flatten.
Vector image_to_vector(const Image& img);

enum class DownsampleFilter {
  pair_mean,  // adjacent-pair average, trivially verifiable
  fir,        // windowed-sinc low-pass before decimation
};

// 16 kHz integer PCM -> 10 segments of dim 800: pad/truncate to 16000
// samples, normalize to [-1,1], downsample x2, split.
std::vector<Vector> audio_to_segments(
    const std::vector<std::int16_t>& samples,
    DownsampleFilter filter = DownsampleFilter::pair_mean);

struct WavData {
  int sample_rate = 0;
  std::vector<std::int16_t> samples;  // mono; stereo inputs averaged
};

// Minimal PCM WAV reader: 16-bit signed little-endian, mono or stereo.
WavData load_wav(const std::filesystem::path& path);

// Binary portable graymap/pixmap (P5/P6), maxval <= 255.
Image load_pnm(const std::filesystem::path& path);

// Sample columns split disjointly into train and test.
struct Dataset {
  Matrix x_train, y_train;  // n x s, m x s
  Matrix x_test, y_test;

  Index train_count() const { return x_train.cols(); }
  Index test_count() const { return x_test.cols(); }
};

// Shuffles signals with `seed`, takes the first train_count for training and
// the rest for testing, and measures both sets (noise per the flags).
Dataset make_dataset(const MeasurementEnsemble& ens,
                     const std::vector<Vector>& signals, Index train_count,
                     bool noisy_train, bool noisy_test, std::uint64_t seed);

}  // namespace acs::data
