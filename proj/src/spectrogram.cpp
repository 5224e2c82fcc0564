#include "acs/spectrogram.hpp"

#include <fftw3.h>

#include <cmath>
#include <string>
#include <vector>

namespace acs::expt {

Matrix spectrogram(const Vector& signal, int n_fft, int hop) {
  if (n_fft < 2) throw_invalid_argument("spectrogram: n_fft must be >= 2");
  if (hop < 1) throw_invalid_argument("spectrogram: hop must be >= 1");
  if (signal.size() < n_fft)
    throw_invalid_argument("spectrogram: signal length " +
                           std::to_string(signal.size()) +
                           " shorter than n_fft " + std::to_string(n_fft));

  const Index frames = 1 + (signal.size() - n_fft) / hop;
  const Index bins = n_fft / 2 + 1;
  constexpr double kFloorDb = -100.0;
  constexpr double kFloorMag = 1e-5;  // 20*log10(1e-5) = -100 dB

  // Periodic Hann window.
  std::vector<double> window(static_cast<std::size_t>(n_fft));
  for (int k = 0; k < n_fft; ++k)
    window[static_cast<std::size_t>(k)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * k / n_fft);

  std::vector<double> in(static_cast<std::size_t>(n_fft));
  std::vector<fftw_complex> out(static_cast<std::size_t>(bins));
  fftw_plan plan =
      fftw_plan_dft_r2c_1d(n_fft, in.data(), out.data(), FFTW_ESTIMATE);

  Matrix spec(frames, bins);
  for (Index f = 0; f < frames; ++f) {
    for (int k = 0; k < n_fft; ++k)
      in[static_cast<std::size_t>(k)] =
          signal[f * hop + k] * window[static_cast<std::size_t>(k)];
    fftw_execute(plan);
    for (Index b = 0; b < bins; ++b) {
      const double re = out[static_cast<std::size_t>(b)][0];
      const double im = out[static_cast<std::size_t>(b)][1];
      const double mag = std::sqrt(re * re + im * im);
      spec(f, b) = mag <= kFloorMag ? kFloorDb : 20.0 * std::log10(mag);
    }
  }
  fftw_destroy_plan(plan);
  return spec;
}

}  // namespace acs::expt
