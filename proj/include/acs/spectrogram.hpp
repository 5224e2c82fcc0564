#pragma once

#include "acs/linalg.hpp"

namespace acs::expt {

// Hann-windowed magnitude STFT in dB with a -100 dB floor. Output is
// frames x (n_fft/2 + 1); frame f covers samples [f*hop, f*hop + n_fft).
Matrix spectrogram(const Vector& signal, int n_fft = 1024, int hop = 256);

}  // namespace acs::expt
