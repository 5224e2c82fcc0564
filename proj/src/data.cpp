#include "acs/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace acs::data {

MeasurementEnsemble make_ensemble(Index n, double cs_ratio, double noise_std,
                                  std::uint64_t seed) {
  if (n <= 0) throw_invalid_argument("make_ensemble: n must be positive");
  if (!(cs_ratio > 0.0 && cs_ratio < 1.0))
    throw_invalid_argument("make_ensemble: cs_ratio must be in (0,1), got " +
                           std::to_string(cs_ratio));
  if (noise_std < 0.0)
    throw_invalid_argument("make_ensemble: noise_std must be nonnegative");
  const Index m = static_cast<Index>(std::llround(cs_ratio * static_cast<double>(n)));
  if (m <= 0 || m >= n)
    throw_invalid_argument("make_ensemble: cs_ratio " + std::to_string(cs_ratio) +
                           " yields m = " + std::to_string(m) +
                           " outside (0, n) for n = " + std::to_string(n));
  MeasurementEnsemble ens;
  ens.a_raw = gaussian_matrix(m, n, 0.0, 1.0, seed);
  ens.a_tilde = ens.a_raw / std::sqrt(static_cast<double>(m));
  ens.noise_std = noise_std;
  ens.cs_ratio = cs_ratio;
  ens.seed = seed;
  return ens;
}

Vector measure(const MeasurementEnsemble& ens, const Vector& x,
               std::uint64_t noise_seed) {
  if (x.size() != ens.n())
    throw_invalid_argument("measure: x has dim " + std::to_string(x.size()) +
                           ", expected " + std::to_string(ens.n()));
  Vector y = ens.a_tilde * x;
  if (ens.noise_std > 0.0)
    y += gaussian_vector(ens.m(), 0.0, ens.noise_std, noise_seed);
  return y;
}

Matrix measure_columns(const MeasurementEnsemble& ens, const Matrix& x_cols,
                       double noise_std, std::uint64_t noise_seed) {
  if (x_cols.rows() != ens.n())
    throw_invalid_argument("measure_columns: rows do not match ensemble n");
  if (noise_std < 0.0)
    throw_invalid_argument("measure_columns: noise_std must be nonnegative");
  Matrix y = ens.a_tilde * x_cols;
  if (noise_std > 0.0)
    y += gaussian_matrix(ens.m(), x_cols.cols(), 0.0, noise_std, noise_seed);
  return y;
}

std::vector<Vector> synth_sparse_dataset(Index n, Index dict_atoms,
                                         int sparsity, int count,
                                         std::uint64_t seed) {
  if (n <= 0 || dict_atoms <= 0)
    throw_invalid_argument("synth_sparse_dataset: dims must be positive");
  if (sparsity < 0 || sparsity >= dict_atoms)
    throw_invalid_argument("synth_sparse_dataset: need 0 <= sparsity < dict_atoms");
  if (count < 0) throw_invalid_argument("synth_sparse_dataset: count < 0");

  const Matrix dict = gaussian_matrix(n, dict_atoms, 0.0, 1.0, derive_seed(seed, 0));
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::normal_distribution<double> coeff(0.0, 1.0);
  std::vector<Index> atoms(static_cast<std::size_t>(dict_atoms));
  std::iota(atoms.begin(), atoms.end(), Index{0});

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x = Vector::Zero(n);
    std::shuffle(atoms.begin(), atoms.end(), rng);
    for (int k = 0; k < sparsity; ++k)
      x += coeff(rng) * dict.col(atoms[static_cast<std::size_t>(k)]);
    const double norm = x.norm();
    if (norm > 0.0) x /= norm;
    out.push_back(std::move(x));
  }
  return out;
}

Vector image_to_vector(const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw_invalid_argument("image_to_vector: unsupported channel count " +
                           std::to_string(img.channels));
  const std::size_t expected = static_cast<std::size_t>(img.height) *
                               static_cast<std::size_t>(img.width) *
                               static_cast<std::size_t>(img.channels);
  if (img.height <= 0 || img.width <= 0 || img.pixels.size() != expected)
    throw_invalid_argument("image_to_vector: pixel buffer does not match dims");

  Vector out(img.height * img.width);
  const double inv = 1.0 / 255.0;
  for (Index i = 0; i < img.height * img.width; ++i) {
    if (img.channels == 1) {
      out[i] = img.pixels[static_cast<std::size_t>(i)] * inv;
    } else {
      const std::size_t base = static_cast<std::size_t>(i) * 3;
      // ITU-R BT.601 luma
      const double luma = 0.299 * img.pixels[base] + 0.587 * img.pixels[base + 1] +
                          0.114 * img.pixels[base + 2];
      out[i] = luma * inv;
    }
  }
  return out;
}

namespace {

std::vector<double> fir_lowpass_half_band() {
  // 33-tap Hamming-windowed sinc, cutoff at half the post-decimation Nyquist.
  constexpr int taps = 33;
  constexpr double cutoff = 0.25;  // fraction of the input sample rate
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const double t = i - (taps - 1) / 2.0;
    const double sinc = t == 0.0 ? 2.0 * cutoff
                                 : std::sin(2.0 * M_PI * cutoff * t) / (M_PI * t);
    const double window = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (taps - 1));
    h[static_cast<std::size_t>(i)] = sinc * window;
    sum += h[static_cast<std::size_t>(i)];
  }
  for (double& v : h) v /= sum;  // unit DC gain keeps constants constant
  return h;
}

}  // namespace

std::vector<Vector> audio_to_segments(const std::vector<std::int16_t>& samples,
                                      DownsampleFilter filter) {
  if (samples.empty())
    throw_invalid_argument("audio_to_segments: empty input");

  constexpr Index kExpected = 16000;
  constexpr Index kHalf = 8000;
  constexpr Index kSegments = 10;
  constexpr Index kSegmentDim = 800;

  // Truncate longer inputs, zero-pad shorter ones to one second at 16 kHz.
  Vector full = Vector::Zero(kExpected);
  const Index take = std::min<Index>(kExpected, static_cast<Index>(samples.size()));
  for (Index i = 0; i < take; ++i)
    full[i] = samples[static_cast<std::size_t>(i)] / 32768.0;

  Vector down(kHalf);
  if (filter == DownsampleFilter::pair_mean) {
    for (Index i = 0; i < kHalf; ++i)
      down[i] = 0.5 * (full[2 * i] + full[2 * i + 1]);
  } else {
    const std::vector<double> h = fir_lowpass_half_band();
    const Index half_len = static_cast<Index>(h.size()) / 2;
    for (Index i = 0; i < kHalf; ++i) {
      double acc = 0.0;
      for (Index k = 0; k < static_cast<Index>(h.size()); ++k) {
        const Index src = 2 * i + k - half_len;
        if (src >= 0 && src < kExpected)
          acc += h[static_cast<std::size_t>(k)] * full[src];
      }
      down[i] = acc;
    }
  }

  std::vector<Vector> segments;
  segments.reserve(kSegments);
  for (Index s = 0; s < kSegments; ++s)
    segments.push_back(down.segment(s * kSegmentDim, kSegmentDim));
  return segments;
}

namespace {

std::uint32_t read_u32le(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16le(std::istream& in) {
  std::uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

WavData load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());

  char riff[4], wave[4];
  in.read(riff, 4);
  const std::uint32_t riff_size = read_u32le(in);
  (void)riff_size;
  in.read(wave, 4);
  if (!in || std::string(riff, 4) != "RIFF" || std::string(wave, 4) != "WAVE")
    throw_format("not a RIFF/WAVE file: " + path.string());

  WavData wav;
  int channels = 0;
  int bits = 0;
  bool have_fmt = false;
  while (in) {
    char tag[4];
    in.read(tag, 4);
    if (!in) break;
    const std::uint32_t chunk_size = read_u32le(in);
    const std::string name(tag, 4);
    if (name == "fmt ") {
      const std::uint16_t format = read_u16le(in);
      channels = read_u16le(in);
      wav.sample_rate = static_cast<int>(read_u32le(in));
      read_u32le(in);  // byte rate
      read_u16le(in);  // block align
      bits = read_u16le(in);
      if (chunk_size > 16) in.ignore(chunk_size - 16);
      if (format != 1) throw_format("wav: only PCM supported");
      if (bits != 16) throw_format("wav: only 16-bit samples supported");
      if (channels != 1 && channels != 2)
        throw_format("wav: only mono or stereo supported");
      have_fmt = true;
    } else if (name == "data") {
      if (!have_fmt) throw_format("wav: data chunk before fmt chunk");
      const std::size_t count = chunk_size / 2;
      std::vector<std::int16_t> raw(count);
      in.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(count * 2));
      if (!in) throw_format("wav: truncated data chunk");
      if (channels == 1) {
        wav.samples = std::move(raw);
      } else {
        wav.samples.resize(count / 2);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          const int sum = static_cast<int>(raw[2 * i]) + static_cast<int>(raw[2 * i + 1]);
          wav.samples[i] = static_cast<std::int16_t>(sum / 2);
        }
      }
      return wav;
    } else {
      in.ignore(chunk_size + (chunk_size & 1u));
    }
  }
  throw_format("wav: missing data chunk in " + path.string());
}

Image load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());

  auto next_token = [&in]() {
    std::string tok;
    while (in) {
      const int c = in.get();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      if (c == EOF) break;
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P6")
    throw_format("pnm: expected binary P5/P6, got '" + magic + "'");
  Image img;
  img.channels = magic == "P5" ? 1 : 3;
  try {
    img.width = std::stol(next_token());
    img.height = std::stol(next_token());
    const long maxval = std::stol(next_token());
    if (maxval <= 0 || maxval > 255) throw_format("pnm: unsupported maxval");
  } catch (const std::invalid_argument&) {
    throw_format("pnm: malformed header in " + path.string());
  }
  if (img.width <= 0 || img.height <= 0) throw_format("pnm: bad dimensions");

  const std::size_t count = static_cast<std::size_t>(img.width) *
                            static_cast<std::size_t>(img.height) *
                            static_cast<std::size_t>(img.channels);
  img.pixels.resize(count);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(count));
  if (!in) throw_format("pnm: truncated pixel data in " + path.string());
  return img;
}

Dataset make_dataset(const MeasurementEnsemble& ens,
                     const std::vector<Vector>& signals, Index train_count,
                     bool noisy_train, bool noisy_test, std::uint64_t seed) {
  const Index total = static_cast<Index>(signals.size());
  if (total < 2) throw_invalid_argument("make_dataset: need at least 2 signals");
  if (train_count <= 0 || train_count >= total)
    throw_invalid_argument("make_dataset: train_count must split the signals "
                           "into nonempty disjoint sets");
  for (const Vector& x : signals)
    if (x.size() != ens.n())
      throw_invalid_argument("make_dataset: signal dim does not match ensemble");

  std::vector<Index> perm(static_cast<std::size_t>(total));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::shuffle(perm.begin(), perm.end(), rng);

  Dataset ds;
  ds.x_train.resize(ens.n(), train_count);
  ds.x_test.resize(ens.n(), total - train_count);
  for (Index i = 0; i < train_count; ++i)
    ds.x_train.col(i) = signals[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  for (Index i = train_count; i < total; ++i)
    ds.x_test.col(i - train_count) =
        signals[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];

  ds.y_train = measure_columns(ens, ds.x_train, noisy_train ? ens.noise_std : 0.0,
                               derive_seed(seed, 1));
  ds.y_test = measure_columns(ens, ds.x_test, noisy_test ? ens.noise_std : 0.0,
                              derive_seed(seed, 2));
  return ds;
}

}  // namespace acs::data
