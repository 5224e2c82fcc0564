#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acs/config.hpp"
#include "acs/decoder.hpp"
#include "acs/training.hpp"

namespace acs::expt {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> out_dir;
};

struct RunReport {
  ExperimentConfig config;  // resolved, overrides applied
  std::string dataset_label;
  Index m = 0;
  Index big_n = 0;       // N for admm-dad, n for ista (sparsifier rows)
  double b_out = 0.0;    // resolved clip radius (admm-dad)
  double ista_step = 0.0;
  training::MetricsReport metrics;
  std::vector<std::pair<double, double>> sweep;  // (std, test MSE)
  double wall_seconds = 0.0;

  std::filesystem::path out_dir;
  std::filesystem::path metrics_csv;
  std::filesystem::path history_csv;
  std::filesystem::path checkpoint_path;
  std::filesystem::path config_json;
  std::filesystem::path sweep_csv;  // set by run_sweep
};

// Dataset and ensemble assembly shared by runs, sweeps and re-evaluation.
struct RunInputs {
  data::MeasurementEnsemble ensemble;
  data::Dataset dataset;
  std::string label;
  Index n = 0;
};

RunInputs build_run_inputs(const ExperimentConfig& cfg);

// Fresh decoder for the configuration (initial parameters, before training).
// Fills the resolved N / b_out / step into the report fields provided.
std::unique_ptr<Decoder> build_decoder(const ExperimentConfig& cfg,
                                       const RunInputs& inputs, Index& big_n,
                                       double& b_out, double& ista_step);

RunReport run_experiment(const ExperimentConfig& cfg,
                         const RunOverrides& overrides = {});
RunReport run_experiment_file(const std::filesystem::path& config_path,
                              const RunOverrides& overrides = {});

// Trains, then re-measures the test set per noise level and writes the
// robustness curve. Empty `stds` falls back to the config's sweep list.
RunReport run_sweep(const ExperimentConfig& cfg, std::vector<double> stds,
                    const RunOverrides& overrides = {});
RunReport run_sweep_file(const std::filesystem::path& config_path,
                         std::vector<double> stds,
                         const RunOverrides& overrides = {});

// Decoder checkpoints: parameters, config scalars and the measurement matrix
// in the ACSD container with float64 payloads (bit-exact round trip).
void save_checkpoint(const std::filesystem::path& path, const Decoder& decoder);
std::unique_ptr<Decoder> load_checkpoint(const std::filesystem::path& path);

// Robustness rows (decoder, std, test MSE) sorted ascending by std.
void write_robustness_csv(
    const std::filesystem::path& path, const std::string& decoder,
    const std::vector<std::pair<double, double>>& rows);

// STFT of a .wav file or of the first record of an .acsd tensor file,
// written as a frames x bins CSV grid of dB magnitudes.
void spectrogram_file(const std::filesystem::path& input, int n_fft, int hop,
                      const std::filesystem::path& out_csv);

}  // namespace acs::expt
