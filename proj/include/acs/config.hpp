#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "acs/data.hpp"
#include "acs/training.hpp"

namespace acs::expt {

enum class DecoderKind { admm_dad, ista };
enum class DataSource { synthetic, wav_dir, pnm_dir };

std::string to_string(DecoderKind kind);
std::string to_string(DataSource source);

// Flat key-value experiment description with [sections]; unknown keys are
// rejected with a file:line anchor. The README documents every key.
struct ExperimentConfig {
  // [experiment]
  DecoderKind decoder = DecoderKind::admm_dad;
  std::string out_dir = "runs/experiment";
  std::uint64_t seed = 0;

  // [data]
  DataSource source = DataSource::synthetic;
  std::string data_path;  // wav-dir / pnm-dir sources
  Index n = 50;           // synthetic signal dimension
  Index dict_atoms = 64;
  int sparsity = 4;
  int train_count = 2000;
  int test_count = 500;
  double train_fraction = 0.7;  // directory sources
  double cs_ratio = 0.25;
  double noise_std = 1e-4;
  bool noisy_train = true;
  bool noisy_test = true;
  data::DownsampleFilter downsample = data::DownsampleFilter::pair_mean;

  // [decoder]
  int layers = 5;
  double lambda = 1e-4;
  double rho = 1.0;
  double redundancy_ratio = 5.0;
  std::optional<double> b_out;      // unset = auto: 1.1 x max train norm
  std::optional<double> ista_step;  // unset = auto: 1 / sigma_max(A)^2
  double ista_threshold = 1e-4;
  bool ista_learn_threshold = false;

  // [train]
  training::TrainConfig train;

  // [sweep]
  std::vector<double> sweep_stds = {1e-4, 1e-3, 1e-2, 1e-1};
};

ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);

// Cross-field checks (ranges, redundancy > 1, referenced paths exist).
void validate_config(const ExperimentConfig& cfg);

}  // namespace acs::expt
