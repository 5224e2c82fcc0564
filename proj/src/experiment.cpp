#include "acs/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "acs/admm_dad.hpp"
#include "acs/container.hpp"
#include "acs/ista.hpp"
#include "acs/spectrogram.hpp"

namespace acs::expt {

namespace {

// Seed streams derived from the master experiment seed.
enum : std::uint64_t {
  kSeedSignals = 11,
  kSeedEnsemble = 12,
  kSeedSplit = 13,
  kSeedInit = 14,
  kSeedTrain = 15,
  kSeedSweep = 16,
};

// Shortest decimal that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir,
                                                std::initializer_list<const char*> exts) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const char* e : exts)
      if (ext == e) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentConfig resolve(const ExperimentConfig& base, const RunOverrides& ov) {
  ExperimentConfig cfg = base;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.epochs) cfg.train.epochs = *ov.epochs;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  validate_config(cfg);
  return cfg;
}

nlohmann::ordered_json config_to_json(const RunReport& report) {
  const ExperimentConfig& cfg = report.config;
  nlohmann::ordered_json j;
  j["experiment"] = {{"decoder", to_string(cfg.decoder)},
                     {"out_dir", cfg.out_dir},
                     {"seed", cfg.seed}};
  j["data"] = {{"source", to_string(cfg.source)},
               {"path", cfg.data_path},
               {"n", cfg.n},
               {"dict_atoms", cfg.dict_atoms},
               {"sparsity", cfg.sparsity},
               {"train_count", cfg.train_count},
               {"test_count", cfg.test_count},
               {"train_fraction", cfg.train_fraction},
               {"cs_ratio", cfg.cs_ratio},
               {"noise_std", cfg.noise_std},
               {"noisy_train", cfg.noisy_train},
               {"noisy_test", cfg.noisy_test},
               {"downsample_filter",
                cfg.downsample == data::DownsampleFilter::pair_mean ? "pair-mean"
                                                                    : "fir"}};
  j["decoder"] = {{"layers", cfg.layers},
                  {"lambda", cfg.lambda},
                  {"rho", cfg.rho},
                  {"redundancy_ratio", cfg.redundancy_ratio},
                  {"ista_threshold", cfg.ista_threshold},
                  {"ista_learn_threshold", cfg.ista_learn_threshold}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"batch_size", cfg.train.batch_size},
                {"epochs", cfg.train.epochs},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"epsilon", cfg.train.epsilon}};
  j["sweep"] = {{"stds", cfg.sweep_stds}};
  j["resolved"] = {{"dataset", report.dataset_label},
                   {"m", report.m},
                   {"N", report.big_n},
                   {"b_out", report.b_out},
                   {"ista_step", report.ista_step},
                   {"stft", {{"n_fft", 1024}, {"hop", 256}, {"window", "hann"}}}};
  j["metrics"] = {{"train_mse", report.metrics.train_mse},
                  {"test_mse", report.metrics.test_mse},
                  {"gen_error", report.metrics.generalization_error}};
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

void write_report_files(RunReport& report) {
  const auto& cfg = report.config;
  report.out_dir = cfg.out_dir;
  std::filesystem::create_directories(report.out_dir);

  report.metrics_csv = report.out_dir / "report.csv";
  {
    std::ofstream out(report.metrics_csv, std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot write " + report.metrics_csv.string());
    out << "decoder,dataset,cs_ratio,L,test_mse,gen_error\n";
    out << to_string(cfg.decoder) << ',' << report.dataset_label << ','
        << fmt(cfg.cs_ratio) << ',' << cfg.layers << ','
        << fmt(report.metrics.test_mse) << ','
        << fmt(report.metrics.generalization_error) << '\n';
  }

  report.history_csv = report.out_dir / "history.csv";
  {
    std::ofstream out(report.history_csv, std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot write " + report.history_csv.string());
    out << "epoch,train_mse,test_mse,gen_error\n";
    for (const auto& row : report.metrics.history)
      out << row.epoch << ',' << fmt(row.train_mse) << ',' << fmt(row.test_mse)
          << ',' << fmt(row.gen_error) << '\n';
  }

  report.config_json = report.out_dir / "config.json";
  {
    std::ofstream out(report.config_json, std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot write " + report.config_json.string());
    out << config_to_json(report).dump(2) << '\n';
  }
}

RunReport run_impl(const ExperimentConfig& resolved, std::vector<double> stds,
                   bool with_sweep) {
  const auto t0 = std::chrono::steady_clock::now();

  RunReport report;
  report.config = resolved;
  RunInputs inputs = build_run_inputs(resolved);
  report.dataset_label = inputs.label;
  report.m = inputs.ensemble.m();

  std::unique_ptr<Decoder> decoder = build_decoder(
      resolved, inputs, report.big_n, report.b_out, report.ista_step);

  training::TrainConfig train_cfg = resolved.train;
  train_cfg.seed = derive_seed(resolved.seed, kSeedTrain);
  report.metrics = training::train(*decoder, inputs.dataset, train_cfg);

  if (with_sweep) {
    if (stds.empty()) stds = resolved.sweep_stds;
    std::sort(stds.begin(), stds.end());
    report.sweep = training::robustness_sweep(
        *decoder, inputs.dataset.x_test, inputs.ensemble, stds,
        derive_seed(resolved.seed, kSeedSweep));
  }

  write_report_files(report);
  report.checkpoint_path = report.out_dir / "checkpoint.acsd";
  save_checkpoint(report.checkpoint_path, *decoder);
  if (with_sweep) {
    report.sweep_csv = report.out_dir / "robustness.csv";
    write_robustness_csv(report.sweep_csv, to_string(resolved.decoder), report.sweep);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Rewrite the JSON snapshot with the final wall time.
  {
    std::ofstream out(report.config_json, std::ios::trunc);
    out << config_to_json(report).dump(2) << '\n';
  }
  return report;
}

}  // namespace

RunInputs build_run_inputs(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunInputs inputs;
  std::vector<Vector> signals;
  Index train_count = 0;

  switch (cfg.source) {
    case DataSource::synthetic: {
      signals = data::synth_sparse_dataset(cfg.n, cfg.dict_atoms, cfg.sparsity,
                                           cfg.train_count + cfg.test_count,
                                           derive_seed(cfg.seed, kSeedSignals));
      inputs.label = "synthetic";
      train_count = cfg.train_count;
      break;
    }
    case DataSource::wav_dir: {
      const auto files = sorted_files(cfg.data_path, {".wav"});
      if (files.empty())
        throw_config("config: no .wav files under '" + cfg.data_path + "'");
      for (const auto& f : files) {
        const data::WavData wav = data::load_wav(f);
        for (Vector& seg : data::audio_to_segments(wav.samples, cfg.downsample))
          signals.push_back(std::move(seg));
      }
      inputs.label = std::filesystem::path(cfg.data_path).filename().string();
      train_count = static_cast<Index>(
          std::llround(cfg.train_fraction * static_cast<double>(signals.size())));
      break;
    }
    case DataSource::pnm_dir: {
      const auto files = sorted_files(cfg.data_path, {".pgm", ".ppm", ".pnm"});
      if (files.empty())
        throw_config("config: no .pgm/.ppm/.pnm files under '" + cfg.data_path + "'");
      for (const auto& f : files)
        signals.push_back(data::image_to_vector(data::load_pnm(f)));
      inputs.label = std::filesystem::path(cfg.data_path).filename().string();
      train_count = static_cast<Index>(
          std::llround(cfg.train_fraction * static_cast<double>(signals.size())));
      break;
    }
  }

  if (signals.size() < 2)
    throw_config("config: dataset needs at least 2 samples, got " +
                 std::to_string(signals.size()));
  for (std::size_t i = 1; i < signals.size(); ++i)
    if (signals[i].size() != signals[0].size())
      throw_config("config: inconsistent signal dimensions in dataset");
  inputs.n = signals[0].size();
  train_count = std::clamp<Index>(train_count, 1,
                                  static_cast<Index>(signals.size()) - 1);

  inputs.ensemble = data::make_ensemble(inputs.n, cfg.cs_ratio, cfg.noise_std,
                                        derive_seed(cfg.seed, kSeedEnsemble));
  inputs.dataset = data::make_dataset(inputs.ensemble, signals, train_count,
                                      cfg.noisy_train, cfg.noisy_test,
                                      derive_seed(cfg.seed, kSeedSplit));
  return inputs;
}

std::unique_ptr<Decoder> build_decoder(const ExperimentConfig& cfg,
                                       const RunInputs& inputs, Index& big_n,
                                       double& b_out, double& ista_step) {
  const Index n = inputs.n;
  if (cfg.decoder == DecoderKind::admm_dad) {
    const Index N = static_cast<Index>(
        std::llround(cfg.redundancy_ratio * static_cast<double>(n)));
    if (N <= n)
      throw_config("config: redundancy_ratio yields N <= n");
    dad::DecoderConfig dc;
    dc.lambda = cfg.lambda;
    dc.rho = cfg.rho;
    dc.layers = cfg.layers;
    dc.big_n = N;
    dc.n = n;
    if (cfg.b_out) {
      dc.b_out = *cfg.b_out;
    } else {
      double max_norm = 0.0;
      for (Index j = 0; j < inputs.dataset.x_train.cols(); ++j)
        max_norm = std::max(max_norm, inputs.dataset.x_train.col(j).norm());
      dc.b_out = max_norm > 0.0 ? 1.1 * max_norm : 1.0;
    }
    big_n = N;
    b_out = dc.b_out;
    ista_step = 0.0;
    Matrix phi = he_normal_init(N, n, derive_seed(cfg.seed, kSeedInit));
    return std::make_unique<dad::AdmmDadDecoder>(dc, inputs.ensemble.a_tilde,
                                                 std::move(phi));
  }

  ista::IstaConfig ic;
  ic.layers = cfg.layers;
  ic.n = n;
  ic.threshold = cfg.ista_threshold;
  ic.step_size = cfg.ista_step ? *cfg.ista_step
                               : ista::default_step_size(inputs.ensemble.a_tilde);
  big_n = n;
  b_out = 0.0;
  ista_step = ic.step_size;
  return std::make_unique<ista::IstaDecoder>(ic, inputs.ensemble.a_tilde,
                                             Matrix(Matrix::Identity(n, n)),
                                             cfg.ista_learn_threshold);
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOverrides& ov) {
  return run_impl(resolve(cfg, ov), {}, false);
}

RunReport run_experiment_file(const std::filesystem::path& config_path,
                              const RunOverrides& ov) {
  return run_experiment(parse_config_file(config_path), ov);
}

RunReport run_sweep(const ExperimentConfig& cfg, std::vector<double> stds,
                    const RunOverrides& ov) {
  return run_impl(resolve(cfg, ov), std::move(stds), true);
}

RunReport run_sweep_file(const std::filesystem::path& config_path,
                         std::vector<double> stds, const RunOverrides& ov) {
  return run_sweep(parse_config_file(config_path), std::move(stds), ov);
}

namespace {

// Checkpoint meta slots (rank-1 f64 record).
enum : std::size_t {
  kMetaKind = 0,        // 0 = admm-dad, 1 = ista
  kMetaLambda = 1,
  kMetaRho = 2,
  kMetaLayers = 3,
  kMetaBOut = 4,
  kMetaBigN = 5,
  kMetaN = 6,
  kMetaStep = 7,
  kMetaThreshold = 8,
  kMetaLearnThr = 9,
  kMetaSlots = 10,
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Decoder& decoder) {
  Vector meta = Vector::Zero(kMetaSlots);
  Matrix params;
  Matrix a;
  if (const auto* d = dynamic_cast<const dad::AdmmDadDecoder*>(&decoder)) {
    meta[kMetaKind] = 0;
    meta[kMetaLambda] = d->config().lambda;
    meta[kMetaRho] = d->config().rho;
    meta[kMetaLayers] = d->config().layers;
    meta[kMetaBOut] = d->config().b_out;
    meta[kMetaBigN] = static_cast<double>(d->config().big_n);
    meta[kMetaN] = static_cast<double>(d->config().n);
    params = d->phi();
    a = d->measurement_matrix();
  } else if (const auto* i = dynamic_cast<const ista::IstaDecoder*>(&decoder)) {
    meta[kMetaKind] = 1;
    meta[kMetaLayers] = i->config().layers;
    meta[kMetaN] = static_cast<double>(i->config().n);
    meta[kMetaStep] = i->config().step_size;
    meta[kMetaThreshold] = i->current_threshold();
    meta[kMetaLearnThr] = i->learns_threshold() ? 1.0 : 0.0;
    params = i->psi();
    a = i->measurement_matrix();
  } else {
    throw_invalid_argument("save_checkpoint: unknown decoder kind");
  }

  using data::TensorRecord;
  std::vector<TensorRecord> records;
  records.push_back(TensorRecord::from_vector(meta, TensorRecord::Dtype::f64));
  records.push_back(TensorRecord::from_matrix(params, TensorRecord::Dtype::f64));
  records.push_back(TensorRecord::from_matrix(a, TensorRecord::Dtype::f64));
  data::write_acsd(path, records);
}

std::unique_ptr<Decoder> load_checkpoint(const std::filesystem::path& path) {
  const auto records = data::read_acsd(path);
  if (records.size() != 3 || records[0].dims.size() != 1 ||
      records[0].values.size() != kMetaSlots)
    throw_format("checkpoint: expected meta + params + measurement records");
  const Vector meta = records[0].to_vector();
  const Matrix params = records[1].to_matrix();
  const Matrix a = records[2].to_matrix();

  if (meta[kMetaKind] == 0.0) {
    dad::DecoderConfig dc;
    dc.lambda = meta[kMetaLambda];
    dc.rho = meta[kMetaRho];
    dc.layers = static_cast<int>(meta[kMetaLayers]);
    dc.b_out = meta[kMetaBOut];
    dc.big_n = static_cast<Index>(meta[kMetaBigN]);
    dc.n = static_cast<Index>(meta[kMetaN]);
    return std::make_unique<dad::AdmmDadDecoder>(dc, a, params);
  }
  if (meta[kMetaKind] == 1.0) {
    ista::IstaConfig ic;
    ic.layers = static_cast<int>(meta[kMetaLayers]);
    ic.n = static_cast<Index>(meta[kMetaN]);
    ic.step_size = meta[kMetaStep];
    ic.threshold = meta[kMetaThreshold];
    return std::make_unique<ista::IstaDecoder>(ic, a, params,
                                               meta[kMetaLearnThr] != 0.0);
  }
  throw_format("checkpoint: unknown decoder tag");
}

void write_robustness_csv(const std::filesystem::path& path,
                          const std::string& decoder,
                          const std::vector<std::pair<double, double>>& rows) {
  if (rows.empty())
    throw_invalid_argument("write_robustness_csv: no sweep rows");
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot write " + path.string());
  out << "decoder,noise_std,test_mse\n";
  for (const auto& [std_level, mse] : sorted)
    out << decoder << ',' << fmt(std_level) << ',' << fmt(mse) << '\n';
}

void spectrogram_file(const std::filesystem::path& input, int n_fft, int hop,
                      const std::filesystem::path& out_csv) {
  Vector signal;
  std::string ext = input.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".wav") {
    const data::WavData wav = data::load_wav(input);
    signal.resize(static_cast<Index>(wav.samples.size()));
    for (std::size_t i = 0; i < wav.samples.size(); ++i)
      signal[static_cast<Index>(i)] = wav.samples[i] / 32768.0;
  } else if (ext == ".acsd") {
    const auto records = data::read_acsd(input);
    if (records.empty()) throw_format("spectrogram: empty tensor file");
    signal = records[0].to_vector();
  } else {
    throw_invalid_argument("spectrogram: input must be .wav or .acsd, got '" +
                           input.string() + "'");
  }

  const Matrix spec = spectrogram(signal, n_fft, hop);
  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot write " + out_csv.string());
  for (Index f = 0; f < spec.rows(); ++f) {
    for (Index b = 0; b < spec.cols(); ++b) {
      if (b) out << ',';
      out << fmt(spec(f, b));
    }
    out << '\n';
  }
}

}  // namespace acs::expt
