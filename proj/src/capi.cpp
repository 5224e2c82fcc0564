#include "acs.h"

#include <cstring>
#include <string>

#include "acs/errors.hpp"
#include "acs/experiment.hpp"

namespace {

thread_local std::string g_last_error;

acs_status status_of(acs::errc code) {
  using acs::errc;
  switch (code) {
    case errc::ok: return ACS_OK;
    case errc::invalid_argument: return ACS_INVALID_ARGUMENT;
    case errc::singular_matrix: return ACS_SINGULAR_MATRIX;
    case errc::unsupported_operation: return ACS_UNSUPPORTED_OPERATION;
    case errc::format_error: return ACS_FORMAT_ERROR;
    case errc::config_error: return ACS_CONFIG_ERROR;
    case errc::divergence: return ACS_DIVERGENCE;
    case errc::io_error: return ACS_IO_ERROR;
    case errc::internal_error: return ACS_INTERNAL_ERROR;
  }
  return ACS_INTERNAL_ERROR;
}

template <class Fn>
acs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ACS_OK;
  } catch (const acs::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ACS_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return ACS_INTERNAL_ERROR;
  }
}

acs::expt::RunOverrides to_overrides(const acs_run_options* options) {
  acs::expt::RunOverrides ov;
  if (options) {
    if (options->has_seed) ov.seed = options->seed;
    if (options->has_epochs) ov.epochs = options->epochs;
    if (options->out_dir) ov.out_dir = options->out_dir;
  }
  return ov;
}

}  // namespace

struct acs_report {
  acs::expt::RunReport report;
};

extern "C" {

const char* acs_status_name(acs_status status) {
  switch (status) {
    case ACS_OK: return "ok";
    case ACS_INVALID_ARGUMENT: return "invalid-argument";
    case ACS_SINGULAR_MATRIX: return "singular-matrix";
    case ACS_UNSUPPORTED_OPERATION: return "unsupported-operation";
    case ACS_FORMAT_ERROR: return "format-error";
    case ACS_CONFIG_ERROR: return "config-error";
    case ACS_DIVERGENCE: return "divergence";
    case ACS_IO_ERROR: return "io-error";
    case ACS_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

const char* acs_last_error(void) { return g_last_error.c_str(); }

const char* acs_version(void) { return "0.1.0"; }

acs_status acs_run_experiment(const char* config_path,
                              const acs_run_options* options,
                              acs_report** out_report) {
  if (!config_path || !out_report) {
    g_last_error = "acs_run_experiment: NULL argument";
    return ACS_INVALID_ARGUMENT;
  }
  *out_report = nullptr;
  return guarded([&] {
    auto* handle = new acs_report{
        acs::expt::run_experiment_file(config_path, to_overrides(options))};
    *out_report = handle;
  });
}

acs_status acs_run_sweep(const char* config_path, const double* stds,
                         size_t std_count, const acs_run_options* options,
                         acs_report** out_report) {
  if (!config_path || !out_report || (std_count > 0 && !stds)) {
    g_last_error = "acs_run_sweep: NULL argument";
    return ACS_INVALID_ARGUMENT;
  }
  *out_report = nullptr;
  return guarded([&] {
    std::vector<double> levels(stds, stds + std_count);
    auto* handle = new acs_report{acs::expt::run_sweep_file(
        config_path, std::move(levels), to_overrides(options))};
    *out_report = handle;
  });
}

acs_status acs_report_metric(const acs_report* report, const char* key,
                             double* out_value) {
  if (!report || !key || !out_value) {
    g_last_error = "acs_report_metric: NULL argument";
    return ACS_INVALID_ARGUMENT;
  }
  const auto& r = report->report;
  const std::string k = key;
  if (k == "train_mse") *out_value = r.metrics.train_mse;
  else if (k == "test_mse") *out_value = r.metrics.test_mse;
  else if (k == "gen_error") *out_value = r.metrics.generalization_error;
  else if (k == "wall_seconds") *out_value = r.wall_seconds;
  else if (k == "cs_ratio") *out_value = r.config.cs_ratio;
  else if (k == "layers") *out_value = r.config.layers;
  else if (k == "m") *out_value = static_cast<double>(r.m);
  else if (k == "n") *out_value = static_cast<double>(r.config.n);
  else if (k == "big_n") *out_value = static_cast<double>(r.big_n);
  else if (k == "b_out") *out_value = r.b_out;
  else if (k == "ista_step") *out_value = r.ista_step;
  else {
    g_last_error = "acs_report_metric: unknown key '" + k + "'";
    return ACS_INVALID_ARGUMENT;
  }
  return ACS_OK;
}

acs_status acs_report_string(const acs_report* report, const char* key,
                             char* buf, size_t buf_size, size_t* out_len) {
  if (!report || !key) {
    g_last_error = "acs_report_string: NULL argument";
    return ACS_INVALID_ARGUMENT;
  }
  const auto& r = report->report;
  const std::string k = key;
  std::string value;
  if (k == "decoder") value = acs::expt::to_string(r.config.decoder);
  else if (k == "dataset") value = r.dataset_label;
  else if (k == "out_dir") value = r.out_dir.string();
  else if (k == "metrics_csv") value = r.metrics_csv.string();
  else if (k == "history_csv") value = r.history_csv.string();
  else if (k == "config_json") value = r.config_json.string();
  else if (k == "checkpoint") value = r.checkpoint_path.string();
  else if (k == "sweep_csv") value = r.sweep_csv.string();
  else {
    g_last_error = "acs_report_string: unknown key '" + k + "'";
    return ACS_INVALID_ARGUMENT;
  }
  if (out_len) *out_len = value.size();
  if (buf && buf_size > 0) {
    const size_t n = value.size() < buf_size - 1 ? value.size() : buf_size - 1;
    std::memcpy(buf, value.data(), n);
    buf[n] = '\0';
  }
  return ACS_OK;
}

size_t acs_report_epoch_count(const acs_report* report) {
  return report ? report->report.metrics.history.size() : 0;
}

acs_status acs_report_epoch_row(const acs_report* report, size_t index,
                                double* train_mse, double* test_mse,
                                double* gen_error) {
  if (!report || index >= report->report.metrics.history.size()) {
    g_last_error = "acs_report_epoch_row: index out of range";
    return ACS_INVALID_ARGUMENT;
  }
  const auto& row = report->report.metrics.history[index];
  if (train_mse) *train_mse = row.train_mse;
  if (test_mse) *test_mse = row.test_mse;
  if (gen_error) *gen_error = row.gen_error;
  return ACS_OK;
}

size_t acs_report_sweep_count(const acs_report* report) {
  return report ? report->report.sweep.size() : 0;
}

acs_status acs_report_sweep_row(const acs_report* report, size_t index,
                                double* noise_std, double* test_mse) {
  if (!report || index >= report->report.sweep.size()) {
    g_last_error = "acs_report_sweep_row: index out of range";
    return ACS_INVALID_ARGUMENT;
  }
  if (noise_std) *noise_std = report->report.sweep[index].first;
  if (test_mse) *test_mse = report->report.sweep[index].second;
  return ACS_OK;
}

void acs_report_free(acs_report* report) { delete report; }

acs_status acs_spectrogram_file(const char* input_path, int n_fft, int hop,
                                const char* out_csv_path) {
  if (!input_path || !out_csv_path) {
    g_last_error = "acs_spectrogram_file: NULL argument";
    return ACS_INVALID_ARGUMENT;
  }
  return guarded([&] {
    acs::expt::spectrogram_file(input_path, n_fft, hop, out_csv_path);
  });
}

}  // extern "C"
