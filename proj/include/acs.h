/* C interface to the analysis compressed sensing toolkit. All entry points
 * return an acs_status; on failure acs_last_error() carries a thread-local
 * message. Handles are opaque and freed with their _free function. */
#ifndef ACS_H
#define ACS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acs_status {
  ACS_OK = 0,
  ACS_INVALID_ARGUMENT = 1,
  ACS_SINGULAR_MATRIX = 2,
  ACS_UNSUPPORTED_OPERATION = 3,
  ACS_FORMAT_ERROR = 4,
  ACS_CONFIG_ERROR = 5,
  ACS_DIVERGENCE = 6,
  ACS_IO_ERROR = 7,
  ACS_INTERNAL_ERROR = 8
} acs_status;

const char* acs_status_name(acs_status status);

/* Message from the most recent failing call on this thread ("" if none). */
const char* acs_last_error(void);

const char* acs_version(void);

/* Optional per-run overrides; zero-initialize and set what you need. */
typedef struct acs_run_options {
  int has_seed;
  uint64_t seed;
  int has_epochs;
  int epochs;
  const char* out_dir; /* NULL keeps the config's out_dir */
} acs_run_options;

typedef struct acs_report acs_report;

/* Runs the experiment described by the config file: builds the dataset,
 * trains the configured decoder, evaluates it and writes report.csv,
 * history.csv, config.json and checkpoint.acsd into the output directory. */
acs_status acs_run_experiment(const char* config_path,
                              const acs_run_options* options,
                              acs_report** out_report);

/* Same as acs_run_experiment, then re-measures the test set at each noise
 * level and writes robustness.csv. stds may be NULL/0 to use the config. */
acs_status acs_run_sweep(const char* config_path, const double* stds,
                         size_t std_count, const acs_run_options* options,
                         acs_report** out_report);

/* Metric keys: train_mse, test_mse, gen_error, wall_seconds, cs_ratio,
 * layers, m, n, big_n, b_out, ista_step. */
acs_status acs_report_metric(const acs_report* report, const char* key,
                             double* out_value);

/* String keys: decoder, dataset, out_dir, metrics_csv, history_csv,
 * config_json, checkpoint, sweep_csv. Returns the full length (excluding the
 * terminator) through out_len if non-NULL; copies at most buf_size-1 bytes. */
acs_status acs_report_string(const acs_report* report, const char* key,
                             char* buf, size_t buf_size, size_t* out_len);

size_t acs_report_epoch_count(const acs_report* report);
acs_status acs_report_epoch_row(const acs_report* report, size_t index,
                                double* train_mse, double* test_mse,
                                double* gen_error);

size_t acs_report_sweep_count(const acs_report* report);
acs_status acs_report_sweep_row(const acs_report* report, size_t index,
                                double* noise_std, double* test_mse);

void acs_report_free(acs_report* report);

/* Magnitude STFT (dB) of a .wav file or the first record of an .acsd tensor
 * file, written as a frames x (n_fft/2+1) CSV grid. */
acs_status acs_spectrogram_file(const char* input_path, int n_fft, int hop,
                                const char* out_csv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ACS_H */
