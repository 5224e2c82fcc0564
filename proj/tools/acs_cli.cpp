// Experiment runner for the acs toolkit. Talks to the core exclusively
// through the C API in acs.h.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acs.h"

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::string out_dir;
};

acs_run_options make_options(const CommonFlags& flags) {
  acs_run_options opt{};
  if (flags.seed) {
    opt.has_seed = 1;
    opt.seed = *flags.seed;
  }
  if (flags.epochs) {
    opt.has_epochs = 1;
    opt.epochs = *flags.epochs;
  }
  if (!flags.out_dir.empty()) opt.out_dir = flags.out_dir.c_str();
  return opt;
}

int exit_code_for(acs_status status) {
  switch (status) {
    case ACS_OK: return 0;
    case ACS_CONFIG_ERROR: return 2;
    case ACS_DIVERGENCE: return 3;
    default: return 1;
  }
}

int fail(acs_status status) {
  std::cerr << "error (" << acs_status_name(status) << "): " << acs_last_error()
            << "\n";
  return exit_code_for(status);
}

std::string report_string(const acs_report* report, const char* key) {
  char buf[4096];
  size_t len = 0;
  if (acs_report_string(report, key, buf, sizeof buf, &len) != ACS_OK) return "";
  return std::string(buf);
}

double report_metric(const acs_report* report, const char* key) {
  double v = 0.0;
  acs_report_metric(report, key, &v);
  return v;
}

void print_report(const acs_report* report) {
  std::printf("decoder:   %s\n", report_string(report, "decoder").c_str());
  std::printf("dataset:   %s\n", report_string(report, "dataset").c_str());
  std::printf("cs_ratio:  %g   layers: %g   m: %g\n",
              report_metric(report, "cs_ratio"), report_metric(report, "layers"),
              report_metric(report, "m"));
  std::printf("train MSE: %.10e\n", report_metric(report, "train_mse"));
  std::printf("test MSE:  %.10e\n", report_metric(report, "test_mse"));
  std::printf("gen error: %.10e\n", report_metric(report, "gen_error"));
  std::printf("wall:      %.2f s\n", report_metric(report, "wall_seconds"));
  std::printf("report:    %s\n", report_string(report, "metrics_csv").c_str());
  const std::string sweep_csv = report_string(report, "sweep_csv");
  if (!sweep_csv.empty()) std::printf("sweep:     %s\n", sweep_csv.c_str());
}

int cmd_run(const std::string& config, const CommonFlags& flags) {
  const acs_run_options opt = make_options(flags);
  acs_report* report = nullptr;
  const acs_status status = acs_run_experiment(config.c_str(), &opt, &report);
  if (status != ACS_OK) return fail(status);
  print_report(report);
  acs_report_free(report);
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<double>& stds,
              const CommonFlags& flags) {
  const acs_run_options opt = make_options(flags);
  acs_report* report = nullptr;
  const acs_status status = acs_run_sweep(
      config.c_str(), stds.empty() ? nullptr : stds.data(), stds.size(), &opt,
      &report);
  if (status != ACS_OK) return fail(status);
  print_report(report);
  for (size_t i = 0; i < acs_report_sweep_count(report); ++i) {
    double level = 0.0, mse = 0.0;
    acs_report_sweep_row(report, i, &level, &mse);
    std::printf("  std %-12g test MSE %.10e\n", level, mse);
  }
  acs_report_free(report);
  return 0;
}

int cmd_spectrogram(const std::string& input, const std::string& out,
                    int n_fft, int hop) {
  const acs_status status =
      acs_spectrogram_file(input.c_str(), n_fft, hop, out.c_str());
  if (status != ACS_OK) return fail(status);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const CommonFlags& flags) {
  acs_run_options opt = make_options(flags);
  std::string dir_a, dir_b;
  if (!flags.out_dir.empty()) {
    dir_a = flags.out_dir + "/a";
    dir_b = flags.out_dir + "/b";
  }

  acs_report* reports[2] = {nullptr, nullptr};
  const std::string* configs[2] = {&config_a, &config_b};
  const std::string* dirs[2] = {&dir_a, &dir_b};
  for (int i = 0; i < 2; ++i) {
    if (!dirs[i]->empty()) opt.out_dir = dirs[i]->c_str();
    const acs_status status =
        acs_run_experiment(configs[i]->c_str(), &opt, &reports[i]);
    if (status != ACS_OK) {
      if (reports[0]) acs_report_free(reports[0]);
      return fail(status);
    }
  }

  std::printf("%-10s %-12s %-10s %-8s %-14s %-14s\n", "decoder", "dataset",
              "cs_ratio", "layers", "test_mse", "gen_error");
  for (acs_report* r : reports) {
    std::printf("%-10s %-12s %-10g %-8g %-14.6e %-14.6e\n",
                report_string(r, "decoder").c_str(),
                report_string(r, "dataset").c_str(), report_metric(r, "cs_ratio"),
                report_metric(r, "layers"), report_metric(r, "test_mse"),
                report_metric(r, "gen_error"));
  }

  if (!flags.out_dir.empty()) {
    std::ofstream out(flags.out_dir + "/compare.csv", std::ios::trunc);
    out << "decoder,dataset,cs_ratio,L,test_mse,gen_error\n";
    for (acs_report* r : reports) {
      char line[512];
      std::snprintf(line, sizeof line, "%s,%s,%.17g,%g,%.17g,%.17g\n",
                    report_string(r, "decoder").c_str(),
                    report_string(r, "dataset").c_str(),
                    report_metric(r, "cs_ratio"), report_metric(r, "layers"),
                    report_metric(r, "test_mse"), report_metric(r, "gen_error"));
      out << line;
    }
  }

  const double mse_a = report_metric(reports[0], "test_mse");
  const double mse_b = report_metric(reports[1], "test_mse");
  std::printf("lower test MSE: %s\n",
              report_string(reports[mse_a <= mse_b ? 0 : 1], "decoder").c_str());
  acs_report_free(reports[0]);
  acs_report_free(reports[1]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis compressed sensing experiment runner"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  int epochs_value = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_value, "Override the master seed")
        ->each([&](const std::string&) { flags.seed = seed_value; });
    cmd->add_option("--epochs-override", epochs_value, "Override epoch count")
        ->each([&](const std::string&) { flags.epochs = epochs_value; });
    cmd->add_option("--out-dir", flags.out_dir, "Override the output directory");
  };

  std::string config, config_b, input, output;
  std::vector<double> stds;
  int n_fft = 1024, hop = 256;

  CLI::App* run = app.add_subcommand("run", "Train and evaluate one decoder");
  run->add_option("config", config, "Experiment config file")->required();
  add_common(run);

  CLI::App* sweep =
      app.add_subcommand("sweep", "Train, then sweep measurement noise levels");
  sweep->add_option("config", config, "Experiment config file")->required();
  sweep->add_option("--stds", stds, "Noise std levels")->delimiter(',');
  add_common(sweep);

  CLI::App* spec = app.add_subcommand("spectrogram",
                                      "Magnitude STFT of a wav/tensor file");
  spec->add_option("input", input, "Input .wav or .acsd file")->required();
  spec->add_option("--out", output, "Output CSV path")->required();
  spec->add_option("--n-fft", n_fft, "FFT size (default 1024)");
  spec->add_option("--hop", hop, "Hop length (default 256)");

  CLI::App* compare =
      app.add_subcommand("compare", "Run two configs and compare test MSE");
  compare->add_option("config_a", config, "First config")->required();
  compare->add_option("config_b", config_b, "Second config")->required();
  add_common(compare);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config, flags);
  if (sweep->parsed()) return cmd_sweep(config, stds, flags);
  if (spec->parsed()) return cmd_spectrogram(input, output, n_fft, hop);
  if (compare->parsed()) return cmd_compare(config, config_b, flags);
  return 1;
}
