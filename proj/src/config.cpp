#include "acs/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace acs::expt {

std::string to_string(DecoderKind kind) {
  return kind == DecoderKind::admm_dad ? "admm-dad" : "ista";
}

std::string to_string(DataSource source) {
  switch (source) {
    case DataSource::synthetic: return "synthetic";
    case DataSource::wav_dir: return "wav-dir";
    case DataSource::pnm_dir: return "pnm-dir";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ParseCursor {
  const std::string& origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw_config(origin + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const std::string& v) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) fail("trailing characters in number '" + v + "'");
      return d;
    } catch (const std::exception&) {
      fail("expected a number, got '" + v + "'");
    }
  }

  long integer(const std::string& v) const {
    try {
      std::size_t used = 0;
      const long d = std::stol(v, &used);
      if (used != v.size()) fail("trailing characters in integer '" + v + "'");
      return d;
    } catch (const std::exception&) {
      fail("expected an integer, got '" + v + "'");
    }
  }

  std::uint64_t unsigned64(const std::string& v) const {
    try {
      std::size_t used = 0;
      const unsigned long long d = std::stoull(v, &used);
      if (used != v.size()) fail("trailing characters in integer '" + v + "'");
      return d;
    } catch (const std::exception&) {
      fail("expected an unsigned integer, got '" + v + "'");
    }
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("expected a boolean, got '" + v + "'");
  }

  std::vector<double> number_list(const std::string& v) const {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail("empty entry in list '" + v + "'");
      out.push_back(number(item));
    }
    if (out.empty()) fail("empty list");
    return out;
  }
};

void apply_key(ExperimentConfig& cfg, const std::string& section,
               const std::string& key, const std::string& value,
               const ParseCursor& at) {
  if (section == "experiment") {
    if (key == "decoder") {
      if (value == "admm-dad") cfg.decoder = DecoderKind::admm_dad;
      else if (value == "ista") cfg.decoder = DecoderKind::ista;
      else at.fail("decoder must be 'admm-dad' or 'ista', got '" + value + "'");
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "seed") {
      cfg.seed = at.unsigned64(value);
    } else {
      at.fail("unknown key 'experiment." + key + "'");
    }
    return;
  }
  if (section == "data") {
    if (key == "source") {
      if (value == "synthetic") cfg.source = DataSource::synthetic;
      else if (value == "wav-dir") cfg.source = DataSource::wav_dir;
      else if (value == "pnm-dir") cfg.source = DataSource::pnm_dir;
      else at.fail("source must be synthetic|wav-dir|pnm-dir, got '" + value + "'");
    } else if (key == "path") {
      cfg.data_path = value;
    } else if (key == "n") {
      cfg.n = at.integer(value);
    } else if (key == "dict_atoms") {
      cfg.dict_atoms = at.integer(value);
    } else if (key == "sparsity") {
      cfg.sparsity = static_cast<int>(at.integer(value));
    } else if (key == "train_count") {
      cfg.train_count = static_cast<int>(at.integer(value));
    } else if (key == "test_count") {
      cfg.test_count = static_cast<int>(at.integer(value));
    } else if (key == "train_fraction") {
      cfg.train_fraction = at.number(value);
    } else if (key == "cs_ratio") {
      cfg.cs_ratio = at.number(value);
    } else if (key == "noise_std") {
      cfg.noise_std = at.number(value);
    } else if (key == "noisy_train") {
      cfg.noisy_train = at.boolean(value);
    } else if (key == "noisy_test") {
      cfg.noisy_test = at.boolean(value);
    } else if (key == "downsample_filter") {
      if (value == "pair-mean") cfg.downsample = data::DownsampleFilter::pair_mean;
      else if (value == "fir") cfg.downsample = data::DownsampleFilter::fir;
      else at.fail("downsample_filter must be pair-mean|fir, got '" + value + "'");
    } else {
      at.fail("unknown key 'data." + key + "'");
    }
    return;
  }
  if (section == "decoder") {
    if (key == "layers") cfg.layers = static_cast<int>(at.integer(value));
    else if (key == "lambda") cfg.lambda = at.number(value);
    else if (key == "rho") cfg.rho = at.number(value);
    else if (key == "redundancy_ratio") cfg.redundancy_ratio = at.number(value);
    else if (key == "b_out") {
      if (value == "auto") cfg.b_out.reset();
      else cfg.b_out = at.number(value);
    } else if (key == "ista_step") {
      if (value == "auto") cfg.ista_step.reset();
      else cfg.ista_step = at.number(value);
    } else if (key == "ista_threshold") {
      cfg.ista_threshold = at.number(value);
    } else if (key == "ista_learn_threshold") {
      cfg.ista_learn_threshold = at.boolean(value);
    } else {
      at.fail("unknown key 'decoder." + key + "'");
    }
    return;
  }
  if (section == "train") {
    if (key == "learning_rate") cfg.train.learning_rate = at.number(value);
    else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(at.integer(value));
    else if (key == "epochs") cfg.train.epochs = static_cast<int>(at.integer(value));
    else if (key == "beta1") cfg.train.beta1 = at.number(value);
    else if (key == "beta2") cfg.train.beta2 = at.number(value);
    else if (key == "epsilon") cfg.train.epsilon = at.number(value);
    else at.fail("unknown key 'train." + key + "'");
    return;
  }
  if (section == "sweep") {
    if (key == "stds") cfg.sweep_stds = at.number_list(value);
    else at.fail("unknown key 'sweep." + key + "'");
    return;
  }
  at.fail("unknown section '[" + section + "]'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  ParseCursor at{origin, 0};
  std::string section;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++at.line;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) at.fail("empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (section.empty()) at.fail("key '" + key + "' outside any section");
    apply_key(cfg, section, key, value, at);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw_config("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.cs_ratio > 0.0 && cfg.cs_ratio < 1.0))
    throw_config("config: cs_ratio must be in (0,1)");
  if (cfg.noise_std < 0.0) throw_config("config: noise_std must be nonnegative");
  if (cfg.layers < 1) throw_config("config: layers must be >= 1");
  if (!(cfg.lambda > 0.0) || !(cfg.rho > 0.0))
    throw_config("config: lambda and rho must be positive");
  if (!(cfg.redundancy_ratio > 1.0))
    throw_config("config: redundancy_ratio must exceed 1");
  if (cfg.b_out && !(*cfg.b_out > 0.0))
    throw_config("config: b_out must be positive or 'auto'");
  if (cfg.ista_step && !(*cfg.ista_step > 0.0))
    throw_config("config: ista_step must be positive or 'auto'");
  if (cfg.ista_threshold < 0.0)
    throw_config("config: ista_threshold must be nonnegative");
  if (cfg.source == DataSource::synthetic) {
    if (cfg.n < 2) throw_config("config: data.n must be >= 2");
    if (cfg.dict_atoms < 1 || cfg.sparsity < 0 || cfg.sparsity >= cfg.dict_atoms)
      throw_config("config: need 0 <= sparsity < dict_atoms");
    if (cfg.train_count < 1 || cfg.test_count < 1)
      throw_config("config: train_count and test_count must be >= 1");
  } else {
    if (cfg.data_path.empty())
      throw_config("config: data.path is required for directory sources");
    if (!std::filesystem::exists(cfg.data_path))
      throw_config("config: data.path '" + cfg.data_path + "' does not exist");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
      throw_config("config: train_fraction must be in (0,1)");
  }
  for (double s : cfg.sweep_stds)
    if (s < 0.0) throw_config("config: sweep stds must be nonnegative");
  cfg.train.validate();
}

}  // namespace acs::expt
