#include "ced/config.hpp"

#include <algorithm>
#include <fstream>

#include "ced/text_io.hpp"

namespace ced {

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "dataset",      "classes",       "train_samples", "test_samples",  "ood_samples",
      "sigma",        "separation",    "noise",         "ood_distance",  "hidden_dims",
      "activation",   "epochs",        "batch_size",    "learning_rate", "lr_drop_epoch",
      "lr_drop_factor", "optimizer",   "temperature",   "members",       "threads",
      "method",       "seed",          "uncertainty",   "ece_bins",      "binary_interval"};
  return keys;
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("expected true|false, got '" + v + "'");
}

std::vector<std::size_t> parse_dims(const std::string& v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  for (const auto& f : split_csv(v)) out.push_back(parse_size(f, "hidden_dims"));
  return out;
}

std::string join_dims(const std::vector<std::size_t>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw InputError("unknown config key '" + key + "'");
  }
  try {
    if (key == "dataset") dataset = parse_synthetic_kind(value);
    else if (key == "classes") classes = parse_size(value, key);
    else if (key == "train_samples") train_samples = parse_size(value, key);
    else if (key == "test_samples") test_samples = parse_size(value, key);
    else if (key == "ood_samples") ood_samples = parse_size(value, key);
    else if (key == "sigma") sigma = parse_double(value);
    else if (key == "separation") separation = parse_double(value);
    else if (key == "noise") noise = parse_double(value);
    else if (key == "ood_distance") ood_distance = parse_double(value);
    else if (key == "hidden_dims") hidden_dims = parse_dims(value);
    else if (key == "activation") activation = parse_activation(value);
    else if (key == "epochs") epochs = parse_size(value, key);
    else if (key == "batch_size") batch_size = parse_size(value, key);
    else if (key == "learning_rate") learning_rate = parse_double(value);
    else if (key == "lr_drop_epoch") lr_drop_epoch = parse_size(value, key);
    else if (key == "lr_drop_factor") lr_drop_factor = parse_double(value);
    else if (key == "optimizer") optimizer = parse_optimizer(value);
    else if (key == "temperature") temperature = parse_double(value);
    else if (key == "members") members = parse_size(value, key);
    else if (key == "threads") threads = parse_size(value, key);
    else if (key == "method") method = parse_distill_method(value);
    else if (key == "seed") seed = parse_u64(value, key);
    else if (key == "uncertainty") {
      if (value == "all") uncertainty.reset();
      else uncertainty = parse_uncertainty_kind(value);
    }
    else if (key == "ece_bins") ece_bins = parse_size(value, key);
    else if (key == "binary_interval") binary_interval = parse_bool(value);
  } catch (const InputError& e) {
    throw InputError("config key '" + key + "': " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::snapshot() const {
  return {
      {"dataset", std::string(to_string(dataset))},
      {"classes", std::to_string(classes)},
      {"train_samples", std::to_string(train_samples)},
      {"test_samples", std::to_string(test_samples)},
      {"ood_samples", std::to_string(ood_samples)},
      {"sigma", format_double(sigma)},
      {"separation", format_double(separation)},
      {"noise", format_double(noise)},
      {"ood_distance", format_double(ood_distance)},
      {"hidden_dims", join_dims(hidden_dims)},
      {"activation", std::string(to_string(activation))},
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"learning_rate", format_double(learning_rate)},
      {"lr_drop_epoch", std::to_string(lr_drop_epoch)},
      {"lr_drop_factor", format_double(lr_drop_factor)},
      {"optimizer", std::string(to_string(optimizer))},
      {"temperature", format_double(temperature)},
      {"members", std::to_string(members)},
      {"threads", std::to_string(threads)},
      {"method", std::string(to_string(method))},
      {"seed", std::to_string(seed)},
      {"uncertainty", uncertainty ? std::string(to_string(*uncertainty)) : "all"},
      {"ece_bins", std::to_string(ece_bins)},
      {"binary_interval", binary_interval ? "true" : "false"},
  };
}

void RunConfig::validate() const {
  synthetic(dataset, std::max<std::size_t>(train_samples, 1), seed).validate();
  if (train_samples == 0) throw InputError("config: train_samples must be >= 1");
  if (members == 0) throw InputError("config: members must be >= 1");
  if (ece_bins == 0) throw InputError("config: ece_bins must be >= 1");
  train_config().validate();
  if (binary_interval && classes != 2) {
    throw InputError("config: binary_interval requires classes = 2");
  }
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.lr_drop_epoch = lr_drop_epoch;
  t.lr_drop_factor = lr_drop_factor;
  t.optimizer = optimizer;
  t.temperature = temperature;
  t.seed = seed;
  return t;
}

MlpSpec RunConfig::mlp_spec(std::size_t input_dim, std::size_t output_dim,
                            std::uint64_t weight_seed) const {
  MlpSpec s;
  s.input_dim = input_dim;
  s.hidden_dims = hidden_dims;
  s.output_dim = output_dim;
  s.activation = activation;
  s.seed = weight_seed;
  return s;
}

SyntheticParams RunConfig::synthetic(SyntheticKind kind, std::size_t samples,
                                     std::uint64_t data_seed) const {
  SyntheticParams p;
  p.kind = kind;
  p.classes = classes;
  p.samples = samples;
  p.sigma = sigma;
  p.separation = separation;
  p.noise = noise;
  p.ood_distance = ood_distance;
  p.seed = data_seed;
  return p;
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto kv = parse_key_value(t);
    if (!kv) {
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    try {
      cfg.set(kv->first, kv->second);
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_config_file(cfg, path);
  return cfg;
}

}  // namespace ced
