#include "ced/model_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ced/text_io.hpp"

namespace ced {

void ModelFile::validate() const {
  if (classes < 2) throw InputError("model: classes must be >= 2");
  if (networks.empty()) throw InputError("model: no networks");
  const bool ensemble = kind == ModelKind::de || kind == ModelKind::de_credal;
  if (!ensemble && networks.size() != 1) {
    throw InputError("model: " + std::string(to_string(kind)) + " holds exactly one network");
  }
  const std::size_t width = kind == ModelKind::ced ? 2 * classes + 1 : classes;
  for (const auto& n : networks) {
    if (n.spec().output_dim != width) {
      throw InputError("model: " + std::string(to_string(kind)) + " needs output width " +
                       std::to_string(width) + ", network has " +
                       std::to_string(n.spec().output_dim));
    }
    if (n.spec().input_dim != networks.front().spec().input_dim) {
      throw InputError("model: networks disagree on input_dim");
    }
  }
}

namespace {

void write_tensor(std::ostream& out, const std::string& label, const ad::Tensor& t) {
  out << label << ' ' << t.rows() << ' ' << t.cols() << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      out << (c ? " " : "") << format_double(t.at(r, c));
    }
    out << '\n';
  }
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto t = trim(line);
      if (!t.empty()) return std::string(t);
    }
    error("unexpected end of file");
  }

  std::string expect_key(const std::string& key) {
    const std::string line = next();
    const auto kv = parse_key_value(line);
    if (!kv || kv->first != key) error("expected '" + key + " = ...', got '" + line + "'");
    return kv->second;
  }

  [[noreturn]] void error(const std::string& msg) const {
    throw InputError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

ad::Tensor read_tensor(LineReader& rd, const std::string& label) {
  std::istringstream head(rd.next());
  std::string got;
  std::size_t rows = 0, cols = 0;
  head >> got >> rows >> cols;
  if (got != label || !head) rd.error("expected '" + label + " <rows> <cols>'");
  ad::Tensor t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::istringstream row(rd.next());
    std::string field;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(row >> field)) rd.error("short tensor row");
      try {
        t.at(r, c) = parse_double(field);
      } catch (const InputError& e) {
        rd.error(e.what());
      }
    }
    if (row >> field) rd.error("long tensor row");
  }
  return t;
}

}  // namespace

void write_model(const ModelFile& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "CEDMODEL 1\n";
  out << "kind = " << to_string(model.kind) << '\n';
  out << "classes = " << model.classes << '\n';
  out << "networks = " << model.networks.size() << '\n';
  for (const auto& net : model.networks) {
    const MlpSpec& s = net.spec();
    out << "network\n";
    out << "input_dim = " << s.input_dim << '\n';
    out << "hidden_dims = ";
    for (std::size_t i = 0; i < s.hidden_dims.size(); ++i) out << (i ? "," : "") << s.hidden_dims[i];
    out << '\n';
    out << "output_dim = " << s.output_dim << '\n';
    out << "activation = " << to_string(s.activation) << '\n';
    out << "seed = " << s.seed << '\n';
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      write_tensor(out, "weight", net.layers()[l].weight);
      write_tensor(out, "bias", net.layers()[l].bias);
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model " + path.string());
  LineReader rd(in, path.string());
  if (rd.next() != "CEDMODEL 1") rd.error("not a CEDMODEL 1 file");
  ModelFile m;
  try {
    m.kind = parse_model_kind(rd.expect_key("kind"));
    m.classes = parse_size(rd.expect_key("classes"), "classes");
    const std::size_t count = parse_size(rd.expect_key("networks"), "networks");
    for (std::size_t n = 0; n < count; ++n) {
      if (rd.next() != "network") rd.error("expected 'network'");
      MlpSpec s;
      s.input_dim = parse_size(rd.expect_key("input_dim"), "input_dim");
      s.hidden_dims.clear();
      const std::string dims = rd.expect_key("hidden_dims");
      if (!dims.empty()) {
        for (const auto& f : split_csv(dims)) s.hidden_dims.push_back(parse_size(f, "hidden_dims"));
      }
      s.output_dim = parse_size(rd.expect_key("output_dim"), "output_dim");
      s.activation = parse_activation(rd.expect_key("activation"));
      s.seed = parse_u64(rd.expect_key("seed"), "seed");
      std::vector<DenseLayer> layers;
      for (std::size_t l = 0; l <= s.hidden_dims.size(); ++l) {
        DenseLayer layer;
        layer.weight = read_tensor(rd, "weight");
        layer.bias = read_tensor(rd, "bias");
        layers.push_back(std::move(layer));
      }
      m.networks.emplace_back(std::move(s), std::move(layers));
    }
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    rd.error(msg);
  }
  if (rd.next() != "end") rd.error("expected 'end'");
  m.validate();
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["artifact_version"] = m.artifact_version;
  j["command"] = m.command;
  j["method"] = m.method;
  j["teacher"] = m.teacher;
  j["temperature"] = m.temperature ? nlohmann::ordered_json(*m.temperature) : nullptr;
  auto& cfg = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  auto& seeds = j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.seeds) seeds[k] = v;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  auto& hist = j["loss_history"] = nlohmann::ordered_json::array();
  for (const auto& h : m.loss_history) {
    hist.push_back({{"name", h.name},
                    {"initial_loss", h.history.initial_loss},
                    {"epoch_loss", h.history.epoch_loss},
                    {"learning_rate", h.history.learning_rate}});
  }
  j["timestamps"] = {{"started", m.started}, {"finished", m.finished}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
    RunManifest m;
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.method = j.at("method").get<std::string>();
    m.teacher = j.at("teacher").get<std::string>();
    if (!j.at("temperature").is_null()) m.temperature = j.at("temperature").get<double>();
    for (const auto& [k, v] : j.at("config").items()) m.config.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("seeds").items()) m.seeds.emplace_back(k, v.get<std::uint64_t>());
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& h : j.at("loss_history")) {
      LossHistory lh;
      lh.name = h.at("name").get<std::string>();
      lh.history.initial_loss = h.at("initial_loss").get<double>();
      lh.history.epoch_loss = h.at("epoch_loss").get<std::vector<double>>();
      lh.history.learning_rate = h.at("learning_rate").get<std::vector<double>>();
      m.loss_history.push_back(std::move(lh));
    }
    m.started = j.at("timestamps").at("started").get<std::string>();
    m.finished = j.at("timestamps").at("finished").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace ced
