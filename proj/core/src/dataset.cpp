#include "ced/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ced/text_io.hpp"

namespace ced {

bool Dataset::labeled() const {
  for (int y : labels) {
    if (y < 0) return false;
  }
  return true;
}

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw InputError("Dataset: label count does not match row count");
  }
  for (int y : labels) {
    if (y < -1 || (class_count > 0 && y >= static_cast<int>(class_count))) {
      throw InputError("Dataset: label " + std::to_string(y) + " out of range");
    }
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw InputError("Dataset: non-finite feature value");
  }
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# class_count = " << data.class_count << '\n';
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      out << format_double(data.features(i, j)) << ',';
    }
    out << data.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto kv = parse_key_value(std::string_view(line).substr(1));
      if (kv && kv->first == "class_count") {
        data.class_count = parse_size(kv->second, "class_count");
      }
      continue;
    }
    const auto fields = split_csv(line);
    if (!have_header) {
      if (fields.empty() || fields.back() != "label") {
        throw InputError(path.string() + ": header must end with 'label'");
      }
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 1) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 1) + " fields");
    }
    for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_double(fields[j]));
    data.labels.push_back(parse_int(fields[dim]));
  }
  if (!have_header) throw InputError(path.string() + ": missing header row");
  data.features = Matrix(data.labels.size(), dim, std::move(values));
  if (data.class_count == 0) {
    for (int y : data.labels) {
      data.class_count = std::max(data.class_count, static_cast<std::size_t>(y + 1));
    }
  }
  data.validate();
  return data;
}

}  // namespace ced
