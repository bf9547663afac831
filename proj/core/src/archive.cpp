#include "ced/archive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "ced/text_io.hpp"

namespace ced {

std::string_view to_string(ArchiveErrc e) {
  switch (e) {
    case ArchiveErrc::io_error: return "io_error";
    case ArchiveErrc::bad_header: return "bad_header";
    case ArchiveErrc::bad_table: return "bad_table";
    case ArchiveErrc::member_count_mismatch: return "member_count_mismatch";
    case ArchiveErrc::sample_count_mismatch: return "sample_count_mismatch";
    case ArchiveErrc::class_count_mismatch: return "class_count_mismatch";
    case ArchiveErrc::non_finite: return "non_finite";
    case ArchiveErrc::label_out_of_range: return "label_out_of_range";
    case ArchiveErrc::truncated: return "truncated";
  }
  return "unknown";
}

namespace {

constexpr std::string_view kMagic = "CEDLGA 1";
constexpr std::uint32_t kTableMagic = 0x4C424154;  // "TABL" read little-endian
constexpr std::uint32_t kLabelsTable = 0;
constexpr std::uint32_t kMemberTable = 1;

[[noreturn]] void fail(ArchiveErrc code, const std::string& msg) { throw ArchiveError(code, msg); }

}  // namespace

void LogitArchive::validate() const {
  const auto& m = manifest;
  if (m.class_count < 2) fail(ArchiveErrc::bad_header, "class_count must be >= 2");
  if (m.member_count < 1) fail(ArchiveErrc::bad_header, "member_count must be >= 1");
  if (m.prescaled_temperature && !(*m.prescaled_temperature > 0.0)) {
    fail(ArchiveErrc::bad_header, "prescaled_temperature must be > 0");
  }
  if (members.size() != m.member_count) {
    fail(ArchiveErrc::member_count_mismatch,
         "member count mismatch: manifest says " + std::to_string(m.member_count) + ", found " +
             std::to_string(members.size()) + " member tables");
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].rows() != m.sample_count) {
      fail(ArchiveErrc::sample_count_mismatch,
           "sample count mismatch: member " + std::to_string(k) + " has " +
               std::to_string(members[k].rows()) + " rows, manifest says " +
               std::to_string(m.sample_count));
    }
    if (members[k].cols() != m.class_count) {
      fail(ArchiveErrc::class_count_mismatch,
           "class count mismatch: member " + std::to_string(k) + " has " +
               std::to_string(members[k].cols()) + " columns, manifest says " +
               std::to_string(m.class_count));
    }
  }
  if (labels.size() != m.sample_count) {
    fail(ArchiveErrc::sample_count_mismatch,
         "sample count mismatch: " + std::to_string(labels.size()) + " labels, manifest says " +
             std::to_string(m.sample_count));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < -1 || labels[i] >= static_cast<int>(m.class_count)) {
      fail(ArchiveErrc::label_out_of_range, "label " + std::to_string(labels[i]) + " at row " +
                                                std::to_string(i) + " is outside [0, " +
                                                std::to_string(m.class_count) + ")");
    }
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (std::size_t r = 0; r < members[k].rows(); ++r) {
      for (std::size_t c = 0; c < members[k].cols(); ++c) {
        if (!std::isfinite(members[k](r, c))) {
          fail(ArchiveErrc::non_finite, "non-finite value at (member " + std::to_string(k) +
                                            ", row " + std::to_string(r) + ", col " +
                                            std::to_string(c) + ")");
        }
      }
    }
  }
}

std::vector<Matrix> LogitArchive::raw_members() const {
  if (!manifest.prescaled_temperature) return members;
  std::vector<Matrix> out = members;
  for (auto& m : out) {
    for (double& v : m.data()) v *= *manifest.prescaled_temperature;
  }
  return out;
}

bool is_csv_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  return ext == ".csv";
}

namespace {

std::vector<std::pair<std::string, std::string>> manifest_entries(const ArchiveManifest& m) {
  std::vector<std::pair<std::string, std::string>> out{
      {"class_count", std::to_string(m.class_count)},
      {"member_count", std::to_string(m.member_count)},
      {"sample_count", std::to_string(m.sample_count)},
      {"split", m.split},
      {"creator", m.creator},
  };
  if (m.prescaled_temperature) {
    out.emplace_back("prescaled_temperature", format_double(*m.prescaled_temperature));
  }
  return out;
}

void check_text_value(const std::string& key, const std::string& value) {
  if (value.find_first_of("\r\n") != std::string::npos || value != trim(value)) {
    fail(ArchiveErrc::bad_header, "manifest value for '" + key + "' must be a single trimmed line");
  }
}

// Applies one header entry; rejects unknown and repeated keys.
void apply_entry(ArchiveManifest& m, std::map<std::string, bool>& seen, const std::string& key,
                 const std::string& value) {
  if (seen[key]) fail(ArchiveErrc::bad_header, "duplicate manifest key '" + key + "'");
  seen[key] = true;
  try {
    if (key == "class_count") {
      m.class_count = parse_size(value, key);
    } else if (key == "member_count") {
      m.member_count = parse_size(value, key);
    } else if (key == "sample_count") {
      m.sample_count = parse_size(value, key);
    } else if (key == "split") {
      m.split = value;
    } else if (key == "creator") {
      m.creator = value;
    } else if (key == "prescaled_temperature") {
      m.prescaled_temperature = parse_double(value);
    } else {
      fail(ArchiveErrc::bad_header, "unknown manifest key '" + key + "'");
    }
  } catch (const InputError& e) {
    fail(ArchiveErrc::bad_header, "manifest key '" + key + "': " + e.what());
  }
}

void require_counts(const std::map<std::string, bool>& seen) {
  for (const char* key : {"class_count", "member_count", "sample_count"}) {
    if (!seen.count(key)) fail(ArchiveErrc::bad_header, std::string("missing manifest key '") + key + "'");
  }
}

// ---- binary ---------------------------------------------------------------

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  bool at_end() const { return pos_ == data_.size(); }

  std::string line() {
    const auto nl = data_.find('\n', pos_);
    if (nl == std::string::npos) fail(ArchiveErrc::truncated, "archive header is truncated");
    std::string out = data_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return out;
  }

  std::uint64_t u64() { return read(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t read(std::size_t bytes) {
    if (remaining() < bytes) fail(ArchiveErrc::truncated, "archive is truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }

  std::string data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ArchiveErrc::io_error, "cannot open archive " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ArchiveErrc::io_error, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ArchiveErrc::io_error, "write failed: " + path.string());
}

std::string encode_binary(const LogitArchive& a) {
  std::string buf(kMagic);
  buf += '\n';
  for (const auto& [k, v] : manifest_entries(a.manifest)) buf += k + " = " + v + "\n";
  buf += "end\n";
  const std::uint64_t n = a.manifest.sample_count;
  put_u32(buf, kTableMagic);
  put_u32(buf, kLabelsTable);
  put_u64(buf, 0);
  put_u64(buf, n);
  put_u64(buf, 1);
  for (int y : a.labels) put_u64(buf, static_cast<std::uint64_t>(static_cast<std::int64_t>(y)));
  for (std::size_t m = 0; m < a.members.size(); ++m) {
    put_u32(buf, kTableMagic);
    put_u32(buf, kMemberTable);
    put_u64(buf, m);
    put_u64(buf, a.members[m].rows());
    put_u64(buf, a.members[m].cols());
    for (double v : a.members[m].data()) put_u64(buf, std::bit_cast<std::uint64_t>(v));
  }
  return buf;
}

LogitArchive decode_binary(std::string bytes) {
  Reader rd(std::move(bytes));
  if (rd.line() != kMagic) fail(ArchiveErrc::bad_header, "not a CEDLGA 1 archive");
  LogitArchive a;
  std::map<std::string, bool> seen;
  while (true) {
    const std::string line = rd.line();
    if (line == "end") break;
    const auto kv = parse_key_value(line);
    if (!kv) fail(ArchiveErrc::bad_header, "malformed header line '" + line + "'");
    apply_entry(a.manifest, seen, kv->first, kv->second);
  }
  require_counts(seen);

  bool have_labels = false;
  std::map<std::uint64_t, Matrix> members;
  while (!rd.at_end()) {
    if (rd.u32() != kTableMagic) fail(ArchiveErrc::bad_table, "bad table marker");
    const std::uint32_t kind = rd.u32();
    const std::uint64_t index = rd.u64();
    const std::uint64_t rows = rd.u64();
    const std::uint64_t cols = rd.u64();
    if (cols != 0 && rows > rd.remaining() / 8 / cols) {
      fail(ArchiveErrc::truncated, "archive is truncated inside a table");
    }
    if (kind == kLabelsTable) {
      if (have_labels) fail(ArchiveErrc::bad_table, "duplicate labels table");
      if (cols != 1) fail(ArchiveErrc::bad_table, "labels table must have one column");
      have_labels = true;
      for (std::uint64_t i = 0; i < rows; ++i) {
        const auto v = static_cast<std::int64_t>(rd.u64());
        if (v < -1 || v >= static_cast<std::int64_t>(a.manifest.class_count)) {
          fail(ArchiveErrc::label_out_of_range,
               "label " + std::to_string(v) + " at row " + std::to_string(i) + " is out of range");
        }
        a.labels.push_back(static_cast<int>(v));
      }
    } else if (kind == kMemberTable) {
      if (members.count(index)) {
        fail(ArchiveErrc::bad_table, "duplicate member table " + std::to_string(index));
      }
      Matrix t(rows, cols);
      for (double& v : t.data()) v = std::bit_cast<double>(rd.u64());
      members.emplace(index, std::move(t));
    } else {
      fail(ArchiveErrc::bad_table, "unknown table kind " + std::to_string(kind));
    }
  }
  if (!have_labels) fail(ArchiveErrc::bad_table, "archive has no labels table");
  std::uint64_t expect = 0;
  for (auto& [index, t] : members) {
    if (index != expect++) fail(ArchiveErrc::bad_table, "member tables are not numbered 0..M-1");
    a.members.push_back(std::move(t));
  }
  a.validate();
  return a;
}

// ---- csv ------------------------------------------------------------------

std::string encode_csv(const LogitArchive& a) {
  std::string out;
  for (const auto& [k, v] : manifest_entries(a.manifest)) out += "# " + k + " = " + v + "\n";
  out += "label";
  for (std::size_t m = 0; m < a.members.size(); ++m) {
    for (std::size_t c = 0; c < a.manifest.class_count; ++c) {
      out += ",m" + std::to_string(m) + "_c" + std::to_string(c);
    }
  }
  out += '\n';
  for (std::size_t i = 0; i < a.manifest.sample_count; ++i) {
    out += std::to_string(a.labels[i]);
    for (const auto& m : a.members) {
      for (double v : m.row(i)) out += "," + format_double(v);
    }
    out += '\n';
  }
  return out;
}

// "m<member>_c<class>" -> (member, class)
std::pair<std::size_t, std::size_t> parse_column(const std::string& name) {
  const auto us = name.find("_c");
  if (name.size() < 4 || name[0] != 'm' || us == std::string::npos) {
    fail(ArchiveErrc::bad_table, "unexpected column '" + name + "'");
  }
  try {
    return {parse_size(name.substr(1, us - 1)), parse_size(name.substr(us + 2))};
  } catch (const InputError&) {
    fail(ArchiveErrc::bad_table, "unexpected column '" + name + "'");
  }
}

LogitArchive decode_csv(const std::string& text) {
  LogitArchive a;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto kv = parse_key_value(std::string_view(line).substr(1));
      if (!kv) fail(ArchiveErrc::bad_header, "malformed header line '" + line + "'");
      apply_entry(a.manifest, seen, kv->first, kv->second);
      continue;
    }
    header = split_csv(line);
    break;
  }
  require_counts(seen);
  if (header.empty() || header.front() != "label") {
    fail(ArchiveErrc::bad_header, "CSV archive header row must start with 'label'");
  }
  // Columns must be grouped by member, classes in order.
  std::size_t member_cols = 0, max_member = 0, max_class = 0;
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto [m, c] = parse_column(header[j]);
    max_member = std::max(max_member, m + 1);
    max_class = std::max(max_class, c + 1);
    ++member_cols;
  }
  const std::size_t classes = max_class;
  const std::size_t found_members = member_cols == 0 ? 0 : max_member;
  if (classes != a.manifest.class_count && member_cols > 0) {
    fail(ArchiveErrc::class_count_mismatch,
         "class count mismatch: columns cover " + std::to_string(classes) +
             " classes, manifest says " + std::to_string(a.manifest.class_count));
  }
  if (found_members != a.manifest.member_count) {
    fail(ArchiveErrc::member_count_mismatch,
         "member count mismatch: manifest says " + std::to_string(a.manifest.member_count) +
             ", found " + std::to_string(found_members) + " member column groups");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto [m, c] = parse_column(header[j]);
    if (m * classes + c != j - 1) {
      fail(ArchiveErrc::bad_table, "column '" + header[j] + "' is out of order");
    }
  }
  if (member_cols != found_members * classes) {
    fail(ArchiveErrc::bad_table, "member columns do not form a full M x C grid");
  }

  std::vector<std::vector<double>> tables(found_members);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      fail(ArchiveErrc::truncated, "line " + std::to_string(line_no) + " has " +
                                       std::to_string(fields.size()) + " fields, expected " +
                                       std::to_string(header.size()));
    }
    try {
      a.labels.push_back(parse_int(fields[0]));
      for (std::size_t j = 1; j < fields.size(); ++j) {
        tables[(j - 1) / classes].push_back(parse_double(fields[j]));
      }
    } catch (const InputError& e) {
      fail(ArchiveErrc::bad_table, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  const std::size_t rows = a.labels.size();
  for (auto& t : tables) a.members.emplace_back(rows, classes, std::move(t));
  a.validate();
  return a;
}

}  // namespace

void write_archive(const LogitArchive& archive, const std::filesystem::path& path) {
  archive.validate();
  for (const auto& [k, v] : manifest_entries(archive.manifest)) check_text_value(k, v);
  write_file(path, is_csv_path(path) ? encode_csv(archive) : encode_binary(archive));
}

LogitArchive read_archive(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  return is_csv_path(path) ? decode_csv(bytes) : decode_binary(std::move(bytes));
}

}  // namespace ced
