#pragma once

// Logit archives (.lga): M member logit tables plus labels, with a manifest.
//
// Binary layout (little-endian):
//   text header   "CEDLGA 1\n", then "key = value\n" lines, then "end\n"
//   tables        u32 magic "TABL", u32 kind (0 labels, 1 member),
//                 u64 index, u64 rows, u64 cols, then rows*cols values
//                 (i64 for labels, f64 for members)
// A path ending in ".csv" selects the text variant instead:
//   "# key = value" lines, a header "label,m0_c0,...,m{M-1}_c{C-1}",
//   then one row per sample; reals use 17 significant digits.
//
// Manifest keys: class_count, member_count, sample_count, split, creator and
// the optional prescaled_temperature (logits were already divided by it).
// Label -1 marks an unlabeled sample.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ced/types.hpp"

namespace ced {

enum class ArchiveErrc {
  io_error,
  bad_header,
  bad_table,
  member_count_mismatch,
  sample_count_mismatch,
  class_count_mismatch,
  non_finite,
  label_out_of_range,
  truncated,
};

std::string_view to_string(ArchiveErrc e);

class ArchiveError : public std::runtime_error {
 public:
  ArchiveError(ArchiveErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ArchiveErrc code() const { return code_; }

 private:
  ArchiveErrc code_;
};

struct ArchiveManifest {
  std::size_t class_count = 0;
  std::size_t member_count = 0;
  std::size_t sample_count = 0;
  std::string split = "test";
  std::string creator = "ced";
  std::optional<double> prescaled_temperature;

  friend bool operator==(const ArchiveManifest&, const ArchiveManifest&) = default;
};

struct LogitArchive {
  ArchiveManifest manifest;
  std::vector<Matrix> members;  // sample_count x class_count each
  std::vector<int> labels;      // sample_count entries

  /// Throws ArchiveError on the first violated invariant.
  void validate() const;

  /// Member logits with any prescaling undone.
  std::vector<Matrix> raw_members() const;

  friend bool operator==(const LogitArchive&, const LogitArchive&) = default;
};

void write_archive(const LogitArchive& archive, const std::filesystem::path& path);
LogitArchive read_archive(const std::filesystem::path& path);

bool is_csv_path(const std::filesystem::path& path);

}  // namespace ced
