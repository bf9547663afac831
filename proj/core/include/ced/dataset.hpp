#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ced/types.hpp"

namespace ced {

/// Feature rows with integer labels; label -1 marks an unlabeled (OOD) row.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  bool labeled() const;
  void validate() const;
};

/// CSV with a `# class_count = C` comment line, a header `x0,...,x{D-1},label`
/// and one row per sample. Reals are written with 17 significant digits.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace ced
