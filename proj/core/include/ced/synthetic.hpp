#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ced/dataset.hpp"

namespace ced {

enum class SyntheticKind { gaussians, two_moons, ood_cluster };

std::string_view to_string(SyntheticKind k);
SyntheticKind parse_synthetic_kind(std::string_view s);

struct SyntheticParams {
  SyntheticKind kind = SyntheticKind::gaussians;
  std::size_t classes = 3;
  std::size_t samples = 1000;
  double sigma = 1.0;        // per-class isotropic standard deviation
  double separation = 6.0;   // distance between neighbouring class means, in sigmas
  double noise = 0.1;        // two_moons only
  double ood_distance = 6.0; // ood_cluster only, in sigmas
  std::uint64_t seed = 0;

  void validate() const;
};

/// Class means of the gaussians mixture: evenly spaced on a circle around the
/// origin so neighbouring means are `separation * sigma` apart.
Matrix gaussian_means(const SyntheticParams& p);

/// Centre of the OOD cluster: `ood_distance * sigma` from the class-0 mean
/// along the ray towards the mixture centre (the origin). At distance 0 the
/// cluster coincides with class 0; when the distance equals the circle radius
/// it sits at the centre, equally far from every class.
std::vector<double> ood_center(const SyntheticParams& p);

/// gaussians: balanced labels (row i has class i mod C).
/// two_moons: two interleaved half circles, C must be 2.
/// ood_cluster: unlabeled rows (label -1) from N(ood_center, sigma^2 I).
Dataset gen_synthetic(const SyntheticParams& p);

}  // namespace ced
