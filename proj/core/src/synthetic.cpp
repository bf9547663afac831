#include "ced/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace ced {

std::string_view to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::gaussians: return "gaussians";
    case SyntheticKind::two_moons: return "two_moons";
    case SyntheticKind::ood_cluster: return "ood_cluster";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "gaussians") return SyntheticKind::gaussians;
  if (s == "two_moons") return SyntheticKind::two_moons;
  if (s == "ood_cluster") return SyntheticKind::ood_cluster;
  throw InputError("unknown dataset kind '" + std::string(s) +
                   "' (expected gaussians|two_moons|ood_cluster)");
}

void SyntheticParams::validate() const {
  if (classes < 2) throw InputError("synthetic: classes must be >= 2");
  if (samples == 0) throw InputError("synthetic: samples must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("synthetic: sigma must be > 0");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw InputError("synthetic: separation must be >= 0");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InputError("synthetic: noise must be >= 0");
  if (!(ood_distance >= 0.0) || !std::isfinite(ood_distance)) {
    throw InputError("synthetic: ood_distance must be >= 0");
  }
  if (kind == SyntheticKind::two_moons && classes != 2) {
    throw InputError("synthetic: two_moons has exactly 2 classes");
  }
}

Matrix gaussian_means(const SyntheticParams& p) {
  p.validate();
  const double pi = std::numbers::pi;
  const double c = static_cast<double>(p.classes);
  const double radius = p.separation * p.sigma / (2.0 * std::sin(pi / c));
  Matrix means(p.classes, 2);
  for (std::size_t k = 0; k < p.classes; ++k) {
    const double angle = 2.0 * pi * static_cast<double>(k) / c;
    means(k, 0) = radius * std::cos(angle);
    means(k, 1) = radius * std::sin(angle);
  }
  return means;
}

std::vector<double> ood_center(const SyntheticParams& p) {
  const Matrix means = gaussian_means(p);
  // class 0 sits on the positive x axis; with zero radius fall back to +x
  const double radius = means(0, 0);
  const double step = p.ood_distance * p.sigma;
  return {radius > 0.0 ? radius - step : step, 0.0};
}

Dataset gen_synthetic(const SyntheticParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.features = Matrix(p.samples, 2);
  out.labels.assign(p.samples, -1);
  out.class_count = p.classes;

  switch (p.kind) {
    case SyntheticKind::gaussians: {
      const Matrix means = gaussian_means(p);
      for (std::size_t i = 0; i < p.samples; ++i) {
        const std::size_t k = i % p.classes;
        out.labels[i] = static_cast<int>(k);
        out.features(i, 0) = means(k, 0) + p.sigma * normal(rng);
        out.features(i, 1) = means(k, 1) + p.sigma * normal(rng);
      }
      break;
    }
    case SyntheticKind::two_moons: {
      std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
      for (std::size_t i = 0; i < p.samples; ++i) {
        const int k = static_cast<int>(i % 2);
        const double t = angle(rng);
        double x = std::cos(t), y = std::sin(t);
        if (k == 1) {
          x = 1.0 - x;
          y = 0.5 - y;
        }
        if (p.noise > 0.0) {
          x += p.noise * normal(rng);
          y += p.noise * normal(rng);
        }
        out.labels[i] = k;
        out.features(i, 0) = x;
        out.features(i, 1) = y;
      }
      break;
    }
    case SyntheticKind::ood_cluster: {
      const auto centre = ood_center(p);
      for (std::size_t i = 0; i < p.samples; ++i) {
        out.features(i, 0) = centre[0] + p.sigma * normal(rng);
        out.features(i, 1) = centre[1] + p.sigma * normal(rng);
      }
      break;
    }
  }
  return out;
}

}  // namespace ced
