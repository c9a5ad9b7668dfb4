// Seeded generators for the synthetic benchmark distributions: random
// Gaussian mixtures (with mode dropping), Neal's funnel, noisy cosine time
// series, and perturbations (scale, plane rotation, additive noise).

#ifndef PQMASS_SYNTH_HPP_
#define PQMASS_SYNTH_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pqmass/core.hpp"
#include "pqmass/tessellation.hpp"

namespace pqmass {

struct GmmComponent {
  double weight = 0.0;  // normalized over active components; 0 when inactive
  bool active = true;
  Eigen::VectorXd mean;
  // Orthonormal eigenvectors (columns). An empty matrix means the identity.
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd eigenvalues;  // positive
};

struct GmmSpec {
  std::size_t dim = 0;
  std::vector<GmmComponent> components;

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count_if(components.begin(), components.end(),
                                                   [](const auto& c) { return c.active; }));
  }

  // Sigma = V diag(lambda) V^T.
  Eigen::MatrixXd covariance(std::size_t c) const {
    const auto& comp = components[c];
    if (comp.eigenvectors.size() == 0) return comp.eigenvalues.asDiagonal();
    return comp.eigenvectors * comp.eigenvalues.asDiagonal() * comp.eigenvectors.transpose();
  }
};

// Haar-distributed orthonormal basis: QR of a standard Gaussian matrix with
// the signs of R's diagonal folded into Q.
inline Eigen::MatrixXd random_orthonormal(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

// Means ~ U(-10, 10) per coordinate, eigenvalues 10^U(-1, 1), random
// eigenvector basis, weights proportional to 10^U(-1, 1).
inline GmmSpec gmm_make(std::size_t dim, std::size_t n_components, Rng& rng) {
  if (dim < 1) throw ConfigError("GMM dimension must be >= 1");
  if (n_components < 1) throw ConfigError("GMM needs at least one component");
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> log_range(-1.0, 1.0);
  GmmSpec spec;
  spec.dim = dim;
  spec.components.resize(n_components);
  double total = 0.0;
  for (auto& c : spec.components) {
    c.mean.resize(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < c.mean.size(); ++i) c.mean(i) = coord(rng);
    c.eigenvalues.resize(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < c.eigenvalues.size(); ++i) {
      c.eigenvalues(i) = std::pow(10.0, log_range(rng));
    }
    c.eigenvectors = random_orthonormal(dim, rng);
    c.weight = std::pow(10.0, log_range(rng));
    total += c.weight;
  }
  for (auto& c : spec.components) c.weight /= total;
  return spec;
}

// Equally weighted unit-variance spherical components with means ~ U(-10, 10).
inline GmmSpec gmm_make_spherical(std::size_t dim, std::size_t n_components, Rng& rng) {
  if (dim < 1) throw ConfigError("GMM dimension must be >= 1");
  if (n_components < 1) throw ConfigError("GMM needs at least one component");
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  GmmSpec spec;
  spec.dim = dim;
  spec.components.resize(n_components);
  for (auto& c : spec.components) {
    c.mean.resize(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < c.mean.size(); ++i) c.mean(i) = coord(rng);
    c.eigenvalues = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
    c.weight = 1.0 / static_cast<double>(n_components);
  }
  return spec;
}

inline SampleSet gmm_sample(const GmmSpec& spec, std::size_t n, Rng& rng) {
  if (spec.active_count() == 0) throw ConfigError("GMM has no active components");
  const std::size_t dim = spec.dim;
  std::vector<double> weights;
  weights.reserve(spec.components.size());
  for (const auto& c : spec.components) weights.push_back(c.active ? c.weight : 0.0);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;

  // Per-component factor V diag(sqrt(lambda)).
  std::vector<Eigen::MatrixXd> factors(spec.components.size());
  std::vector<Eigen::VectorXd> scales(spec.components.size());
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    const auto& c = spec.components[k];
    scales[k] = c.eigenvalues.cwiseSqrt();
    if (c.eigenvectors.size() != 0) factors[k] = c.eigenvectors * scales[k].asDiagonal();
  }

  std::vector<double> data(n * dim);
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = pick(rng);
    for (Eigen::Index d = 0; d < z.size(); ++d) z(d) = normal(rng);
    Eigen::Map<Eigen::VectorXd> out(data.data() + i * dim, static_cast<Eigen::Index>(dim));
    if (factors[k].size() != 0) {
      out.noalias() = spec.components[k].mean + factors[k] * z;
    } else {
      out = spec.components[k].mean + scales[k].cwiseProduct(z);
    }
  }
  return SampleSet::vectors(std::move(data), dim);
}

// Deactivates n_drop uniformly chosen active components and renormalizes.
inline GmmSpec gmm_drop_modes(const GmmSpec& spec, std::size_t n_drop, Rng& rng) {
  const std::size_t active = spec.active_count();
  if (n_drop >= active) {
    throw ConfigError("cannot drop " + std::to_string(n_drop) + " of " + std::to_string(active) +
                      " active modes");
  }
  if (n_drop == 0) return spec;
  std::vector<std::size_t> active_ids;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    if (spec.components[k].active) active_ids.push_back(k);
  }
  GmmSpec out = spec;
  for (std::size_t pos : sample_without_replacement(active_ids.size(), n_drop, rng)) {
    auto& c = out.components[active_ids[pos]];
    c.active = false;
    c.weight = 0.0;
  }
  double total = 0.0;
  for (const auto& c : out.components) total += c.weight;
  for (auto& c : out.components) c.weight /= total;
  return out;
}

// Neal's funnel: v ~ N(0, 3^2), remaining coordinates ~ N(0, e^v) given v.
inline SampleSet funnel_sample(std::size_t dim, std::size_t n, Rng& rng) {
  if (dim < 2) throw ConfigError("funnel dimension must be >= 2");
  std::normal_distribution<double> normal;
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = data.data() + i * dim;
    const double v = 3.0 * normal(rng);
    row[0] = v;
    const double sd = std::exp(0.5 * v);
    for (std::size_t d = 1; d < dim; ++d) row[d] = sd * normal(rng);
  }
  return SampleSet::vectors(std::move(data), dim);
}

inline constexpr std::size_t kTimeSeriesLength = 100;

// Time grid t_k = 10 k / 99, k = 0..99 (inclusive endpoints).
inline double timeseries_time(std::size_t k) {
  return 10.0 * static_cast<double>(k) / static_cast<double>(kTimeSeriesLength - 1);
}

// Each series: y_k = A cos(t_k) + eta_k with standard normal noise.
inline SampleSet timeseries_sample(double amplitude, std::size_t n_series, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> signal(kTimeSeriesLength);
  for (std::size_t k = 0; k < kTimeSeriesLength; ++k) {
    signal[k] = amplitude * std::cos(timeseries_time(k));
  }
  std::vector<double> data(n_series * kTimeSeriesLength);
  for (std::size_t i = 0; i < n_series; ++i) {
    for (std::size_t k = 0; k < kTimeSeriesLength; ++k) {
      data[i * kTimeSeriesLength + k] = signal[k] + normal(rng);
    }
  }
  return SampleSet::vectors(std::move(data), kTimeSeriesLength);
}

struct Scale {
  double factor = 1.0;
};
struct Rotate {
  double angle = 0.0;
  std::uint64_t axis_seed = 0;
};
struct AddGaussianNoise {
  double variance = 0.0;
};
using Perturbation = std::variant<Scale, Rotate, AddGaussianNoise>;

// Orthonormal pair spanning the rotation plane for a given axis seed.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> rotation_plane(std::size_t dim,
                                                                  std::uint64_t axis_seed) {
  if (dim < 2) throw ConfigError("rotation needs dim >= 2");
  Rng rng = seeded_rng(axis_seed, kSynthStream, 0);
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd u(d), w(d);
  for (Eigen::Index i = 0; i < d; ++i) u(i) = normal(rng);
  for (Eigen::Index i = 0; i < d; ++i) w(i) = normal(rng);
  u.normalize();
  w -= w.dot(u) * u;
  w.normalize();
  return {u, w};
}

inline SampleSet perturb(const SampleSet& x, const Perturbation& kind, Rng& rng) {
  if (x.modality() != Modality::Vector) throw ConfigError("perturbations need vector samples");
  const std::size_t dim = x.dim();
  std::vector<double> data(x.data().begin(), x.data().end());
  if (const auto* s = std::get_if<Scale>(&kind)) {
    for (double& v : data) v *= s->factor;
  } else if (const auto* r = std::get_if<Rotate>(&kind)) {
    const auto [u, w] = rotation_plane(dim, r->axis_seed);
    const double c = std::cos(r->angle) - 1.0;
    const double s = std::sin(r->angle);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Eigen::Map<Eigen::VectorXd> p(data.data() + i * dim, static_cast<Eigen::Index>(dim));
      const double a = p.dot(u);
      const double b = p.dot(w);
      p += (c * a - s * b) * u + (c * b + s * a) * w;
    }
  } else {
    const auto& noise = std::get<AddGaussianNoise>(kind);
    if (noise.variance < 0.0) throw ConfigError("noise variance must be >= 0");
    std::normal_distribution<double> normal(0.0, std::sqrt(noise.variance));
    for (double& v : data) v += normal(rng);
  }
  return SampleSet::vectors(std::move(data), dim);
}

}  // namespace pqmass

#endif  // PQMASS_SYNTH_HPP_
