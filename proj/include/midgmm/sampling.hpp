// midgmm/sampling.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Seedable sampling from Gaussian mixtures and stable density evaluation.
// The random stream is fully pinned: uniforms are the top 53 bits of
// std::mt19937_64 output, Gaussians come from the Box-Muller transform
// (sine variate cached), and components are chosen by inverting the weight
// CDF. A seed therefore determines the output exactly.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "midgmm/types.hpp"

namespace midgmm {

struct SamplerConfig {
  std::uint64_t seed = 0;
  Index count = 1;  // must be >= 1
};

template <typename Scalar>
class MixtureSampler {
  static_assert(std::is_floating_point_v<Scalar>);

 public:
  explicit MixtureSampler(std::uint64_t seed) : rng_(seed) {}

  /// Uniform draw in [0, 1) with 53-bit resolution.
  Scalar next_uniform() {
    return Scalar(rng_() >> 11) * Scalar(0x1.0p-53);
  }

  /// Standard normal draw via Box-Muller.
  Scalar next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const Scalar u1 = next_uniform();
    const Scalar u2 = next_uniform();
    const Scalar radius = std::sqrt(Scalar(-2) * std::log(Scalar(1) - u1));
    const Scalar angle = Scalar(2) * std::numbers::pi_v<Scalar> * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// One draw from the mixture; reports the chosen component if requested.
  Vector<Scalar> draw(const GaussianMixture<Scalar>& mixture,
                      Index* component = nullptr) {
    const Scalar u = next_uniform();
    Index chosen = mixture.component_count() - 1;
    Scalar cumulative = Scalar(0);
    for (Index k = 0; k < mixture.component_count(); ++k) {
      cumulative += mixture.component(k).weight;
      if (u < cumulative) {
        chosen = k;
        break;
      }
    }
    const auto& gaussian = mixture.component(chosen).gaussian;
    Vector<Scalar> value(gaussian.dimension());
    for (Index d = 0; d < gaussian.dimension(); ++d)
      value(d) = gaussian.mean()(d) + gaussian.stddev()(d) * next_normal();
    if (component != nullptr) *component = chosen;
    return value;
  }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  Scalar spare_ = Scalar(0);
};

template <typename Scalar>
struct SampleSet {
  Matrix<Scalar> values;          // count x D, one sample per row
  std::vector<Index> components;  // chosen component per sample
};

template <typename Scalar>
SampleSet<Scalar> sample(const GaussianMixture<Scalar>& mixture,
                         const SamplerConfig& config) {
  if (config.count < 1)
    fail(Errc::invalid_argument, "sample count must be >= 1");
  MixtureSampler<Scalar> sampler(config.seed);
  SampleSet<Scalar> out;
  out.values.resize(config.count, mixture.dimension());
  out.components.resize(static_cast<std::size_t>(config.count));
  for (Index i = 0; i < config.count; ++i) {
    Index component = 0;
    out.values.row(i) = sampler.draw(mixture, &component).transpose();
    out.components[static_cast<std::size_t>(i)] = component;
  }
  return out;
}

/// Log density of one component at `point`, without the weight.
template <typename Scalar, typename Derived>
Scalar gaussian_log_density(const DiagonalGaussian<Scalar>& gaussian,
                            const Eigen::MatrixBase<Derived>& point) {
  if (point.size() != gaussian.dimension())
    fail(Errc::dimension_mismatch,
         "point has length " + std::to_string(point.size()) + ", expected " +
             std::to_string(gaussian.dimension()));
  const Scalar d = Scalar(gaussian.dimension());
  const Scalar log_two_pi =
      std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const auto standardized =
      ((point.derived().template cast<Scalar>() - gaussian.mean()).array() /
       gaussian.stddev().array())
          .matrix();
  return Scalar(-0.5) * d * log_two_pi -
         gaussian.stddev().array().log().sum() -
         Scalar(0.5) * standardized.squaredNorm();
}

/// log sum_k alpha_k N(point; mu_k, diag sigma_k^2), log-sum-exp stabilized.
template <typename Scalar, typename Derived>
Scalar log_density(const GaussianMixture<Scalar>& mixture,
                   const Eigen::MatrixBase<Derived>& point) {
  Scalar max_term = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> terms;
  terms.reserve(static_cast<std::size_t>(mixture.component_count()));
  for (Index k = 0; k < mixture.component_count(); ++k) {
    const auto& component = mixture.component(k);
    if (component.weight == Scalar(0)) continue;
    const Scalar term = std::log(component.weight) +
                        gaussian_log_density(component.gaussian, point);
    terms.push_back(term);
    max_term = std::max(max_term, term);
  }
  Scalar accum = Scalar(0);
  for (Scalar term : terms) accum += std::exp(term - max_term);
  return max_term + std::log(accum);
}

/// Total negative log-likelihood of `points` (one point per row).
template <typename Scalar>
Scalar negative_log_likelihood(const GaussianMixture<Scalar>& mixture,
                               const Matrix<Scalar>& points) {
  if (points.rows() == 0)
    fail(Errc::empty_sample_set, "need at least one sample");
  if (points.cols() != mixture.dimension())
    fail(Errc::dimension_mismatch,
         "points have dimension " + std::to_string(points.cols()) +
             ", expected " + std::to_string(mixture.dimension()));
  Scalar total = Scalar(0);
  for (Index i = 0; i < points.rows(); ++i)
    total += log_density(mixture, points.row(i).transpose());
  return -total;
}

}  // namespace midgmm
