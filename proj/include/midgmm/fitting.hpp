// midgmm/fitting.hpp
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
// Diagonal-covariance EM fitting of Gaussian mixtures from labeled point
// clouds, plus a deterministic generator of synthetic attribute spaces with
// well-separated clusters arranged on two control axes.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "midgmm/sampling.hpp"
#include "midgmm/types.hpp"

namespace midgmm {

template <typename Scalar>
struct LabeledEmbeddings {
  std::string label;
  Matrix<Scalar> points;  // n x D, one point per row
};

struct FitConfig {
  Index components = 1;       // K
  Index max_iters = 200;
  double tol = 1e-7;          // relative NLL change
  std::uint64_t seed = 0;
  double stddev_floor = 1e-4;
};

namespace detail {

inline void check_fit_config(const FitConfig& config) {
  if (config.components < 1 || config.max_iters < 1 || !(config.tol > 0) ||
      !(config.stddev_floor > 0))
    fail(Errc::invalid_argument, "fit configuration fields must be positive");
}

// k-means++ style seeding: the first center is uniform over the points,
// each next is drawn proportionally to squared distance from the chosen set.
template <typename Scalar>
std::vector<Index> seed_centers(const Matrix<Scalar>& points, Index k,
                                MixtureSampler<Scalar>& sampler) {
  const Index n = points.rows();
  std::vector<Index> centers;
  centers.push_back(
      std::min<Index>(n - 1, static_cast<Index>(sampler.next_uniform() * n)));
  Vector<Scalar> best_d2 =
      (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<Index>(centers.size()) < k) {
    const Scalar total = best_d2.sum();
    Index chosen;
    if (total > Scalar(0)) {
      const Scalar target = sampler.next_uniform() * total;
      Scalar cumulative = Scalar(0);
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        cumulative += best_d2(i);
        if (target < cumulative) {
          chosen = i;
          break;
        }
      }
    } else {
      // all remaining points coincide with a center; spread deterministically
      chosen = (centers.back() + 1) % n;
    }
    centers.push_back(chosen);
    best_d2 = best_d2.cwiseMin(
        (points.rowwise() - points.row(chosen)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace detail

/// Fits a K-component diagonal GMM by EM. When `nll_trace` is given it
/// receives the total negative log-likelihood at the start of every
/// iteration (a non-increasing sequence up to numerical slack).
template <typename Scalar>
GaussianMixture<Scalar> fit_em(const LabeledEmbeddings<Scalar>& data,
                               const FitConfig& config,
                               std::vector<Scalar>* nll_trace = nullptr) {
  detail::check_fit_config(config);
  const Matrix<Scalar>& points = data.points;
  const Index n = points.rows();
  const Index dim = points.cols();
  const Index k_count = config.components;
  if (n == 0 || dim == 0)
    fail(Errc::validation_error,
         "dataset '" + data.label + "' has no points");
  if (n < k_count)
    fail(Errc::too_few_points, "dataset '" + data.label + "' has " +
                                   std::to_string(n) + " points for " +
                                   std::to_string(k_count) + " components");

  const Scalar floor = Scalar(config.stddev_floor);
  MixtureSampler<Scalar> sampler(config.seed);

  Matrix<Scalar> means(k_count, dim);
  const auto centers = detail::seed_centers(points, k_count, sampler);
  for (Index k = 0; k < k_count; ++k)
    means.row(k) = points.row(centers[static_cast<std::size_t>(k)]);

  const auto data_mean = points.colwise().mean().eval();
  Vector<Scalar> data_std =
      ((points.rowwise() - data_mean).array().square().colwise().sum() /
       Scalar(n))
          .sqrt()
          .matrix()
          .transpose();
  Matrix<Scalar> stddevs(k_count, dim);
  stddevs.rowwise() = data_std.cwiseMax(floor).transpose();
  Vector<Scalar> weights =
      Vector<Scalar>::Constant(k_count, Scalar(1) / Scalar(k_count));

  const Scalar log_two_pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  Matrix<Scalar> log_terms(n, k_count);
  Scalar previous_nll = std::numeric_limits<Scalar>::infinity();

  for (Index iter = 0; iter < config.max_iters; ++iter) {
    for (Index k = 0; k < k_count; ++k) {
      const auto standardized =
          ((points.rowwise() - means.row(k)).array().rowwise() /
           stddevs.row(k).array());
      log_terms.col(k) =
          (standardized.square().rowwise().sum() * Scalar(-0.5) +
           (std::log(weights(k)) - Scalar(0.5) * Scalar(dim) * log_two_pi -
            stddevs.row(k).array().log().sum()))
              .matrix();
    }
    const Vector<Scalar> row_max = log_terms.rowwise().maxCoeff();
    const Vector<Scalar> lse =
        row_max.array() +
        (log_terms.colwise() - row_max).array().exp().rowwise().sum().log();
    const Scalar nll = -lse.sum();
    if (nll_trace != nullptr) nll_trace->push_back(nll);
    if (std::isfinite(double(previous_nll)) &&
        std::abs(double(previous_nll - nll)) <=
            config.tol * std::max(1.0, std::abs(double(previous_nll))))
      break;
    previous_nll = nll;

    Matrix<Scalar> resp =
        (log_terms.colwise() - lse).array().exp().matrix();
    for (Index k = 0; k < k_count; ++k) {
      const Scalar occupancy = resp.col(k).sum();
      if (occupancy < Scalar(1e-10))
        fail(Errc::degenerate_component,
             "component " + std::to_string(k) +
                 " collapsed to zero occupancy");
      weights(k) = occupancy / Scalar(n);
      means.row(k) = (resp.col(k).transpose() * points) / occupancy;
      const auto centered = (points.rowwise() - means.row(k)).array();
      stddevs.row(k) =
          ((centered.square().colwise() * resp.col(k).array()).colwise().sum() /
           occupancy)
              .sqrt()
              .matrix()
              .cwiseMax(floor);
    }
  }

  std::vector<MixtureComponent<Scalar>> components;
  components.reserve(static_cast<std::size_t>(k_count));
  for (Index k = 0; k < k_count; ++k)
    components.push_back(
        {weights(k), DiagonalGaussian<Scalar>(means.row(k).transpose(),
                                              stddevs.row(k).transpose())});
  return GaussianMixture<Scalar>(std::move(components));
}

/// Fits one mixture per dataset, preserving input order.
template <typename Scalar>
AttributeSpace<Scalar> fit_space(
    const std::vector<LabeledEmbeddings<Scalar>>& datasets,
    const FitConfig& config) {
  if (datasets.empty())
    fail(Errc::validation_error, "need at least one dataset");
  std::vector<std::string> labels;
  std::vector<GaussianMixture<Scalar>> mixtures;
  for (const auto& dataset : datasets) {
    labels.push_back(dataset.label);
    mixtures.push_back(fit_em(dataset, config));
  }
  return AttributeSpace<Scalar>(std::move(labels), std::move(mixtures));
}

template <typename Scalar>
struct SyntheticData {
  AttributeSpace<Scalar> space;                      // ground truth
  std::vector<LabeledEmbeddings<Scalar>> points;     // one entry per label
  std::vector<std::vector<Index>> point_components;  // generating component
};

/// Generates L ground-truth mixtures with attribute centroids on a two-axis
/// grid and components spaced at least ten standard deviations apart, then
/// samples labeled points from each. Deterministic in `seed`.
template <typename Scalar>
SyntheticData<Scalar> make_synthetic_space(Index dimension, Index attributes,
                                           Index components_per_attribute,
                                           Index points_per_attribute,
                                           std::uint64_t seed) {
  if (dimension < 1 || attributes < 1 || components_per_attribute < 1)
    fail(Errc::invalid_argument, "dimension, attributes and components must be >= 1");
  if (points_per_attribute < 10 * components_per_attribute)
    fail(Errc::too_few_points,
         "need at least 10 points per component, got " +
             std::to_string(points_per_attribute) + " for " +
             std::to_string(components_per_attribute) + " components");

  const Index k_count = components_per_attribute;
  MixtureSampler<Scalar> rng(seed);

  // Attribute centroids: a 2-column grid over dims (0, 1) when D >= 2,
  // a line over dim 0 otherwise.
  const bool planar = dimension >= 2;
  const Index grid_rows = (attributes + 1) / 2;
  const Scalar line_cell =
      attributes > 1 ? Scalar(20) / Scalar(attributes - 1) : Scalar(20);
  const Scalar gap = planar ? Scalar(4) : line_cell / Scalar(k_count + 1);

  std::vector<std::string> labels;
  std::vector<GaussianMixture<Scalar>> mixtures;
  std::vector<LabeledEmbeddings<Scalar>> point_sets;
  std::vector<std::vector<Index>> point_components;

  for (Index l = 0; l < attributes; ++l) {
    Vector<Scalar> centroid = Vector<Scalar>::Zero(dimension);
    if (planar) {
      const Index col = l % 2;
      const Index row = l / 2;
      centroid(0) = col == 0 ? Scalar(-8) : Scalar(8);
      centroid(1) = grid_rows > 1
                        ? Scalar(16) * Scalar(row) - Scalar(8) * Scalar(grid_rows - 1)
                        : Scalar(0);
      labels.push_back("attr_" + std::to_string(row) + std::to_string(col));
    } else {
      centroid(0) = attributes > 1 ? Scalar(-10) + Scalar(l) * line_cell
                                   : Scalar(0);
      labels.push_back("attr_" + std::to_string(l));
    }

    const Index offset_axis = planar ? (l % 2) : 0;
    Vector<Scalar> raw_weights(k_count);
    std::vector<MixtureComponent<Scalar>> comps;
    for (Index k = 0; k < k_count; ++k) {
      Vector<Scalar> mean = centroid;
      mean(offset_axis) +=
          gap * (Scalar(k) - Scalar(k_count - 1) / Scalar(2));
      for (Index d = 0; d < dimension; ++d) {
        if (d == 0 || d == 1 || !planar) continue;
        mean(d) = (rng.next_uniform() * Scalar(2) - Scalar(1));
      }
      Vector<Scalar> stddev(dimension);
      for (Index d = 0; d < dimension; ++d)
        stddev(d) = gap / Scalar(20) * (Scalar(1) + rng.next_uniform());
      raw_weights(k) = Scalar(1) + rng.next_uniform() / Scalar(2);
      comps.push_back({raw_weights(k),
                       DiagonalGaussian<Scalar>(std::move(mean),
                                                std::move(stddev))});
    }
    const Scalar weight_sum = raw_weights.sum();
    for (auto& c : comps) c.weight /= weight_sum;
    mixtures.emplace_back(std::move(comps));

    SamplerConfig sample_config;
    sample_config.seed = seed ^ (0x9e3779b97f4a7c15ULL * (std::uint64_t(l) + 1));
    sample_config.count = points_per_attribute;
    SampleSet<Scalar> drawn = sample(mixtures.back(), sample_config);
    point_sets.push_back({labels.back(), std::move(drawn.values)});
    point_components.push_back(std::move(drawn.components));
  }

  return {AttributeSpace<Scalar>(std::move(labels), std::move(mixtures)),
          std::move(point_sets), std::move(point_components)};
}

}  // namespace midgmm
