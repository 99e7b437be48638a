// midgmm/wasserstein.hpp
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
// Closed-form squared 2-Wasserstein geometry for diagonal Gaussians.
// For N(mu_a, diag sigma_a^2) and N(mu_b, diag sigma_b^2) the squared
// distance is |mu_a - mu_b|^2 + |sigma_a - sigma_b|^2, and the weighted
// barycenter of L such Gaussians is again diagonal with parameters given
// by the convex combinations of the means and of the stddevs.

#pragma once

#include <span>
#include <string>

#include "midgmm/types.hpp"

namespace midgmm {

/// Squared W2 between diagonal Gaussians given as raw parameter expressions.
template <typename DerivedMa, typename DerivedSa, typename DerivedMb,
          typename DerivedSb>
typename DerivedMa::Scalar w2_squared(const Eigen::MatrixBase<DerivedMa>& mean_a,
                                      const Eigen::MatrixBase<DerivedSa>& stddev_a,
                                      const Eigen::MatrixBase<DerivedMb>& mean_b,
                                      const Eigen::MatrixBase<DerivedSb>& stddev_b) {
  return (mean_a - mean_b).squaredNorm() + (stddev_a - stddev_b).squaredNorm();
}

template <typename Scalar>
Scalar w2_squared(const DiagonalGaussian<Scalar>& a,
                  const DiagonalGaussian<Scalar>& b) {
  if (a.dimension() != b.dimension())
    fail(Errc::dimension_mismatch,
         "w2_squared over dimensions " + std::to_string(a.dimension()) +
             " and " + std::to_string(b.dimension()));
  return w2_squared(a.mean(), a.stddev(), b.mean(), b.stddev());
}

/// Closed-form weighted barycenter of diagonal Gaussians:
/// mean' = sum_l lambda_l mean_l, stddev' = sum_l lambda_l stddev_l.
template <typename Scalar>
DiagonalGaussian<Scalar> gaussian_barycenter(
    std::span<const DiagonalGaussian<Scalar>> sources,
    const InterpolationWeights<Scalar>& lambda) {
  if (static_cast<Index>(sources.size()) != lambda.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(sources.size()) + " sources");
  const Index d = sources.front().dimension();
  Vector<Scalar> mean = Vector<Scalar>::Zero(d);
  Vector<Scalar> stddev = Vector<Scalar>::Zero(d);
  for (Index l = 0; l < lambda.size(); ++l) {
    const auto& g = sources[static_cast<std::size_t>(l)];
    if (g.dimension() != d)
      fail(Errc::dimension_mismatch,
           "source " + std::to_string(l) + " has dimension " +
               std::to_string(g.dimension()) + ", expected " +
               std::to_string(d));
    mean += lambda[l] * g.mean();
    stddev += lambda[l] * g.stddev();
  }
  return DiagonalGaussian<Scalar>(std::move(mean), std::move(stddev));
}

template <typename Scalar>
DiagonalGaussian<Scalar> gaussian_barycenter(
    const std::vector<DiagonalGaussian<Scalar>>& sources,
    const InterpolationWeights<Scalar>& lambda) {
  return gaussian_barycenter(
      std::span<const DiagonalGaussian<Scalar>>(sources), lambda);
}

/// Weighted sum of squared distances from `candidate` to the sources; the
/// quantity the closed-form barycenter minimizes.
template <typename Scalar>
Scalar barycenter_objective(const DiagonalGaussian<Scalar>& candidate,
                            std::span<const DiagonalGaussian<Scalar>> sources,
                            const InterpolationWeights<Scalar>& lambda) {
  if (static_cast<Index>(sources.size()) != lambda.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(sources.size()) + " sources");
  Scalar total = Scalar(0);
  for (Index l = 0; l < lambda.size(); ++l)
    total += lambda[l] *
             w2_squared(candidate, sources[static_cast<std::size_t>(l)]);
  return total;
}

template <typename Scalar>
Scalar barycenter_objective(const DiagonalGaussian<Scalar>& candidate,
                            const std::vector<DiagonalGaussian<Scalar>>& sources,
                            const InterpolationWeights<Scalar>& lambda) {
  return barycenter_objective(
      candidate, std::span<const DiagonalGaussian<Scalar>>(sources), lambda);
}

}  // namespace midgmm
