// midgmm/types.hpp
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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace midgmm {

using Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Mixture weights must sum to 1 within this tolerance; inputs inside the
// tolerance are renormalized so that the stored weights sum to 1 exactly.
inline constexpr double kWeightSumTol = 1e-9;
// Interpolation weights carry a tighter budget than mixture weights.
inline constexpr double kLambdaSumTol = 1e-12;
// Floor applied to standard deviations of derived (barycenter candidate)
// Gaussians; raw inputs must be strictly positive on their own.
inline constexpr double kCandidateStddevFloor = 1e-8;

enum class Errc {
  non_positive_stddev,
  dimension_mismatch,
  weight_sum_out_of_tolerance,
  empty_mixture,
  weight_length_mismatch,
  infeasible,
  unbounded,
  candidate_count_overflow,
  invalid_plan,
  all_components_pruned,
  empty_sample_set,
  too_few_points,
  degenerate_component,
  io_error,
  parse_error,
  unsupported_version,
  validation_error,
  unknown_label,
  invalid_argument,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::non_positive_stddev: return "NonPositiveStddev";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::weight_sum_out_of_tolerance: return "WeightSumOutOfTolerance";
    case Errc::empty_mixture: return "EmptyMixture";
    case Errc::weight_length_mismatch: return "WeightLengthMismatch";
    case Errc::infeasible: return "Infeasible";
    case Errc::unbounded: return "Unbounded";
    case Errc::candidate_count_overflow: return "CandidateCountOverflow";
    case Errc::invalid_plan: return "InvalidPlan";
    case Errc::all_components_pruned: return "AllComponentsPruned";
    case Errc::empty_sample_set: return "EmptySampleSet";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::degenerate_component: return "DegenerateComponent";
    case Errc::io_error: return "IoError";
    case Errc::parse_error: return "ParseError";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::validation_error: return "ValidationError";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

/// Library-wide exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

namespace detail {

// Renormalizes a nonnegative vector whose sum is already close to 1 so that
// the stored entries sum to 1 exactly; the residual after division is folded
// into the largest entry (twice, to absorb the re-rounding).
template <typename Scalar>
void renormalize_exact(Vector<Scalar>& weights) {
  const Scalar sum = weights.sum();
  if (sum != Scalar(1)) weights /= sum;
  for (int pass = 0; pass < 2; ++pass) {
    const Scalar residual = Scalar(1) - weights.sum();
    if (residual == Scalar(0)) break;
    Index largest = 0;
    weights.maxCoeff(&largest);
    weights(largest) += residual;
  }
}

}  // namespace detail

/// A Gaussian with diagonal covariance, stored as a mean vector and a
/// per-dimension standard deviation vector (not variances).
template <typename Scalar>
class DiagonalGaussian {
  static_assert(std::is_floating_point_v<Scalar>);

 public:
  DiagonalGaussian(Vector<Scalar> mean, Vector<Scalar> stddev)
      : mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (mean_.size() == 0)
      fail(Errc::dimension_mismatch, "gaussian dimension must be >= 1");
    if (mean_.size() != stddev_.size())
      fail(Errc::dimension_mismatch,
           "mean has length " + std::to_string(mean_.size()) +
               " but stddev has length " + std::to_string(stddev_.size()));
    if (!mean_.allFinite() || !stddev_.allFinite())
      fail(Errc::validation_error, "gaussian parameters must be finite");
    if ((stddev_.array() <= Scalar(0)).any())
      fail(Errc::non_positive_stddev,
           "every stddev entry must be strictly positive");
  }

  Index dimension() const { return mean_.size(); }
  const Vector<Scalar>& mean() const { return mean_; }
  const Vector<Scalar>& stddev() const { return stddev_; }

 private:
  Vector<Scalar> mean_;
  Vector<Scalar> stddev_;
};

/// Exact (bitwise) equality of all parameters.
template <typename Scalar>
bool identical(const DiagonalGaussian<Scalar>& a,
               const DiagonalGaussian<Scalar>& b) {
  return a.dimension() == b.dimension() &&
         (a.mean().array() == b.mean().array()).all() &&
         (a.stddev().array() == b.stddev().array()).all();
}

template <typename Scalar>
struct MixtureComponent {
  Scalar weight;
  DiagonalGaussian<Scalar> gaussian;
};

/// A weighted list of diagonal Gaussians over a shared dimension.
/// Weights are validated to sum to 1 within kWeightSumTol and stored
/// renormalized to sum to 1 exactly. Immutable after construction.
template <typename Scalar>
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent<Scalar>> components)
      : components_(std::move(components)) {
    if (components_.empty())
      fail(Errc::empty_mixture, "mixture must have at least one component");
    const Index d = components_.front().gaussian.dimension();
    Vector<Scalar> weights(static_cast<Index>(components_.size()));
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto& c = components_[k];
      if (c.gaussian.dimension() != d)
        fail(Errc::dimension_mismatch,
             "component " + std::to_string(k) + " has dimension " +
                 std::to_string(c.gaussian.dimension()) + ", expected " +
                 std::to_string(d));
      if (!(c.weight >= Scalar(0)) || !std::isfinite(double(c.weight)))
        fail(Errc::validation_error,
             "component " + std::to_string(k) + " has a negative weight");
      weights(static_cast<Index>(k)) = c.weight;
    }
    const Scalar sum = weights.sum();
    if (std::abs(double(sum) - 1.0) > kWeightSumTol)
      fail(Errc::weight_sum_out_of_tolerance,
           "mixture weights sum to " + std::to_string(double(sum)));
    detail::renormalize_exact(weights);
    for (std::size_t k = 0; k < components_.size(); ++k)
      components_[k].weight = weights(static_cast<Index>(k));
  }

  Index dimension() const { return components_.front().gaussian.dimension(); }
  Index component_count() const {
    return static_cast<Index>(components_.size());
  }
  const std::vector<MixtureComponent<Scalar>>& components() const {
    return components_;
  }
  const MixtureComponent<Scalar>& component(Index k) const {
    return components_.at(static_cast<std::size_t>(k));
  }

  Vector<Scalar> weights() const {
    Vector<Scalar> w(component_count());
    for (Index k = 0; k < component_count(); ++k) w(k) = components_[k].weight;
    return w;
  }

 private:
  std::vector<MixtureComponent<Scalar>> components_;
};

/// Builds a validated mixture from raw weight/parameter arrays.
template <typename Scalar>
GaussianMixture<Scalar> validate_mixture(
    const Vector<Scalar>& weights,
    std::vector<DiagonalGaussian<Scalar>> gaussians) {
  if (weights.size() != static_cast<Index>(gaussians.size()))
    fail(Errc::weight_length_mismatch,
         "got " + std::to_string(weights.size()) + " weights for " +
             std::to_string(gaussians.size()) + " gaussians");
  std::vector<MixtureComponent<Scalar>> components;
  components.reserve(gaussians.size());
  for (Index k = 0; k < weights.size(); ++k)
    components.push_back({weights(k), std::move(gaussians[k])});
  return GaussianMixture<Scalar>(std::move(components));
}

template <typename Scalar>
bool identical(const GaussianMixture<Scalar>& a,
               const GaussianMixture<Scalar>& b) {
  if (a.component_count() != b.component_count()) return false;
  for (Index k = 0; k < a.component_count(); ++k) {
    if (a.component(k).weight != b.component(k).weight) return false;
    if (!identical(a.component(k).gaussian, b.component(k).gaussian))
      return false;
  }
  return true;
}

/// Ordered association from attribute label to its mixture. All mixtures
/// share one dimension; labels are unique and non-empty.
template <typename Scalar>
class AttributeSpace {
 public:
  AttributeSpace(std::vector<std::string> labels,
                 std::vector<GaussianMixture<Scalar>> mixtures)
      : labels_(std::move(labels)), mixtures_(std::move(mixtures)) {
    if (labels_.size() != mixtures_.size())
      fail(Errc::invalid_argument, "label/mixture count mismatch");
    if (labels_.empty())
      fail(Errc::validation_error, "attribute space must be non-empty");
    const Index d = mixtures_.front().dimension();
    for (std::size_t l = 0; l < labels_.size(); ++l) {
      if (labels_[l].empty())
        fail(Errc::validation_error, "attribute labels must be non-empty");
      for (std::size_t j = l + 1; j < labels_.size(); ++j)
        if (labels_[l] == labels_[j])
          fail(Errc::validation_error, "duplicate attribute label '" +
                                           labels_[l] + "'");
      if (mixtures_[l].dimension() != d)
        fail(Errc::dimension_mismatch,
             "attribute '" + labels_[l] + "' has dimension " +
                 std::to_string(mixtures_[l].dimension()) + ", expected " +
                 std::to_string(d));
    }
  }

  Index size() const { return static_cast<Index>(labels_.size()); }
  Index dimension() const { return mixtures_.front().dimension(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<GaussianMixture<Scalar>>& mixtures() const {
    return mixtures_;
  }

  bool contains(std::string_view label) const { return find(label) >= 0; }

  Index index_of(std::string_view label) const {
    const Index i = find(label);
    if (i < 0)
      fail(Errc::unknown_label, "no attribute '" + std::string(label) + "'");
    return i;
  }

  const GaussianMixture<Scalar>& at(std::string_view label) const {
    return mixtures_[static_cast<std::size_t>(index_of(label))];
  }

 private:
  Index find(std::string_view label) const {
    for (std::size_t l = 0; l < labels_.size(); ++l)
      if (labels_[l] == label) return static_cast<Index>(l);
    return -1;
  }

  std::vector<std::string> labels_;
  std::vector<GaussianMixture<Scalar>> mixtures_;
};

/// Convex interpolation weights over L source distributions: nonnegative,
/// summing to 1 within kLambdaSumTol, stored renormalized exactly.
template <typename Scalar>
class InterpolationWeights {
 public:
  explicit InterpolationWeights(Vector<Scalar> weights)
      : weights_(std::move(weights)) {
    if (weights_.size() == 0)
      fail(Errc::weight_length_mismatch,
           "interpolation weights must be non-empty");
    if (!weights_.allFinite() || (weights_.array() < Scalar(0)).any())
      fail(Errc::validation_error,
           "interpolation weights must be finite and nonnegative");
    if (std::abs(double(weights_.sum()) - 1.0) > kLambdaSumTol)
      fail(Errc::weight_sum_out_of_tolerance,
           "interpolation weights sum to " +
               std::to_string(double(weights_.sum())));
    detail::renormalize_exact(weights_);
  }

  /// Accepts raw weights off by up to `tol` and renormalizes them.
  static InterpolationWeights renormalized(Vector<Scalar> raw, Scalar tol) {
    if (raw.size() == 0)
      fail(Errc::weight_length_mismatch,
           "interpolation weights must be non-empty");
    if (!raw.allFinite() || (raw.array() < Scalar(0)).any())
      fail(Errc::validation_error,
           "interpolation weights must be finite and nonnegative");
    const Scalar sum = raw.sum();
    if (std::abs(double(sum) - 1.0) > double(tol))
      fail(Errc::weight_sum_out_of_tolerance,
           "interpolation weights sum to " + std::to_string(double(sum)));
    detail::renormalize_exact(raw);
    return InterpolationWeights(std::move(raw));
  }

  static InterpolationWeights one_hot(Index which, Index length) {
    Vector<Scalar> w = Vector<Scalar>::Zero(length);
    w(which) = Scalar(1);
    return InterpolationWeights(std::move(w));
  }

  static InterpolationWeights uniform(Index length) {
    return InterpolationWeights(
        Vector<Scalar>::Constant(length, Scalar(1) / Scalar(length)));
  }

  Index size() const { return weights_.size(); }
  Scalar operator[](Index l) const { return weights_(l); }
  const Vector<Scalar>& values() const { return weights_; }

 private:
  Vector<Scalar> weights_;
};

}  // namespace midgmm
