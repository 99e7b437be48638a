// tests/test_wasserstein.cpp
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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "midgmm/wasserstein.hpp"

using namespace midgmm;
using testutil::gauss;
using testutil::vec;

namespace {

// Central-difference gradient of the barycenter objective in one coordinate.
double central_difference(const DiagonalGaussian<double>& at,
                          const std::vector<DiagonalGaussian<double>>& sources,
                          const InterpolationWeights<double>& lambda,
                          bool mean_coordinate, Index d, double step) {
  auto shifted = [&](double delta) {
    Vector<double> mean = at.mean();
    Vector<double> stddev = at.stddev();
    (mean_coordinate ? mean : stddev)(d) += delta;
    return barycenter_objective(
        DiagonalGaussian<double>(std::move(mean), std::move(stddev)), sources,
        lambda);
  };
  return (shifted(step) - shifted(-step)) / (2.0 * step);
}

}  // namespace

TEST_SUITE("wasserstein") {

TEST_CASE("squared distance of a gaussian to itself is zero") {
  auto g = gauss({0.3, -1.2}, {0.7, 2.0});
  CHECK(w2_squared(g, g) == 0.0);
}

TEST_CASE("hand-evaluated 1-D and 2-D distances") {
  CHECK(w2_squared(gauss({0.0}, {1.0}), gauss({3.0}, {2.0})) == 10.0);
  CHECK(w2_squared(gauss({1.0, 2.0}, {1.0, 1.0}),
                   gauss({1.0, 2.0}, {2.0, 3.0})) == 5.0);
}

TEST_CASE("distance is symmetric and zero only at equality") {
  testutil::Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = rng.uniform_index(1, 6);
    auto a = testutil::random_gaussian(rng, d);
    auto b = testutil::random_gaussian(rng, d);
    CHECK(w2_squared(a, b) == w2_squared(b, a));
    CHECK(w2_squared(a, a) == 0.0);
    if (!identical(a, b)) CHECK(w2_squared(a, b) > 0.0);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_ERRC(w2_squared(gauss({0.0}, {1.0}), gauss({0.0, 0.0}, {1.0, 1.0})),
             Errc::dimension_mismatch);
}

TEST_CASE("one-hot weights recover a source exactly") {
  std::vector<DiagonalGaussian<double>> sources = {
      gauss({0.0, 1.0}, {1.0, 0.5}), gauss({4.0, -2.0}, {2.0, 3.0})};
  auto result = gaussian_barycenter(
      sources, InterpolationWeights<double>(vec({1.0, 0.0})));
  CHECK(identical(result, sources[0]));
}

TEST_CASE("hand-evaluated barycenters") {
  std::vector<DiagonalGaussian<double>> pair = {gauss({0.0}, {1.0}),
                                                gauss({2.0}, {3.0})};
  auto mid = gaussian_barycenter(
      pair, InterpolationWeights<double>(vec({0.5, 0.5})));
  CHECK(mid.mean()(0) == 1.0);
  CHECK(mid.stddev()(0) == 2.0);

  std::vector<DiagonalGaussian<double>> triple = {
      gauss({0.0}, {1.0}), gauss({3.0}, {1.0}), gauss({6.0}, {1.0})};
  auto thirds = gaussian_barycenter(
      triple, InterpolationWeights<double>(
                  vec({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0})));
  CHECK(thirds.mean()(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(thirds.stddev()(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("barycenter argument validation") {
  std::vector<DiagonalGaussian<double>> sources = {gauss({0.0}, {1.0}),
                                                   gauss({2.0}, {3.0})};
  CHECK_ERRC(
      gaussian_barycenter(sources, InterpolationWeights<double>(vec({1.0}))),
      Errc::weight_length_mismatch);
  std::vector<DiagonalGaussian<double>> mismatched = {
      gauss({0.0}, {1.0}), gauss({0.0, 0.0}, {1.0, 1.0})};
  CHECK_ERRC(gaussian_barycenter(
                 mismatched, InterpolationWeights<double>(vec({0.5, 0.5}))),
             Errc::dimension_mismatch);
}

TEST_CASE("hand-evaluated objective values") {
  std::vector<DiagonalGaussian<double>> sources = {gauss({0.0}, {1.0}),
                                                   gauss({2.0}, {3.0})};
  InterpolationWeights<double> half(vec({0.5, 0.5}));
  CHECK(barycenter_objective(gauss({1.0}, {2.0}), sources, half) == 2.0);
  CHECK(barycenter_objective(gauss({0.0}, {1.0}), sources, half) == 4.0);

  std::vector<DiagonalGaussian<double>> single = {gauss({1.0}, {2.0})};
  CHECK(barycenter_objective(gauss({1.0}, {2.0}), single,
                             InterpolationWeights<double>(vec({1.0}))) == 0.0);
}

TEST_CASE("closed form minimizes the objective") {
  testutil::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = rng.uniform_index(1, 6);
    const Index count = rng.uniform_index(1, 4);
    std::vector<DiagonalGaussian<double>> sources;
    for (Index l = 0; l < count; ++l)
      sources.push_back(testutil::random_gaussian(rng, d));
    auto lambda = testutil::random_lambda(rng, count);
    auto best = gaussian_barycenter(sources, lambda);
    const double best_value = barycenter_objective(best, sources, lambda);

    for (int p = 0; p < 20; ++p) {
      Vector<double> mean = best.mean();
      Vector<double> stddev = best.stddev();
      for (Index i = 0; i < d; ++i) {
        mean(i) += rng.uniform(-0.5, 0.5);
        stddev(i) = std::max(1e-6, stddev(i) + rng.uniform(-0.5, 0.5));
      }
      auto perturbed = DiagonalGaussian<double>(mean, stddev);
      CHECK(best_value <=
            barycenter_objective(perturbed, sources, lambda) + 1e-12);
    }
  }
}

TEST_CASE("numerical gradient vanishes at the closed form") {
  testutil::Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = rng.uniform_index(1, 4);
    const Index count = rng.uniform_index(2, 4);
    std::vector<DiagonalGaussian<double>> sources;
    for (Index l = 0; l < count; ++l)
      sources.push_back(testutil::random_gaussian(rng, d));
    auto lambda = testutil::random_lambda(rng, count);
    auto best = gaussian_barycenter(sources, lambda);
    for (Index i = 0; i < d; ++i) {
      CHECK(std::abs(central_difference(best, sources, lambda, true, i,
                                        1e-6)) < 1e-4);
      CHECK(std::abs(central_difference(best, sources, lambda, false, i,
                                        1e-6)) < 1e-4);
    }
  }
}

}  // TEST_SUITE
