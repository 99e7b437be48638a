// tests/test_types.cpp
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

#include "doctest.h"
#include "helpers.hpp"
#include "midgmm/types.hpp"

using namespace midgmm;
using testutil::gauss;
using testutil::vec;

TEST_SUITE("types") {

TEST_CASE("diagonal gaussian validates its parameters") {
  CHECK_NOTHROW(gauss({0.0, 1.0}, {1.0, 2.0}));
  CHECK_ERRC(gauss({0.0, 1.0}, {1.0}), Errc::dimension_mismatch);
  CHECK_ERRC(gauss({0.0}, {0.0}), Errc::non_positive_stddev);
  CHECK_ERRC(gauss({0.0}, {-1.0}), Errc::non_positive_stddev);
  CHECK_ERRC(DiagonalGaussian<double>(Vector<double>(), Vector<double>()),
             Errc::dimension_mismatch);
  Vector<double> bad = vec({1.0});
  bad(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_ERRC(DiagonalGaussian<double>(bad, vec({1.0})),
             Errc::validation_error);
}

TEST_CASE("already normalized weights are accepted unchanged") {
  auto mixture = validate_mixture<double>(
      vec({0.5, 0.5}), {gauss({0.0, 0.0}, {1.0, 1.0}),
                        gauss({1.0, 1.0}, {2.0, 2.0})});
  CHECK(mixture.component(0).weight == 0.5);
  CHECK(mixture.component(1).weight == 0.5);
  CHECK(mixture.dimension() == 2);
}

TEST_CASE("weights inside tolerance renormalize to sum exactly one") {
  auto mixture = validate_mixture<double>(
      vec({0.5, 0.5 + 1e-10}),
      {gauss({0.0}, {1.0}), gauss({1.0}, {1.0})});
  double sum = 0.0;
  for (const auto& c : mixture.components()) sum += c.weight;
  CHECK(sum == 1.0);
  CHECK(mixture.component(0).weight < 0.5);
}

TEST_CASE("weights outside tolerance are rejected") {
  CHECK_ERRC(validate_mixture<double>(
                 vec({0.6, 0.6}),
                 {gauss({0.0}, {1.0}), gauss({1.0}, {1.0})}),
             Errc::weight_sum_out_of_tolerance);
}

TEST_CASE("negative weights and empty mixtures are rejected") {
  CHECK_ERRC(validate_mixture<double>(
                 vec({1.5, -0.5}),
                 {gauss({0.0}, {1.0}), gauss({1.0}, {1.0})}),
             Errc::validation_error);
  CHECK_ERRC(GaussianMixture<double>({}), Errc::empty_mixture);
  CHECK_ERRC(validate_mixture<double>(vec({1.0}), {}),
             Errc::weight_length_mismatch);
}

TEST_CASE("mixture components must share one dimension") {
  CHECK_ERRC(validate_mixture<double>(
                 vec({0.5, 0.5}),
                 {gauss({0.0}, {1.0}), gauss({1.0, 2.0}, {1.0, 1.0})}),
             Errc::dimension_mismatch);
}

TEST_CASE("attribute space enforces unique non-empty labels and one dimension") {
  auto mix1 = validate_mixture<double>(vec({1.0}), {gauss({0.0}, {1.0})});
  auto mix2 = validate_mixture<double>(vec({1.0}), {gauss({3.0}, {2.0})});
  AttributeSpace<double> space({"a", "b"}, {mix1, mix2});
  CHECK(space.size() == 2);
  CHECK(space.contains("a"));
  CHECK_FALSE(space.contains("c"));
  CHECK(space.index_of("b") == 1);
  CHECK_ERRC(space.at("missing"), Errc::unknown_label);

  CHECK_ERRC(AttributeSpace<double>({"a", "a"}, {mix1, mix2}),
             Errc::validation_error);
  CHECK_ERRC(AttributeSpace<double>({""}, {mix1}), Errc::validation_error);
  auto mix2d = validate_mixture<double>(
      vec({1.0}), {gauss({0.0, 0.0}, {1.0, 1.0})});
  CHECK_ERRC(AttributeSpace<double>({"a", "b"}, {mix1, mix2d}),
             Errc::dimension_mismatch);
}

TEST_CASE("interpolation weights validate and renormalize") {
  auto lambda = InterpolationWeights<double>(vec({0.5, 0.25, 0.25}));
  CHECK(lambda.values().sum() == 1.0);

  CHECK_ERRC(InterpolationWeights<double>(vec({0.5, 0.5 + 1e-6})),
             Errc::weight_sum_out_of_tolerance);
  CHECK_ERRC(InterpolationWeights<double>(vec({1.5, -0.5})),
             Errc::validation_error);
  CHECK_ERRC(InterpolationWeights<double>(Vector<double>()),
             Errc::weight_length_mismatch);

  auto relaxed = InterpolationWeights<double>::renormalized(
      vec({0.5, 0.5 + 1e-10}), 1e-9);
  CHECK(relaxed.values().sum() == 1.0);
  CHECK_ERRC(InterpolationWeights<double>::renormalized(vec({0.6, 0.6}), 1e-9),
             Errc::weight_sum_out_of_tolerance);

  auto one_hot = InterpolationWeights<double>::one_hot(1, 3);
  CHECK(one_hot[0] == 0.0);
  CHECK(one_hot[1] == 1.0);

  auto uniform = InterpolationWeights<double>::uniform(3);
  CHECK(uniform.values().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("identical compares all fields exactly") {
  auto a = gauss({0.0, 1.0}, {1.0, 2.0});
  auto b = gauss({0.0, 1.0}, {1.0, 2.0});
  auto c = gauss({0.0, 1.0}, {1.0, 2.0 + 1e-15});
  CHECK(identical(a, b));
  CHECK_FALSE(identical(a, c));
}

}  // TEST_SUITE
