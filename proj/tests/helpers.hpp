// tests/helpers.hpp
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
// Shared test utilities: deterministic random instances and independent
// brute-force oracles. The LP oracle enumerates basic feasible solutions
// directly from the constraint matrix and never calls the simplex path it
// is used to check.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "midgmm/barycenter.hpp"
#include "midgmm/sampling.hpp"
#include "midgmm/simplex.hpp"
#include "midgmm/types.hpp"
#include "midgmm/wasserstein.hpp"

#define CHECK_ERRC(expression, expected)                      \
  do {                                                        \
    bool caught_ = false;                                     \
    try {                                                     \
      (void)(expression);                                     \
    } catch (const midgmm::Error& e_) {                       \
      caught_ = true;                                         \
      CHECK(e_.code() == (expected));                         \
    }                                                         \
    CHECK_MESSAGE(caught_, "expected " #expression " to throw"); \
  } while (0)

namespace testutil {

using midgmm::DiagonalGaussian;
using midgmm::GaussianMixture;
using midgmm::Index;
using midgmm::InterpolationWeights;
using midgmm::Matrix;
using midgmm::MixtureComponent;
using midgmm::StandardFormLP;
using midgmm::Vector;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("midgmm_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

/// Deterministic RNG for test instances (53-bit uniforms from mt19937_64).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index uniform_index(Index lo, Index hi) {  // inclusive bounds
    return lo + static_cast<Index>(uniform() * double(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

inline Vector<double> vec(std::initializer_list<double> values) {
  Vector<double> v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double value : values) v(i++) = value;
  return v;
}

inline DiagonalGaussian<double> gauss(std::initializer_list<double> mean,
                                      std::initializer_list<double> stddev) {
  return DiagonalGaussian<double>(vec(mean), vec(stddev));
}

inline DiagonalGaussian<double> random_gaussian(Rng& rng, Index dim) {
  Vector<double> mean(dim), stddev(dim);
  for (Index d = 0; d < dim; ++d) {
    mean(d) = rng.uniform(-5.0, 5.0);
    stddev(d) = rng.uniform(0.1, 2.0);
  }
  return DiagonalGaussian<double>(std::move(mean), std::move(stddev));
}

inline GaussianMixture<double> random_mixture(Rng& rng, Index components,
                                              Index dim) {
  std::vector<MixtureComponent<double>> comps;
  double total = 0.0;
  std::vector<double> raw;
  for (Index k = 0; k < components; ++k) {
    raw.push_back(rng.uniform(0.2, 1.0));
    total += raw.back();
  }
  for (Index k = 0; k < components; ++k)
    comps.push_back({raw[static_cast<std::size_t>(k)] / total,
                     random_gaussian(rng, dim)});
  return GaussianMixture<double>(std::move(comps));
}

inline std::vector<GaussianMixture<double>> random_sources(Rng& rng,
                                                           Index count,
                                                           Index components,
                                                           Index dim) {
  std::vector<GaussianMixture<double>> sources;
  for (Index l = 0; l < count; ++l)
    sources.push_back(random_mixture(rng, components, dim));
  return sources;
}

inline InterpolationWeights<double> random_lambda(Rng& rng, Index count) {
  Vector<double> raw(count);
  for (Index l = 0; l < count; ++l) raw(l) = rng.uniform(0.1, 1.0);
  raw /= raw.sum();
  return InterpolationWeights<double>::renormalized(raw, 1e-9);
}

/// Balanced transportation instance in equality form with r*c variables.
inline StandardFormLP<double> random_transportation(Rng& rng, Index rows,
                                                    Index cols) {
  Vector<double> supply(rows), demand(cols);
  for (Index i = 0; i < rows; ++i) supply(i) = rng.uniform(0.1, 1.0);
  for (Index j = 0; j < cols; ++j) demand(j) = rng.uniform(0.1, 1.0);
  supply /= supply.sum();
  demand /= demand.sum();

  StandardFormLP<double> lp;
  lp.cost = Vector<double>::Zero(rows * cols);
  lp.constraints = Matrix<double>::Zero(rows + cols, rows * cols);
  lp.rhs = Vector<double>::Zero(rows + cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index var = i * cols + j;
      lp.cost(var) = rng.uniform(0.0, 10.0);
      lp.constraints(i, var) = 1.0;
      lp.constraints(rows + j, var) = 1.0;
    }
    lp.rhs(i) = supply(i);
  }
  for (Index j = 0; j < cols; ++j) lp.rhs(rows + j) = demand(j);
  return lp;
}

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
};

/// Minimizes over all basic feasible solutions by enumerating column
/// subsets of size rank(A) and solving the restricted systems.
inline BruteForceResult brute_force_lp(const StandardFormLP<double>& lp) {
  const Index n = lp.cost.size();
  const Index m = lp.rhs.size();

  Eigen::FullPivLU<Matrix<double>> lu(lp.constraints);
  lu.setThreshold(1e-9);
  const Index rank = lu.rank();

  BruteForceResult best;
  std::vector<Index> subset(static_cast<std::size_t>(rank));

  auto consider = [&]() {
    Matrix<double> basis(m, rank);
    for (Index j = 0; j < rank; ++j)
      basis.col(j) = lp.constraints.col(subset[static_cast<std::size_t>(j)]);
    const Vector<double> solution =
        basis.colPivHouseholderQr().solve(lp.rhs);
    if ((basis * solution - lp.rhs).lpNorm<Eigen::Infinity>() > 1e-8) return;
    if ((solution.array() < -1e-9).any()) return;
    double objective = 0.0;
    for (Index j = 0; j < rank; ++j)
      objective +=
          lp.cost(subset[static_cast<std::size_t>(j)]) * solution(j);
    if (!best.feasible || objective < best.objective) {
      best.feasible = true;
      best.objective = objective;
    }
  };

  // iterate all subsets of {0..n-1} of size `rank`
  auto recurse = [&](auto&& self, Index start, Index depth) -> void {
    if (depth == rank) {
      consider();
      return;
    }
    for (Index c = start; c <= n - (rank - depth); ++c) {
      subset[static_cast<std::size_t>(depth)] = c;
      self(self, c + 1, depth + 1);
    }
  };
  if (rank == 0) {
    // Ax = b only consistent when b is (numerically) zero; x = 0 is optimal.
    if (lp.rhs.lpNorm<Eigen::Infinity>() <= 1e-9) {
      best.feasible = true;
      best.objective = 0.0;
    }
    return best;
  }
  recurse(recurse, 0, 0);
  return best;
}

inline double max_constraint_violation(const StandardFormLP<double>& lp,
                                       const Vector<double>& x) {
  return (lp.constraints * x - lp.rhs).lpNorm<Eigen::Infinity>();
}

/// Marginal sums per (source, component) and column sums per (source,
/// candidate), accumulated straight from the plan entries.
struct PlanSums {
  std::map<std::pair<Index, Index>, double> marginal;
  std::map<std::pair<Index, Index>, double> column;
};

inline PlanSums plan_sums(const midgmm::TransportPlan<double>& plan) {
  PlanSums sums;
  for (const auto& entry : plan.entries) {
    sums.marginal[{entry.source, entry.component}] += entry.mass;
    sums.column[{entry.source, entry.candidate}] += entry.mass;
  }
  return sums;
}

/// Trapezoidal quadrature of exp(log_density) over [lo, hi].
inline double quadrature_1d(const GaussianMixture<double>& mixture, double lo,
                            double hi, Index points) {
  const double h = (hi - lo) / double(points - 1);
  double total = 0.0;
  for (Index i = 0; i < points; ++i) {
    const double x = lo + h * double(i);
    const double f = std::exp(midgmm::log_density(mixture, vec({x})));
    total += (i == 0 || i == points - 1) ? 0.5 * f : f;
  }
  return total * h;
}

inline double quadrature_2d(const GaussianMixture<double>& mixture,
                            Vector<double> lo, Vector<double> hi,
                            Index points) {
  const double hx = (hi(0) - lo(0)) / double(points - 1);
  const double hy = (hi(1) - lo(1)) / double(points - 1);
  double total = 0.0;
  Vector<double> point(2);
  for (Index i = 0; i < points; ++i) {
    point(0) = lo(0) + hx * double(i);
    const double wx = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    for (Index j = 0; j < points; ++j) {
      point(1) = lo(1) + hy * double(j);
      const double wy = (j == 0 || j == points - 1) ? 0.5 : 1.0;
      total += wx * wy * std::exp(midgmm::log_density(mixture, point));
    }
  }
  return total * hx * hy;
}

/// Exhaustive assignment of fitted components to reference components
/// minimizing the total squared W2 cost (component counts must match and be
/// small). Returns per-fitted-component reference indices.
inline std::vector<Index> best_matching(const GaussianMixture<double>& fitted,
                                        const GaussianMixture<double>& reference) {
  const Index k_count = fitted.component_count();
  if (reference.component_count() != k_count)
    throw std::logic_error("best_matching needs equal component counts");
  std::vector<Index> perm(static_cast<std::size_t>(k_count));
  for (Index k = 0; k < k_count; ++k) perm[static_cast<std::size_t>(k)] = k;
  std::vector<Index> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Index k = 0; k < k_count; ++k)
      cost += midgmm::w2_squared(
          fitted.component(k).gaussian,
          reference.component(perm[static_cast<std::size_t>(k)]).gaussian);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Componentwise comparison after sorting components lexicographically by
/// (mean, stddev, weight); tolerant, for permutation-equivariance checks.
inline bool mixtures_close_up_to_order(const GaussianMixture<double>& a,
                                       const GaussianMixture<double>& b,
                                       double tol) {
  if (a.component_count() != b.component_count()) return false;
  if (a.dimension() != b.dimension()) return false;
  auto key = [](const MixtureComponent<double>& c) {
    std::vector<double> k;
    for (Index d = 0; d < c.gaussian.dimension(); ++d)
      k.push_back(c.gaussian.mean()(d));
    for (Index d = 0; d < c.gaussian.dimension(); ++d)
      k.push_back(c.gaussian.stddev()(d));
    k.push_back(c.weight);
    return k;
  };
  std::vector<std::vector<double>> ka, kb;
  for (Index k = 0; k < a.component_count(); ++k) {
    ka.push_back(key(a.component(k)));
    kb.push_back(key(b.component(k)));
  }
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  for (std::size_t i = 0; i < ka.size(); ++i)
    for (std::size_t j = 0; j < ka[i].size(); ++j)
      if (std::abs(ka[i][j] - kb[i][j]) > tol) return false;
  return true;
}

}  // namespace testutil
