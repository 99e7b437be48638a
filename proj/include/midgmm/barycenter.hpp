// midgmm/barycenter.hpp
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
// Weighted barycenter of L Gaussian mixtures under squared 2-Wasserstein
// cost. The barycenter support is the set of M = prod_l K_l candidate
// Gaussians obtained by taking the closed-form Gaussian barycenter of one
// component per source (one candidate per index tuple, tuples enumerated
// lexicographically with the last index fastest). Candidate weights come
// from a transport plan pi(l,k,m):
//
//   hard mode  — each source component (l,k) sends mass lambda_l*alpha_{l,k}
//                to its nearest candidate (ties to the lowest candidate
//                index); candidate weights are the total received mass.
//   exact mode — pi minimizes sum lambda_l pi(l,k,m) W2^2(candidate_m,
//                component_{l,k}) subject to sum_m pi(l,k,m) = alpha_{l,k}
//                and candidate column sums equal across sources; candidate
//                weights are the l=0 column sums.
//
// The reported objective is the attained transport cost of the result's
// weights: for exact mode this is the LP optimum; for hard mode the hard
// weights are re-evaluated by solving the per-source optimal couplings, so
// that the objective of the heuristic is comparable to (and never below)
// the exact optimum.

#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "midgmm/simplex.hpp"
#include "midgmm/types.hpp"
#include "midgmm/wasserstein.hpp"

namespace midgmm {

enum class PlanMode { hard, exact };

constexpr std::string_view to_string(PlanMode mode) {
  return mode == PlanMode::hard ? "hard" : "exact";
}

struct BarycenterOptions {
  Index candidate_cap = 1'000'000;  // cap on M = prod_l K_l
  Index lp_variable_cap = 20'000;   // cap on M * sum_l K_l in exact mode
  double prune_epsilon = 1e-12;
};

template <typename Scalar>
struct Candidate {
  std::vector<Index> tuple;  // component index per source, 0-based
  DiagonalGaussian<Scalar> gaussian;
};

/// Sparse transport plan; entries are kept sorted by (source, component,
/// candidate) so iteration order is deterministic.
template <typename Scalar>
struct TransportPlan {
  struct Entry {
    Index source;
    Index component;
    Index candidate;
    Scalar mass;
  };
  std::vector<Entry> entries;
  std::vector<Index> component_counts;  // K_l per source
  Index candidate_count = 0;            // M
};

template <typename Scalar>
struct CandidateWeight {
  std::vector<Index> tuple;
  Scalar weight;
};

template <typename Scalar>
struct BarycenterResult {
  GaussianMixture<Scalar> mixture;
  TransportPlan<Scalar> plan;
  Scalar objective;
  std::vector<CandidateWeight<Scalar>> provenance;  // aligned with mixture
  PlanMode mode;
};

namespace detail {

template <typename Scalar>
void check_common_dimension(std::span<const GaussianMixture<Scalar>> sources) {
  const Index d = sources.front().dimension();
  for (std::size_t l = 1; l < sources.size(); ++l)
    if (sources[l].dimension() != d)
      fail(Errc::dimension_mismatch,
           "source " + std::to_string(l) + " has dimension " +
               std::to_string(sources[l].dimension()) + ", expected " +
               std::to_string(d));
}

}  // namespace detail

/// Enumerates all prod_l K_l candidate Gaussians in lexicographic tuple
/// order (last index varies fastest). Candidate stddevs are floored at
/// kCandidateStddevFloor.
template <typename Scalar>
std::vector<Candidate<Scalar>> enumerate_candidates(
    std::span<const GaussianMixture<Scalar>> sources,
    const InterpolationWeights<Scalar>& lambda,
    Index candidate_cap = BarycenterOptions{}.candidate_cap) {
  const Index num_sources = static_cast<Index>(sources.size());
  if (num_sources != lambda.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(num_sources) + " sources");
  detail::check_common_dimension(sources);

  Index total = 1;
  for (const auto& mixture : sources) {
    const Index k = mixture.component_count();
    if (total > candidate_cap / k)
      fail(Errc::candidate_count_overflow,
           "candidate count exceeds cap " + std::to_string(candidate_cap));
    total *= k;
  }

  const Index d = sources.front().dimension();
  std::vector<Candidate<Scalar>> candidates;
  candidates.reserve(static_cast<std::size_t>(total));
  std::vector<Index> tuple(static_cast<std::size_t>(num_sources), 0);
  for (Index m = 0; m < total; ++m) {
    Vector<Scalar> mean = Vector<Scalar>::Zero(d);
    Vector<Scalar> stddev = Vector<Scalar>::Zero(d);
    for (Index l = 0; l < num_sources; ++l) {
      const auto& g =
          sources[static_cast<std::size_t>(l)]
              .component(tuple[static_cast<std::size_t>(l)])
              .gaussian;
      mean += lambda[l] * g.mean();
      stddev += lambda[l] * g.stddev();
    }
    stddev = stddev.cwiseMax(Scalar(kCandidateStddevFloor));
    candidates.push_back(
        {tuple, DiagonalGaussian<Scalar>(std::move(mean), std::move(stddev))});
    // odometer increment, last position fastest
    for (Index l = num_sources - 1; l >= 0; --l) {
      auto& pos = tuple[static_cast<std::size_t>(l)];
      if (++pos < sources[static_cast<std::size_t>(l)].component_count())
        break;
      pos = 0;
    }
  }
  return candidates;
}

/// Assigns each source component's mass lambda_l*alpha_{l,k} to the
/// candidate nearest in squared W2; ties resolve to the lowest candidate
/// index.
template <typename Scalar>
TransportPlan<Scalar> hard_map_plan(
    std::span<const GaussianMixture<Scalar>> sources,
    const InterpolationWeights<Scalar>& lambda,
    const std::vector<Candidate<Scalar>>& candidates) {
  const Index num_sources = static_cast<Index>(sources.size());
  if (num_sources != lambda.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(num_sources) + " sources");
  detail::check_common_dimension(sources);

  TransportPlan<Scalar> plan;
  plan.candidate_count = static_cast<Index>(candidates.size());
  for (Index l = 0; l < num_sources; ++l) {
    const auto& mixture = sources[static_cast<std::size_t>(l)];
    plan.component_counts.push_back(mixture.component_count());
    for (Index k = 0; k < mixture.component_count(); ++k) {
      const auto& component = mixture.component(k);
      Index best = 0;
      Scalar best_cost =
          w2_squared(candidates.front().gaussian, component.gaussian);
      for (std::size_t m = 1; m < candidates.size(); ++m) {
        const Scalar cost =
            w2_squared(candidates[m].gaussian, component.gaussian);
        if (cost < best_cost) {
          best_cost = cost;
          best = static_cast<Index>(m);
        }
      }
      plan.entries.push_back({l, k, best, lambda[l] * component.weight});
    }
  }
  return plan;
}

/// Solves the coupled transport problem exactly via the simplex solver and
/// returns the nonzero plan entries.
template <typename Scalar>
TransportPlan<Scalar> exact_plan(
    std::span<const GaussianMixture<Scalar>> sources,
    const InterpolationWeights<Scalar>& lambda,
    const std::vector<Candidate<Scalar>>& candidates,
    Index lp_variable_cap = BarycenterOptions{}.lp_variable_cap) {
  const Index num_sources = static_cast<Index>(sources.size());
  if (num_sources != lambda.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(num_sources) + " sources");
  detail::check_common_dimension(sources);

  const Index num_candidates = static_cast<Index>(candidates.size());
  std::vector<Index> row_offset;  // flat index of (l, 0)
  Index total_components = 0;
  for (const auto& mixture : sources) {
    row_offset.push_back(total_components);
    total_components += mixture.component_count();
  }
  if (num_candidates > lp_variable_cap / std::max<Index>(total_components, 1))
    fail(Errc::candidate_count_overflow,
         "exact plan needs " +
             std::to_string(double(num_candidates) * double(total_components)) +
             " variables, above cap " + std::to_string(lp_variable_cap));

  // Variable layout: pi(l,k,m) -> (row_offset[l] + k) * M + m.
  const Index num_vars = total_components * num_candidates;
  const Index num_rows =
      total_components + (num_sources - 1) * num_candidates;

  StandardFormLP<Scalar> lp;
  lp.cost = Vector<Scalar>::Zero(num_vars);
  lp.constraints = Matrix<Scalar>::Zero(num_rows, num_vars);
  lp.rhs = Vector<Scalar>::Zero(num_rows);

  for (Index l = 0; l < num_sources; ++l) {
    const auto& mixture = sources[static_cast<std::size_t>(l)];
    for (Index k = 0; k < mixture.component_count(); ++k) {
      const Index flat = row_offset[static_cast<std::size_t>(l)] + k;
      for (Index m = 0; m < num_candidates; ++m) {
        const Index var = flat * num_candidates + m;
        lp.cost(var) =
            lambda[l] *
            w2_squared(candidates[static_cast<std::size_t>(m)].gaussian,
                       mixture.component(k).gaussian);
        lp.constraints(flat, var) = Scalar(1);  // marginal row
      }
      lp.rhs(flat) = mixture.component(k).weight;
    }
  }
  // Coupling rows: column sums of source l equal those of source 0.
  for (Index l = 1; l < num_sources; ++l) {
    for (Index m = 0; m < num_candidates; ++m) {
      const Index row = total_components + (l - 1) * num_candidates + m;
      for (Index k = 0; k < sources[static_cast<std::size_t>(l)].component_count(); ++k)
        lp.constraints(
            row, (row_offset[static_cast<std::size_t>(l)] + k) * num_candidates + m) =
            Scalar(1);
      for (Index k = 0; k < sources[0].component_count(); ++k)
        lp.constraints(row, k * num_candidates + m) = Scalar(-1);
    }
  }

  LpSolution<Scalar> solution = solve_lp(lp);

  TransportPlan<Scalar> plan;
  plan.candidate_count = num_candidates;
  for (const auto& mixture : sources)
    plan.component_counts.push_back(mixture.component_count());
  for (Index l = 0; l < num_sources; ++l) {
    for (Index k = 0; k < plan.component_counts[static_cast<std::size_t>(l)]; ++k) {
      const Index flat = row_offset[static_cast<std::size_t>(l)] + k;
      for (Index m = 0; m < num_candidates; ++m) {
        const Scalar mass = solution.x(flat * num_candidates + m);
        if (mass > Scalar(0)) plan.entries.push_back({l, k, m, mass});
      }
    }
  }
  return plan;
}

/// Transport cost of a plan under the lambda-weighted squared W2 cost.
template <typename Scalar>
Scalar plan_cost(std::span<const GaussianMixture<Scalar>> sources,
                 const InterpolationWeights<Scalar>& lambda,
                 const std::vector<Candidate<Scalar>>& candidates,
                 const TransportPlan<Scalar>& plan) {
  Scalar total = Scalar(0);
  for (const auto& entry : plan.entries)
    total += lambda[entry.source] * entry.mass *
             w2_squared(
                 candidates[static_cast<std::size_t>(entry.candidate)].gaussian,
                 sources[static_cast<std::size_t>(entry.source)]
                     .component(entry.component)
                     .gaussian);
  return total;
}

/// Attained objective of a candidate weight vector: the sum over sources of
/// lambda_l times the optimal coupling cost between the source weights and
/// the given candidate weights. Candidates with zero weight receive no mass.
template <typename Scalar>
Scalar weighted_transport_cost(std::span<const GaussianMixture<Scalar>> sources,
                               const InterpolationWeights<Scalar>& lambda,
                               const std::vector<Candidate<Scalar>>& candidates,
                               const Vector<Scalar>& candidate_weights) {
  std::vector<Index> support;
  for (Index m = 0; m < candidate_weights.size(); ++m)
    if (candidate_weights(m) > Scalar(0)) support.push_back(m);
  if (support.empty())
    fail(Errc::invalid_plan, "candidate weights are all zero");

  Scalar total = Scalar(0);
  for (Index l = 0; l < static_cast<Index>(sources.size()); ++l) {
    if (lambda[l] == Scalar(0)) continue;
    const auto& mixture = sources[static_cast<std::size_t>(l)];
    const Index rows = mixture.component_count();
    const Index cols = static_cast<Index>(support.size());
    StandardFormLP<Scalar> lp;
    lp.cost = Vector<Scalar>::Zero(rows * cols);
    lp.constraints = Matrix<Scalar>::Zero(rows + cols, rows * cols);
    lp.rhs = Vector<Scalar>::Zero(rows + cols);
    for (Index k = 0; k < rows; ++k) {
      for (Index j = 0; j < cols; ++j) {
        const Index var = k * cols + j;
        lp.cost(var) = w2_squared(
            candidates[static_cast<std::size_t>(support[static_cast<std::size_t>(j)])]
                .gaussian,
            mixture.component(k).gaussian);
        lp.constraints(k, var) = Scalar(1);
        lp.constraints(rows + j, var) = Scalar(1);
      }
      lp.rhs(k) = mixture.component(k).weight;
    }
    for (Index j = 0; j < cols; ++j)
      lp.rhs(rows + j) =
          candidate_weights(support[static_cast<std::size_t>(j)]);
    total += lambda[l] * solve_lp(lp).objective;
  }
  return total;
}

/// Candidate weights alpha'_m induced by a plan. Exact mode sums the l=0
/// column (the coupling constraints make all sources agree); hard mode sums
/// over all sources, whose total mass is sum_l lambda_l = 1.
template <typename Scalar>
Vector<Scalar> mixture_weights_from_plan(const TransportPlan<Scalar>& plan,
                                         PlanMode mode) {
  if (plan.candidate_count <= 0 || plan.component_counts.empty())
    fail(Errc::invalid_plan, "plan has no candidates or sources");
  Vector<Scalar> weights = Vector<Scalar>::Zero(plan.candidate_count);
  std::vector<Index> offsets;
  Index total_components = 0;
  for (Index k : plan.component_counts) {
    offsets.push_back(total_components);
    total_components += k;
  }
  std::vector<int> seen(static_cast<std::size_t>(total_components), 0);
  for (const auto& entry : plan.entries) {
    if (entry.source < 0 ||
        entry.source >= static_cast<Index>(plan.component_counts.size()) ||
        entry.component < 0 ||
        entry.component >=
            plan.component_counts[static_cast<std::size_t>(entry.source)] ||
        entry.candidate < 0 || entry.candidate >= plan.candidate_count)
      fail(Errc::invalid_plan, "plan entry indices out of range");
    if (!(entry.mass >= Scalar(0)))
      fail(Errc::invalid_plan, "plan entry has negative mass");
    ++seen[static_cast<std::size_t>(
        offsets[static_cast<std::size_t>(entry.source)] + entry.component)];
    if (mode == PlanMode::exact) {
      if (entry.source == 0) weights(entry.candidate) += entry.mass;
    } else {
      weights(entry.candidate) += entry.mass;
    }
  }
  if (mode == PlanMode::hard)
    for (int count : seen)
      if (count != 1)
        fail(Errc::invalid_plan,
             "hard plan must carry exactly one entry per source component");
  if (std::abs(double(weights.sum()) - 1.0) > kWeightSumTol)
    fail(Errc::invalid_plan, "plan-induced weights sum to " +
                                 std::to_string(double(weights.sum())));
  return weights;
}

/// Drops components lighter than epsilon, merges components whose
/// parameters coincide within 1e-12 (weights summed into the first
/// occurrence), and renormalizes the surviving weights to sum to 1.
template <typename Scalar>
BarycenterResult<Scalar> prune(const BarycenterResult<Scalar>& result,
                               Scalar epsilon) {
  if (!(epsilon >= Scalar(0)))
    fail(Errc::invalid_argument, "prune epsilon must be nonnegative");
  constexpr Scalar merge_tol = Scalar(1e-12);

  std::vector<MixtureComponent<Scalar>> kept;
  std::vector<CandidateWeight<Scalar>> provenance;
  for (Index k = 0; k < result.mixture.component_count(); ++k) {
    const auto& component = result.mixture.component(k);
    if (component.weight < epsilon) continue;
    bool merged = false;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const auto& other = kept[j].gaussian;
      if ((component.gaussian.mean() - other.mean())
                  .template lpNorm<Eigen::Infinity>() <= merge_tol &&
          (component.gaussian.stddev() - other.stddev())
                  .template lpNorm<Eigen::Infinity>() <= merge_tol) {
        kept[j].weight += component.weight;
        provenance[j].weight += component.weight;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    kept.push_back(component);
    provenance.push_back(
        {result.provenance[static_cast<std::size_t>(k)].tuple,
         component.weight});
  }
  if (kept.empty())
    fail(Errc::all_components_pruned,
         "epsilon " + std::to_string(double(epsilon)) +
             " removed every component");

  Vector<Scalar> weights(static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j)
    weights(static_cast<Index>(j)) = kept[j].weight;
  detail::renormalize_exact(weights);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    kept[j].weight = weights(static_cast<Index>(j));
    provenance[j].weight = weights(static_cast<Index>(j));
  }

  return {GaussianMixture<Scalar>(std::move(kept)), result.plan,
          result.objective, std::move(provenance), result.mode};
}

/// Full pipeline: enumerate candidates, compute the plan for the requested
/// mode, derive weights, evaluate the objective, and prune.
template <typename Scalar>
BarycenterResult<Scalar> gmm_barycenter(
    const AttributeSpace<Scalar>& space,
    const InterpolationWeights<Scalar>& lambda, PlanMode mode,
    const BarycenterOptions& options = {}) {
  if (lambda.size() != space.size())
    fail(Errc::weight_length_mismatch,
         std::to_string(lambda.size()) + " interpolation weights for " +
             std::to_string(space.size()) + " attributes");
  std::span<const GaussianMixture<Scalar>> sources(space.mixtures());

  auto candidates =
      enumerate_candidates(sources, lambda, options.candidate_cap);
  TransportPlan<Scalar> plan =
      mode == PlanMode::hard
          ? hard_map_plan(sources, lambda, candidates)
          : exact_plan(sources, lambda, candidates, options.lp_variable_cap);
  Vector<Scalar> weights = mixture_weights_from_plan(plan, mode);

  const Scalar objective =
      mode == PlanMode::exact
          ? plan_cost(sources, lambda, candidates, plan)
          : weighted_transport_cost(sources, lambda, candidates, weights);

  std::vector<MixtureComponent<Scalar>> components;
  components.reserve(candidates.size());
  for (std::size_t m = 0; m < candidates.size(); ++m)
    components.push_back(
        {weights(static_cast<Index>(m)), candidates[m].gaussian});
  GaussianMixture<Scalar> mixture(std::move(components));

  std::vector<CandidateWeight<Scalar>> provenance;
  provenance.reserve(candidates.size());
  for (Index m = 0; m < mixture.component_count(); ++m)
    provenance.push_back(
        {candidates[static_cast<std::size_t>(m)].tuple,
         mixture.component(m).weight});

  BarycenterResult<Scalar> result{std::move(mixture), std::move(plan),
                                  objective, std::move(provenance), mode};
  return prune(result, Scalar(options.prune_epsilon));
}

}  // namespace midgmm
