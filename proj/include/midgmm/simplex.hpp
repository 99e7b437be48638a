// midgmm/simplex.hpp
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
// Dense two-phase simplex for small equality-form linear programs
//
//     min c'x   s.t.  Ax = b,  x >= 0.
//
// Pivot selection follows Bland's rule in both phases (entering: lowest
// variable index with negative reduced cost; leaving: among minimum-ratio
// rows, lowest basic variable index), which guarantees termination.
// Phase 1 minimizes the sum of one artificial variable per row; artificial
// variables that remain basic at level zero are pivoted out, and rows that
// cannot be pivoted are dropped as redundant.

#pragma once

#include <string>
#include <vector>

#include "midgmm/types.hpp"

namespace midgmm {

template <typename Scalar>
struct StandardFormLP {
  Vector<Scalar> cost;         // length n
  Matrix<Scalar> constraints;  // m x n
  Vector<Scalar> rhs;          // length m
};

template <typename Scalar>
struct LpSolution {
  Vector<Scalar> x;  // length n, nonnegative (tiny negatives clamped to 0)
  Scalar objective;
};

namespace detail {

template <typename Scalar>
class SimplexTableau {
 public:
  SimplexTableau(const StandardFormLP<Scalar>& lp, Scalar pivot_tol)
      : n_(lp.cost.size()),
        m_(lp.rhs.size()),
        rhs_col_(lp.cost.size() + lp.rhs.size()),
        tol_(pivot_tol),
        tableau_(lp.rhs.size() + 1, lp.cost.size() + lp.rhs.size() + 1),
        basis_(static_cast<std::size_t>(lp.rhs.size())),
        banned_(static_cast<std::size_t>(lp.cost.size() + lp.rhs.size()),
                false) {
    tableau_.setZero();
    tableau_.topLeftCorner(m_, n_) = lp.constraints;
    tableau_.col(rhs_col_).head(m_) = lp.rhs;
    for (Index i = 0; i < m_; ++i) {
      if (tableau_(i, rhs_col_) < Scalar(0))
        tableau_.row(i) = -tableau_.row(i);  // keep rhs nonnegative
      tableau_(i, n_ + i) = Scalar(1);       // artificial column
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
  }

  void solve_phase1() {
    // Reduced costs for min(sum of artificials): the artificial columns are
    // basic, so the objective row is minus the sum of the constraint rows
    // over the original columns.
    tableau_.row(m_).setZero();
    for (Index j = 0; j < n_; ++j)
      tableau_(m_, j) = -tableau_.col(j).head(m_).sum();
    tableau_(m_, rhs_col_) = -tableau_.col(rhs_col_).head(m_).sum();

    iterate(/*columns=*/rhs_col_, /*phase1=*/true);

    const Scalar infeasibility = -tableau_(m_, rhs_col_);
    const Scalar feas_tol = Scalar(1e-9) * std::max(Scalar(1), rhs_scale());
    if (infeasibility > feas_tol)
      fail(Errc::infeasible, "phase-1 optimum " +
                                 std::to_string(double(infeasibility)) +
                                 " (no feasible point)");
    remove_artificials_from_basis();
  }

  void solve_phase2(const Vector<Scalar>& cost) {
    for (Index j = n_; j < rhs_col_; ++j)
      banned_[static_cast<std::size_t>(j)] = true;
    tableau_.row(m_).setZero();
    tableau_.row(m_).head(n_) = cost.transpose();
    for (Index i = 0; i < m_; ++i) {
      const Index b = basis_[static_cast<std::size_t>(i)];
      if (b < n_ && cost(b) != Scalar(0))
        tableau_.row(m_) -= cost(b) * tableau_.row(i);
    }
    iterate(/*columns=*/n_, /*phase1=*/false);
  }

  LpSolution<Scalar> extract(const Vector<Scalar>& cost) const {
    Vector<Scalar> x = Vector<Scalar>::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      const Index b = basis_[static_cast<std::size_t>(i)];
      if (b < n_) {
        Scalar v = tableau_(i, rhs_col_);
        if (v < Scalar(0)) v = Scalar(0);  // clamp ratio-test noise
        x(b) = v;
      }
    }
    return {x, cost.dot(x)};
  }

 private:
  Scalar rhs_scale() const {
    return tableau_.col(rhs_col_).head(m_).template lpNorm<Eigen::Infinity>();
  }

  void pivot(Index row, Index col) {
    Vector<Scalar> column = tableau_.col(col);
    column(row) = Scalar(0);
    const auto pivot_row = (tableau_.row(row) / tableau_(row, col)).eval();
    tableau_.noalias() -= column * pivot_row;
    tableau_.row(row) = pivot_row;
    basis_[static_cast<std::size_t>(row)] = col;
  }

  void iterate(Index columns, bool phase1) {
    // Bland's rule never cycles; the guard only turns a latent bug into a
    // loud failure instead of a hang.
    const long guard = 2'000'000;
    for (long it = 0; it < guard; ++it) {
      Index entering = -1;
      for (Index j = 0; j < columns; ++j) {
        if (banned_[static_cast<std::size_t>(j)]) continue;
        if (tableau_(m_, j) < -tol_) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return;  // optimal

      Index leaving = -1;
      Scalar best_ratio = Scalar(0);
      for (Index i = 0; i < m_; ++i) {
        const Scalar a = tableau_(i, entering);
        if (a <= tol_) continue;
        const Scalar ratio = tableau_(i, rhs_col_) / a;
        if (leaving < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis_[static_cast<std::size_t>(i)] <
                 basis_[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) {
        if (phase1)
          throw std::logic_error(
              "phase-1 subproblem is bounded by construction");
        fail(Errc::unbounded, "objective decreases without bound along x" +
                                  std::to_string(entering));
      }
      const Index old_basic = basis_[static_cast<std::size_t>(leaving)];
      pivot(leaving, entering);
      if (old_basic >= n_) banned_[static_cast<std::size_t>(old_basic)] = true;
    }
    throw std::logic_error("simplex iteration guard exceeded");
  }

  void remove_artificials_from_basis() {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(m_));
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) {
        keep.push_back(i);
        continue;
      }
      Index col = -1;
      for (Index j = 0; j < n_; ++j) {
        if (std::abs(tableau_(i, j)) > tol_) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);  // zero-level pivot; feasibility unchanged
        keep.push_back(i);
      }
      // else: the row is a linear combination of the others; drop it.
    }
    if (static_cast<Index>(keep.size()) == m_) return;
    Matrix<Scalar> compact(static_cast<Index>(keep.size()) + 1,
                           tableau_.cols());
    std::vector<Index> new_basis;
    new_basis.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      compact.row(static_cast<Index>(r)) = tableau_.row(keep[r]);
      new_basis.push_back(basis_[static_cast<std::size_t>(keep[r])]);
    }
    compact.row(static_cast<Index>(keep.size())) = tableau_.row(m_);
    tableau_ = std::move(compact);
    basis_ = std::move(new_basis);
    m_ = static_cast<Index>(keep.size());
  }

  Index n_;
  Index m_;
  Index rhs_col_;
  Scalar tol_;
  Matrix<Scalar> tableau_;  // rows: constraints then objective; last col: rhs
  std::vector<Index> basis_;
  std::vector<bool> banned_;
};

}  // namespace detail

/// Solves min c'x s.t. Ax = b, x >= 0. Returns an optimal basic feasible
/// solution or throws Infeasible/Unbounded.
template <typename Scalar>
LpSolution<Scalar> solve_lp(const StandardFormLP<Scalar>& lp,
                            Scalar pivot_tol = Scalar(1e-10)) {
  const Index n = lp.cost.size();
  const Index m = lp.rhs.size();
  if (lp.constraints.rows() != m || lp.constraints.cols() != n)
    fail(Errc::dimension_mismatch,
         "constraint matrix is " + std::to_string(lp.constraints.rows()) +
             "x" + std::to_string(lp.constraints.cols()) + ", expected " +
             std::to_string(m) + "x" + std::to_string(n));
  if (n == 0) fail(Errc::dimension_mismatch, "LP has no variables");

  detail::SimplexTableau<Scalar> tableau(lp, pivot_tol);
  tableau.solve_phase1();
  tableau.solve_phase2(lp.cost);
  return tableau.extract(lp.cost);
}

}  // namespace midgmm
