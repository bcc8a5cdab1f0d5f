#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "hdpca/core.hpp"

namespace hdpca {

/// All ordered differences d_ij = x_i - x_j, i != j, as n(n-1) rows.
/// Rows are grouped by i; within a group, j ascends (skipping i).
template <typename Scalar>
struct PairwiseDifferenceSet {
  Index n = 0;
  Index p = 0;
  Matrix<Scalar> diffs;

  /// Row of d_ij inside `diffs`.
  Index row_of(Index i, Index j) const { return i * (n - 1) + (j < i ? j : j - 1); }
  /// The n-1 rows of observation i.
  auto group(Index i) const { return diffs.middleRows(i * (n - 1), n - 1); }
  /// Observation j paired with the k-th row of group i.
  static Index partner(Index i, Index k) { return k < i ? k : k + 1; }
};

template <typename Scalar>
PairwiseDifferenceSet<Scalar> pairwise_differences(const DataMatrix<Scalar>& data) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n < 2) throw InputError("need at least 2 observations");
  PairwiseDifferenceSet<Scalar> out{n, p, Matrix<Scalar>(n * (n - 1), p)};
  Index row = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      out.diffs.row(row++) = data.row(i) - data.row(j);
    }
  }
  return out;
}

/// Per-observation product plan over that observation's n-1 differences
/// (0-based positions within the group): every (j, j), then every (j, k), j < k.
struct IndexPairPlan {
  Index n = 0;
  std::vector<std::pair<Index, Index>> per_observation;

  /// Pairs over all n observations.
  Index total_pairs() const { return n * static_cast<Index>(per_observation.size()); }
};

inline IndexPairPlan index_pair_plan(Index n) {
  if (n < 2) throw InputError("need at least 2 observations");
  IndexPairPlan plan{n, {}};
  const Index k = n - 1;
  plan.per_observation.reserve(static_cast<std::size_t>(k + k * (k - 1) / 2));
  for (Index j = 0; j < k; ++j) plan.per_observation.emplace_back(j, j);
  for (Index j = 0; j < k; ++j) {
    for (Index l = j + 1; l < k; ++l) plan.per_observation.emplace_back(j, l);
  }
  return plan;
}

/// Fitted statistics for one ScalerSpec on one difference set.
/// Every stored scale has already been floored (below epsilon -> 1).
template <typename Scalar>
struct ScalerState {
  ScalerSpec spec;
  Vector<Scalar> center;          // Standardize, PerDimension: column means
  Vector<Scalar> column_scale;    // PerDimension scales
  Scalar global_center = 0;       // Standardize, GlobalScalar
  Scalar global_scale = 1;        // GlobalScalar scale
  Matrix<Scalar> local_variance;  // Local: n x p (PerDimension) or n x 1 (PerPair)
};

namespace detail {

template <typename Scalar>
Scalar floored(Scalar s, double eps) {
  return s < Scalar(eps) ? Scalar(1) : s;
}

template <typename Derived>
auto population_variance(const Eigen::ArrayBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Scalar mean = a.mean();
  return (a - mean).square().mean();
}

}  // namespace detail

template <typename Scalar>
ScalerState<Scalar> fit_scaler(const PairwiseDifferenceSet<Scalar>& set, const ScalerSpec& spec) {
  if (!(spec.epsilon_floor > 0)) throw InputError("scaler epsilon floor must be positive");
  if (set.diffs.rows() == 0) throw InputError("empty difference set");
  ScalerState<Scalar> st;
  st.spec = spec;
  const double eps = spec.epsilon_floor;
  const auto& d = set.diffs;
  const Index p = set.p;

  auto floor_all = [eps](Vector<Scalar> v) {
    for (Index k = 0; k < v.size(); ++k) v(k) = detail::floored(v(k), eps);
    return v;
  };

  switch (spec.kind) {
    case ScalerKind::None:
      break;
    case ScalerKind::Standardize:
      if (spec.scope == ScalerScope::PerDimension) {
        st.center = d.colwise().mean().transpose();
        Vector<Scalar> sd(p);
        for (Index k = 0; k < p; ++k) {
          sd(k) = std::sqrt(detail::population_variance(d.col(k).array()));
        }
        st.column_scale = floor_all(sd);
      } else if (spec.scope == ScalerScope::GlobalScalar) {
        st.global_center = d.mean();
        st.global_scale =
            detail::floored(std::sqrt(detail::population_variance(d.array())), eps);
      }
      break;
    case ScalerKind::Local: {
      const Index n = set.n;
      if (spec.scope == ScalerScope::PerDimension) {
        st.local_variance.resize(n, p);
        for (Index i = 0; i < n; ++i) {
          const auto g = set.group(i);
          for (Index k = 0; k < p; ++k) {
            st.local_variance(i, k) = detail::population_variance(g.col(k).array());
          }
        }
      } else if (spec.scope == ScalerScope::PerPair) {
        st.local_variance.resize(n, 1);
        for (Index i = 0; i < n; ++i) {
          st.local_variance(i, 0) = detail::population_variance(set.group(i).array());
        }
      } else {
        st.global_scale = detail::floored(
            std::sqrt(Scalar(2) * detail::population_variance(d.array())), eps);
      }
      break;
    }
    case ScalerKind::MaxAbs:
      if (spec.scope == ScalerScope::PerDimension) {
        st.column_scale = floor_all(d.cwiseAbs().colwise().maxCoeff().transpose());
      } else if (spec.scope == ScalerScope::GlobalScalar) {
        st.global_scale = detail::floored(d.cwiseAbs().maxCoeff(), eps);
      }
      break;
    case ScalerKind::Range:
      if (spec.scope == ScalerScope::PerDimension) {
        st.column_scale =
            floor_all((d.colwise().maxCoeff() - d.colwise().minCoeff()).transpose());
      } else if (spec.scope == ScalerScope::GlobalScalar) {
        st.global_scale = detail::floored(d.maxCoeff() - d.minCoeff(), eps);
      }
      break;
  }
  return st;
}

/// Scales the difference d_ij (pair = (i, j), observation indices).
template <typename Scalar, typename Derived>
Vector<Scalar> apply_scaler(const Eigen::MatrixBase<Derived>& d, std::pair<Index, Index> pair,
                            const ScalerState<Scalar>& st) {
  Vector<Scalar> v = d.reshaped().template cast<Scalar>();
  const double eps = st.spec.epsilon_floor;
  const auto [i, j] = pair;

  switch (st.spec.kind) {
    case ScalerKind::None:
      return v;
    case ScalerKind::Standardize:
      if (st.spec.scope == ScalerScope::PerDimension) {
        return ((v - st.center).array() / st.column_scale.array()).matrix();
      }
      if (st.spec.scope == ScalerScope::GlobalScalar) {
        return (v.array() - st.global_center).matrix() / st.global_scale;
      } else {
        const Scalar mean = v.mean();
        const Scalar sd = detail::floored(std::sqrt(detail::population_variance(v.array())), eps);
        return (v.array() - mean).matrix() / sd;
      }
    case ScalerKind::Local:
      if (st.spec.scope == ScalerScope::PerDimension) {
        Vector<Scalar> out(v.size());
        for (Index k = 0; k < v.size(); ++k) {
          const Scalar s =
              std::sqrt(st.local_variance(i, k) + st.local_variance(j, k));
          out(k) = v(k) / detail::floored(s, eps);
        }
        return out;
      }
      if (st.spec.scope == ScalerScope::PerPair) {
        const Scalar s = std::sqrt(st.local_variance(i, 0) + st.local_variance(j, 0));
        return v / detail::floored(s, eps);
      }
      return v / st.global_scale;
    case ScalerKind::MaxAbs:
    case ScalerKind::Range:
      if (st.spec.scope == ScalerScope::PerDimension) {
        return (v.array() / st.column_scale.array()).matrix();
      }
      if (st.spec.scope == ScalerScope::GlobalScalar) return v / st.global_scale;
      {
        const Scalar s = st.spec.kind == ScalerKind::MaxAbs ? v.cwiseAbs().maxCoeff()
                                                             : v.maxCoeff() - v.minCoeff();
        return v / detail::floored(s, eps);
      }
  }
  return v;
}

/// Scaled rows of observation i's group, in group order.
template <typename Scalar>
Matrix<Scalar> scaled_group(const PairwiseDifferenceSet<Scalar>& set, Index i,
                            const ScalerState<Scalar>& st) {
  const auto g = set.group(i);
  if (st.spec.kind == ScalerKind::None) return g;
  Matrix<Scalar> out(g.rows(), g.cols());
  for (Index k = 0; k < g.rows(); ++k) {
    out.row(k) = apply_scaler(g.row(k), {i, PairwiseDifferenceSet<Scalar>::partner(i, k)}, st)
                     .transpose();
  }
  return out;
}

/// Symmetrised pair-product matrix E = (M + M^T) / 2.
template <typename Scalar>
struct AccumulatedE {
  SymmetricMatrix<Scalar> matrix;
  Index n;
  Index num_pairs;
};

/// Accumulates M = sum over observations of the planned products
/// d_(j) d_(k)^T, one observation group at a time.
///
/// For a group with scaled rows r_1..r_{n-1}, the planned pairs (j, j) and
/// (j, k > j) contribute sum_j r_j (r_j + r_{j+1} + ... + r_{n-1})^T, i.e.
/// R^T U with U the inclusive suffix sums of R. This never builds the
/// stacked D1 / D2 matrices.
template <typename Scalar>
AccumulatedE<Scalar> accumulate_E(const DataMatrix<Scalar>& data, const ScalerSpec& spec) {
  const auto set = pairwise_differences(data);
  const auto state = fit_scaler(set, spec);
  const Index n = set.n;
  const Index p = set.p;

  Matrix<Scalar> m = Matrix<Scalar>::Zero(p, p);
  Matrix<Scalar> suffix(n - 1, p);
  for (Index i = 0; i < n; ++i) {
    const Matrix<Scalar> r = scaled_group(set, i, state);
    suffix.row(n - 2) = r.row(n - 2);
    for (Index k = n - 3; k >= 0; --k) suffix.row(k) = suffix.row(k + 1) + r.row(k);
    m.noalias() += r.transpose() * suffix;
  }
  return {SymmetricMatrix<Scalar>(m), n, index_pair_plan(n).total_pairs()};
}

}  // namespace hdpca
