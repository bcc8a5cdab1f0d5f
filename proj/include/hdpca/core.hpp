#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hdpca/errors.hpp"
#include "hdpca/tags.hpp"

namespace hdpca {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Rank cutoff relative to the largest eigenvalue.
inline constexpr double kDefaultRankTolerance = 1e-10;

/// n x p observations (rows) by dimensions (columns), with optional labels.
template <typename Scalar>
class DataMatrix {
 public:
  template <typename Derived>
  explicit DataMatrix(const Eigen::MatrixBase<Derived>& values,
                      std::vector<std::string> row_labels = {},
                      std::vector<std::string> column_labels = {})
      : values_(values),
        row_labels_(std::move(row_labels)),
        column_labels_(std::move(column_labels)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
      throw InputError("data matrix needs at least one row and one column");
    }
    if (!values_.allFinite()) throw InputError("data matrix has non-finite entries");
    if (!row_labels_.empty() && static_cast<Index>(row_labels_.size()) != values_.rows()) {
      throw InputError("row label count does not match row count");
    }
    if (!column_labels_.empty() &&
        static_cast<Index>(column_labels_.size()) != values_.cols()) {
      throw InputError("column label count does not match column count");
    }
  }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  const Matrix<Scalar>& values() const { return values_; }
  auto row(Index i) const { return values_.row(i); }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& column_labels() const { return column_labels_; }

 private:
  Matrix<Scalar> values_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> column_labels_;
};

/// Square symmetric matrix. Input is symmetrised as (A + A^T) / 2.
template <typename Scalar>
class SymmetricMatrix {
 public:
  template <typename Derived>
  explicit SymmetricMatrix(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw InputError("symmetric matrix must be square");
    if (!m.allFinite()) throw InputError("symmetric matrix has non-finite entries");
    values_ = (m + m.transpose()) / Scalar(2);
  }

  static SymmetricMatrix zero(Index p) { return SymmetricMatrix(Matrix<Scalar>::Zero(p, p)); }
  static SymmetricMatrix identity(Index p) {
    return SymmetricMatrix(Matrix<Scalar>::Identity(p, p));
  }

  Index dim() const { return values_.rows(); }
  const Matrix<Scalar>& values() const { return values_; }
  Scalar operator()(Index i, Index j) const { return values_(i, j); }

 private:
  Matrix<Scalar> values_;
};

/// A covariance matrix tagged with the estimator that produced it.
template <typename Scalar>
struct CovarianceEstimate {
  CovarianceEstimate(SymmetricMatrix<Scalar> m, Method method_, Index n, ScalerSpec scaler_ = {})
      : matrix(std::move(m)), method(method_), n_used(n), scaler(scaler_) {
    if ((matrix.values().diagonal().array() < Scalar(-1e-10)).any()) {
      throw NumericalError("covariance estimate has a negative variance");
    }
  }

  SymmetricMatrix<Scalar> matrix;
  Method method;
  Index n_used;
  ScalerSpec scaler;
};

/// Eigenvalues in non-increasing order; column i of `vectors` pairs with values(i).
/// Each vector is signed so that its largest-magnitude component is positive.
template <typename Scalar>
struct EigenSystem {
  Vector<Scalar> values;
  Matrix<Scalar> vectors;

  Index dim() const { return values.size(); }
};

template <typename Scalar>
EigenSystem<Scalar> sym_eigen(const SymmetricMatrix<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.values());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver did not converge");
  }
  const Index p = m.dim();
  EigenSystem<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < p; ++k) {
    auto v = out.vectors.col(k);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < Scalar(0)) v = -v;
  }
  return out;
}

template <typename Scalar>
Scalar frobenius_distance(const SymmetricMatrix<Scalar>& a, const SymmetricMatrix<Scalar>& b) {
  if (a.dim() != b.dim()) throw InputError("frobenius_distance: dimension mismatch");
  return (a.values() - b.values()).norm();
}

template <typename Scalar>
Index numerical_rank(const EigenSystem<Scalar>& eig, double tol = kDefaultRankTolerance) {
  if (!(tol > 0)) throw InputError("numerical_rank: tolerance must be positive");
  if (eig.dim() == 0) return 0;
  const Scalar cutoff = Scalar(tol) * std::max(eig.values(0), Scalar(0));
  return (eig.values.array() > cutoff).count();
}

template <typename Scalar>
Index numerical_rank(const SymmetricMatrix<Scalar>& m, double tol = kDefaultRankTolerance) {
  return numerical_rank(sym_eigen(m), tol);
}

/// lambda_max / lambda_min, or +infinity when lambda_min is not above the
/// rank cutoff (tol * lambda_max).
template <typename Scalar>
Scalar condition_number(const EigenSystem<Scalar>& eig, double tol = kDefaultRankTolerance) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (eig.dim() == 0) return inf;
  const Scalar hi = eig.values(0);
  const Scalar lo = eig.values(eig.dim() - 1);
  if (!(hi > 0) || !(lo > Scalar(tol) * hi)) return inf;
  return hi / lo;
}

template <typename Scalar>
Scalar condition_number(const SymmetricMatrix<Scalar>& m, double tol = kDefaultRankTolerance) {
  return condition_number(sym_eigen(m), tol);
}

}  // namespace hdpca
