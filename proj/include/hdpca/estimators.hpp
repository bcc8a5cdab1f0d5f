#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "hdpca/core.hpp"
#include "hdpca/pairdiff.hpp"

namespace hdpca {

struct EstimatorSpec {
  Method method = Method::Mle;
  PdcNormalization normalization = PdcNormalization::Listing;
  std::optional<ScalerScope> scope{};   // overrides the method's default scope
  std::optional<double> epsilon_floor{};  // overrides ScalerSpec::epsilon_floor

  ScalerSpec scaler() const {
    ScalerSpec s = default_scaler(method);
    if (scope) s.scope = *scope;
    if (epsilon_floor) s.epsilon_floor = *epsilon_floor;
    return s;
  }
};

/// Column-centred data.
template <typename Scalar>
Matrix<Scalar> centered(const DataMatrix<Scalar>& data) {
  return data.values().rowwise() - data.values().colwise().mean();
}

/// Sample covariance with denominator n.
template <typename Scalar>
CovarianceEstimate<Scalar> estimate_mle(const DataMatrix<Scalar>& data) {
  const Index n = data.rows();
  if (n < 2) throw InputError("need at least 2 observations");
  const Matrix<Scalar> c = centered(data);
  Matrix<Scalar> s = (c.transpose() * c) / Scalar(n);
  return {SymmetricMatrix<Scalar>(s), Method::Mle, n};
}

template <typename Scalar>
struct LedoitWolfFit {
  CovarianceEstimate<Scalar> estimate;
  Scalar shrinkage;  // weight on the mu * I target, in [0, 1]
  Scalar target_scale;
};

/// Linear shrinkage of the sample covariance S toward mu * I, mu = tr(S) / p,
/// with the Ledoit-Wolf (2004) plug-in intensity:
///   d^2  = ||S - mu I||_F^2 / p
///   b^2  = min(d^2, sum_k ||c_k c_k^T - S||_F^2 / (n^2 p))
///   delta = b^2 / d^2
template <typename Scalar>
LedoitWolfFit<Scalar> ledoit_wolf_fit(const DataMatrix<Scalar>& data) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n < 2) throw InputError("need at least 2 observations");
  const Matrix<Scalar> c = centered(data);
  const Matrix<Scalar> s = (c.transpose() * c) / Scalar(n);
  const Scalar mu = s.trace() / Scalar(p);

  Matrix<Scalar> dev = s;
  dev.diagonal().array() -= mu;
  const Scalar d2 = dev.squaredNorm() / Scalar(p);

  // ||c c^T - S||_F^2 = ||c||^4 - 2 c^T S c + ||S||_F^2
  const Scalar s_norm2 = s.squaredNorm();
  Scalar b_bar2 = 0;
  for (Index k = 0; k < n; ++k) {
    const auto ck = c.row(k).transpose();
    const Scalar len2 = ck.squaredNorm();
    b_bar2 += len2 * len2 - Scalar(2) * ck.dot(s * ck) + s_norm2;
  }
  b_bar2 /= Scalar(n) * Scalar(n) * Scalar(p);
  b_bar2 = std::max(b_bar2, Scalar(0));

  Scalar delta = 0;
  if (d2 > Scalar(0)) delta = std::clamp(std::min(b_bar2, d2) / d2, Scalar(0), Scalar(1));

  Matrix<Scalar> shrunk = (Scalar(1) - delta) * s;
  shrunk.diagonal().array() += delta * mu;
  return {{SymmetricMatrix<Scalar>(shrunk), Method::LedoitWolf, n}, delta, mu};
}

template <typename Scalar>
CovarianceEstimate<Scalar> estimate_ledoit_wolf(const DataMatrix<Scalar>& data) {
  return ledoit_wolf_fit(data).estimate;
}

/// Normalising constant for the accumulated matrix E.
inline double pdc_normalizer(PdcNormalization norm, Index n, Index num_pairs) {
  const double nd = static_cast<double>(n);
  if (norm == PdcNormalization::Eq1) return 2.0 / (nd * nd * (nd - 1.0));
  return 1.0 / (nd * static_cast<double>(num_pairs));
}

template <typename Scalar>
CovarianceEstimate<Scalar> estimate_pdc_family(const DataMatrix<Scalar>& data,
                                               const EstimatorSpec& spec) {
  if (!is_pdc_family(spec.method)) {
    throw InputError("estimate_pdc_family: " + std::string(to_string(spec.method)) +
                     " is not a PDC-family method");
  }
  if (data.rows() < 2) throw InputError("need at least 2 observations");
  const ScalerSpec scaler = spec.scaler();
  auto acc = accumulate_E(data, scaler);
  const Scalar c = Scalar(pdc_normalizer(spec.normalization, acc.n, acc.num_pairs));
  return {SymmetricMatrix<Scalar>(c * acc.matrix.values()), spec.method, acc.n, scaler};
}

template <typename Scalar>
CovarianceEstimate<Scalar> estimate(const DataMatrix<Scalar>& data, const EstimatorSpec& spec) {
  switch (spec.method) {
    case Method::Mle: return estimate_mle(data);
    case Method::LedoitWolf: return estimate_ledoit_wolf(data);
    case Method::Pop: throw InputError("POP is not an estimator");
    default: return estimate_pdc_family(data, spec);
  }
}

}  // namespace hdpca
