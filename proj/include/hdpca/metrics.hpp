#pragma once

#include <cmath>

#include "hdpca/core.hpp"

namespace hdpca {

/// Per-replicate comparison of one sample PC against its population PC.
struct PcMetrics {
  Method method = Method::Mle;
  Index pc_index = 1;  // 1-based
  double explained_pct = 0;
  double cse = 0;
  double overdispersion = 0;
};

/// Eigenvalues with round-off negatives (|lambda| <= 1e-10 lambda_max) set to 0.
template <typename Scalar>
Vector<Scalar> clamped_spectrum(const EigenSystem<Scalar>& eig) {
  Vector<Scalar> lam = eig.values;
  if (lam.size() == 0) return lam;
  const Scalar top = std::max(lam.maxCoeff(), Scalar(0));
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < Scalar(0)) {
      if (-lam(i) > Scalar(1e-10) * top) {
        throw NumericalError("spectrum has a negative eigenvalue beyond round-off");
      }
      lam(i) = 0;
    }
  }
  return lam;
}

/// lambda_i / sum(lambda); sums to 1.
template <typename Scalar>
Vector<Scalar> explained_variance_proportions(const EigenSystem<Scalar>& eig) {
  const Vector<Scalar> lam = clamped_spectrum(eig);
  const Scalar total = lam.sum();
  if (!(total > Scalar(0))) throw InputError("degenerate spectrum");
  return lam / total;
}

/// 1 - |cos(angle)|; invariant to the sign and length of either vector.
template <typename DerivedA, typename DerivedB>
double cosine_similarity_error(const Eigen::MatrixBase<DerivedA>& pc_hat,
                               const Eigen::MatrixBase<DerivedB>& pc_pop) {
  if (pc_hat.size() != pc_pop.size()) throw InputError("cosine_similarity_error: length mismatch");
  const double na = static_cast<double>(pc_hat.norm());
  const double nb = static_cast<double>(pc_pop.norm());
  if (!(na > 0) || !(nb > 0)) throw InputError("cosine_similarity_error: zero vector");
  const double c = static_cast<double>(pc_hat.reshaped().dot(pc_pop.reshaped())) / (na * nb);
  return 1.0 - std::min(1.0, std::abs(c));
}

/// (pi_hat - pi_pop)^2 * p / (n - 1).
inline double overdispersion(double pi_hat, double pi_pop, Index p, Index n) {
  if (n < 2) throw InputError("overdispersion: need n >= 2");
  const double d = pi_hat - pi_pop;
  return d * d * static_cast<double>(p) / static_cast<double>(n - 1);
}

/// Metrics for PC `pc_index` (1-based) of a sample eigensystem against the population's.
template <typename Scalar>
PcMetrics pc_metrics(const EigenSystem<Scalar>& sample, const EigenSystem<Scalar>& population,
                     Method method, Index pc_index, Index n) {
  if (sample.dim() != population.dim()) throw InputError("pc_metrics: dimension mismatch");
  if (pc_index < 1 || pc_index > sample.dim()) throw InputError("pc_metrics: PC index out of range");
  const Index k = pc_index - 1;
  const double pi_hat = static_cast<double>(explained_variance_proportions(sample)(k));
  const double pi_pop = static_cast<double>(explained_variance_proportions(population)(k));
  PcMetrics out;
  out.method = method;
  out.pc_index = pc_index;
  out.explained_pct = 100.0 * pi_hat;
  out.cse = cosine_similarity_error(sample.vectors.col(k), population.vectors.col(k));
  out.overdispersion = overdispersion(pi_hat, pi_pop, sample.dim(), n);
  return out;
}

}  // namespace hdpca
