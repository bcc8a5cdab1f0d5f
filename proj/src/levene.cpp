#include "hdpca/levene.hpp"

#include <cmath>
#include <limits>

namespace hdpca {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz). Converges fast for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw InputError("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InputError("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double f, double df1, double df2) {
  if (!(df1 > 0) || !(df2 > 0)) throw InputError("F distribution: degrees of freedom must be positive");
  if (std::isnan(f)) throw InputError("F distribution: statistic is NaN");
  if (f <= 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

LeveneResult levene_test(const std::vector<Vector<double>>& groups) {
  const auto k = static_cast<Index>(groups.size());
  if (k < 2) throw InputError("levene_test: need at least 2 groups");

  LeveneResult out;
  std::vector<Vector<double>> dev;
  dev.reserve(groups.size());
  Index total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw InputError("levene_test: every group needs at least 2 points");
    if (!g.allFinite()) throw InputError("levene_test: non-finite value");
    dev.push_back((g.array() - g.mean()).abs().matrix());
    out.group_sizes.push_back(g.size());
    total += g.size();
  }

  double grand = 0;
  for (const auto& z : dev) grand += z.sum();
  grand /= static_cast<double>(total);

  double between = 0;
  double within = 0;
  for (const auto& z : dev) {
    const double zm = z.mean();
    between += static_cast<double>(z.size()) * (zm - grand) * (zm - grand);
    within += (z.array() - zm).square().sum();
  }

  out.df1 = k - 1;
  out.df2 = total - k;
  if (between == 0.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  if (within == 0.0) {
    out.statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    out.p_value_underflow = true;
    return out;
  }
  out.statistic = (static_cast<double>(out.df2) / static_cast<double>(out.df1)) * between / within;
  double p = f_distribution_sf(out.statistic, static_cast<double>(out.df1),
                               static_cast<double>(out.df2));
  if (p < 1e-300) {
    p = 0.0;
    out.p_value_underflow = true;
  }
  out.p_value = std::clamp(p, 0.0, 1.0);
  return out;
}

ElementGroups matrix_element_groups(const SymmetricMatrix<double>& a,
                                    const SymmetricMatrix<double>& b) {
  if (a.dim() != b.dim()) throw InputError("matrix_element_groups: dimension mismatch");
  const Index p = a.dim();
  if (p < 2) throw InputError("matrix_element_groups: need p >= 2");
  ElementGroups out;
  for (const auto* m : {&a, &b}) {
    out.diagonal.emplace_back(m->values().diagonal());
    Vector<double> upper(p * (p - 1) / 2);
    Index idx = 0;
    for (Index i = 0; i < p; ++i) {
      for (Index j = i + 1; j < p; ++j) upper(idx++) = (*m)(i, j);
    }
    out.off_diagonal.push_back(std::move(upper));
  }
  return out;
}

}  // namespace hdpca
