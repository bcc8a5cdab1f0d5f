#pragma once

#include <vector>

#include "hdpca/core.hpp"

namespace hdpca {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail P(F > f) of the F(df1, df2) distribution.
double f_distribution_sf(double f, double df1, double df2);

struct LeveneResult {
  double statistic = 0;
  double p_value = 1;
  Index df1 = 0;
  Index df2 = 0;
  std::vector<Index> group_sizes;
  bool p_value_underflow = false;  // p < 1e-300, reported as 0
};

/// Classic (mean-centred) Levene test for equal variances across groups.
LeveneResult levene_test(const std::vector<Vector<double>>& groups);

/// Diagonal entries and upper-triangle entries of two matrices, as Levene groups.
struct ElementGroups {
  std::vector<Vector<double>> diagonal;
  std::vector<Vector<double>> off_diagonal;
};

ElementGroups matrix_element_groups(const SymmetricMatrix<double>& a,
                                    const SymmetricMatrix<double>& b);

}  // namespace hdpca
