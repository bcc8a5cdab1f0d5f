#include <doctest.h>

#include <cmath>

#include "hdpca/estimators.hpp"
#include "hdpca/pairdiff.hpp"
#include "oracles.hpp"

using namespace hdpca;
using oracle::Mat;
using oracle::Vec;

namespace {

Mat rows(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
  Index i = 0;
  for (const auto& row : r) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

double binom(double n, double k) {
  return std::tgamma(n + 1) / (std::tgamma(k + 1) * std::tgamma(n - k + 1));
}

}  // namespace

TEST_CASE("pairwise differences: hand example and ordering") {
  const DataMatrix<double> data(rows({{1, 2}, {3, 5}}));
  const auto set = pairwise_differences(data);
  REQUIRE(set.diffs.rows() == 2);
  CHECK(set.diffs.row(0).isApprox(rows({{-2, -3}})));
  CHECK(set.diffs.row(1).isApprox(rows({{2, 3}})));
  CHECK(set.row_of(0, 1) == 0);
  CHECK(set.row_of(1, 0) == 1);
}

TEST_CASE("pairwise differences: identical rows give zeros, antisymmetry, zero column mean") {
  const DataMatrix<double> same(rows({{4, 4, 4}, {4, 4, 4}, {4, 4, 4}}));
  CHECK(pairwise_differences(same).diffs.isZero(0));

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mat x = oracle::gaussian(4, 3, seed);
    const auto set = pairwise_differences(DataMatrix<double>(x));
    CHECK(set.diffs.rows() == 12);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) {
        if (i == j) continue;
        const Vec dij = set.diffs.row(set.row_of(i, j)).transpose();
        const Vec dji = set.diffs.row(set.row_of(j, i)).transpose();
        CHECK((dij + dji).norm() == 0.0);
        CHECK((dij - Vec(x.row(i) - x.row(j)).eval()).norm() == 0.0);
      }
    CHECK(set.diffs.colwise().mean().norm() < 1e-12);
  }
}

TEST_CASE("pairwise differences need two observations") {
  CHECK_THROWS_AS(pairwise_differences(DataMatrix<double>(rows({{1, 2}}))), InputError);
  CHECK_THROWS_AS(index_pair_plan(1), InputError);
}

TEST_CASE("index pair plan: explicit small plans") {
  const auto p2 = index_pair_plan(2);
  CHECK(p2.per_observation == std::vector<std::pair<Index, Index>>{{0, 0}});
  CHECK(p2.total_pairs() == 2);

  const auto p3 = index_pair_plan(3);
  CHECK(p3.per_observation == std::vector<std::pair<Index, Index>>{{0, 0}, {1, 1}, {0, 1}});
  CHECK(p3.total_pairs() == 9);
  CHECK(index_pair_plan(5).total_pairs() == 50);
}

TEST_CASE("index pair plan: count matches n(n-1) + n*C(n-1,2) and the factorial form") {
  for (Index n = 2; n <= 12; ++n) {
    const double nd = static_cast<double>(n);
    const double expect = nd * (nd - 1) + nd * binom(nd - 1, 2);
    // n! / (n-2)! + n! / (2! (n-3)!), the second term absent for n < 3
    double factorial_form = std::tgamma(nd + 1) / std::tgamma(nd - 1);
    if (n >= 3) factorial_form += std::tgamma(nd + 1) / (2.0 * std::tgamma(nd - 2));
    const auto plan = index_pair_plan(n);
    CHECK(static_cast<double>(plan.total_pairs()) == doctest::Approx(expect));
    CHECK(static_cast<double>(plan.total_pairs()) == doctest::Approx(factorial_form));
    for (auto [j, k] : plan.per_observation) {
      CHECK(j <= k);
      CHECK(k < n - 1);
    }
  }
}

TEST_CASE("STANDARDIZE per dimension: scaled columns have mean 0 and std 1") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mat x = oracle::gaussian(4, 3, seed) * 7.0;
    const auto set = pairwise_differences(DataMatrix<double>(x));
    const auto st = fit_scaler(set, {ScalerKind::Standardize, ScalerScope::PerDimension});
    CHECK(st.center.cwiseAbs().maxCoeff() <= 1e-12);
    Mat scaled(set.diffs.rows(), 3);
    for (Index i = 0; i < 4; ++i) {
      const Mat g = scaled_group(set, i, st);
      for (Index k = 0; k < 3; ++k) scaled.row(set.row_of(i, set.partner(i, k))) = g.row(k);
    }
    for (Index c = 0; c < 3; ++c) {
      const double mean = scaled.col(c).mean();
      const double sd = std::sqrt((scaled.col(c).array() - mean).square().mean());
      CHECK(std::abs(mean) < 1e-12);
      CHECK(std::abs(sd - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("RANGE and MAXABS global scales") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mat x = oracle::gaussian(5, 4, seed);
    const auto set = pairwise_differences(DataMatrix<double>(x));
    const double maxabs = set.diffs.cwiseAbs().maxCoeff();
    const auto range = fit_scaler(set, {ScalerKind::Range, ScalerScope::GlobalScalar});
    CHECK(range.global_scale == doctest::Approx(2.0 * maxabs));
    const auto ma = fit_scaler(set, {ScalerKind::MaxAbs, ScalerScope::GlobalScalar});
    CHECK(ma.global_scale == maxabs);
  }

  const auto set = pairwise_differences(DataMatrix<double>(rows({{0, 0}, {2, -4}})));
  const auto st = fit_scaler(set, {ScalerKind::MaxAbs, ScalerScope::GlobalScalar});
  const Vec v = apply_scaler(Vec(rows({{2, -4}}).row(0).transpose()), {1, 0}, st);
  CHECK(v(0) == 0.5);
  CHECK(v(1) == -1.0);
}

TEST_CASE("LOCAL per dimension: per-observation variances by hand") {
  // obs 0: (-2,-2), (-5,2)  obs 1: (2,2), (-3,4)  obs 2: (5,-2), (3,-4)
  const auto set = pairwise_differences(DataMatrix<double>(rows({{0, 1}, {2, 3}, {5, -1}})));
  const auto st = fit_scaler(set, {ScalerKind::Local, ScalerScope::PerDimension});
  const Mat expect = rows({{2.25, 4}, {6.25, 1}, {1, 1}});
  CHECK((st.local_variance - expect).cwiseAbs().maxCoeff() < 1e-12);

  const Vec d01 = set.diffs.row(set.row_of(0, 1)).transpose();
  const Vec scaled = apply_scaler(d01, {0, 1}, st);
  CHECK(scaled(0) == doctest::Approx(-2.0 / std::sqrt(2.25 + 6.25)));
  CHECK(scaled(1) == doctest::Approx(-2.0 / std::sqrt(4.0 + 1.0)));
}

TEST_CASE("scale floor: constant columns divide by 1, not by 0") {
  const auto set = pairwise_differences(DataMatrix<double>(rows({{1, 5}, {2, 5}, {4, 5}})));
  for (auto kind : {ScalerKind::Standardize, ScalerKind::MaxAbs, ScalerKind::Range}) {
    const auto st = fit_scaler(set, {kind, ScalerScope::PerDimension});
    CHECK(st.column_scale(1) == 1.0);
  }
  const auto local = fit_scaler(set, {ScalerKind::Local, ScalerScope::PerDimension});
  for (Index i = 0; i < 3; ++i) CHECK(scaled_group(set, i, local).allFinite());
  CHECK_THROWS_AS(fit_scaler(set, {ScalerKind::Range, ScalerScope::PerDimension, 0.0}), InputError);
}

TEST_CASE("accumulate_E: n = 2, p = 1 hand example") {
  // diffs -2 and 2, one planned pair (0,0) per observation: E = 4 + 4
  const auto acc = accumulate_E(DataMatrix<double>(rows({{0}, {2}})), ScalerSpec{});
  CHECK(acc.matrix(0, 0) == 8.0);
  CHECK(acc.num_pairs == 2);
}

TEST_CASE("accumulate_E equals the explicit stacked construction") {
  for (Index n = 2; n <= 8; ++n)
    for (Index p = 1; p <= 6; ++p)
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Mat x = oracle::gaussian(n, p, 1000 * seed + 10 * static_cast<std::uint64_t>(n) +
                                                 static_cast<std::uint64_t>(p));
        const auto acc = accumulate_E(DataMatrix<double>(x), ScalerSpec{});
        const Mat e = oracle::explicit_e(x);
        CHECK(oracle::rel_frobenius(acc.matrix.values(), e) < 1e-12);
        CHECK(acc.num_pairs == index_pair_plan(n).total_pairs());
      }
}

TEST_CASE("accumulate_E equals the explicit construction for every scaler") {
  const std::vector<ScalerSpec> specs = {
      {ScalerKind::Standardize, ScalerScope::PerDimension},
      {ScalerKind::Standardize, ScalerScope::GlobalScalar},
      {ScalerKind::Standardize, ScalerScope::PerPair},
      {ScalerKind::Local, ScalerScope::PerDimension},
      {ScalerKind::Local, ScalerScope::GlobalScalar},
      {ScalerKind::Local, ScalerScope::PerPair},
      {ScalerKind::MaxAbs, ScalerScope::PerDimension},
      {ScalerKind::MaxAbs, ScalerScope::GlobalScalar},
      {ScalerKind::MaxAbs, ScalerScope::PerPair},
      {ScalerKind::Range, ScalerScope::PerDimension},
      {ScalerKind::Range, ScalerScope::GlobalScalar},
      {ScalerKind::Range, ScalerScope::PerPair},
  };
  for (const auto& spec : specs)
    for (Index n = 2; n <= 7; ++n)
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Mat x = oracle::gaussian(n, 4, 77 * seed + static_cast<std::uint64_t>(n));
        const auto acc = accumulate_E(DataMatrix<double>(x), spec);
        CHECK(oracle::rel_frobenius(acc.matrix.values(), oracle::explicit_e(x, spec)) < 1e-12);
      }
}

TEST_CASE("unscaled E = n^2 (n+2) / 2 * S_MLE") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 7);
    const Mat x = oracle::gaussian(n, 3, seed);
    const auto acc = accumulate_E(DataMatrix<double>(x), ScalerSpec{});
    const double nd = static_cast<double>(n);
    const Mat expect = nd * nd * (nd + 2) / 2.0 * oracle::mle_by_pairs(x);
    CHECK(oracle::rel_frobenius(acc.matrix.values(), expect) < 1e-10);
  }
}

TEST_CASE("a global scalar scaler rescales E by c^-2") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mat x = oracle::gaussian(6, 4, seed);
    const DataMatrix<double> data(x);
    const auto set = pairwise_differences(data);
    const ScalerSpec spec{ScalerKind::MaxAbs, ScalerScope::GlobalScalar};
    const double c = fit_scaler(set, spec).global_scale;
    const Mat scaled = accumulate_E(data, spec).matrix.values();
    const Mat plain = accumulate_E(data, ScalerSpec{}).matrix.values();
    CHECK(oracle::rel_frobenius(scaled, plain / (c * c)) < 1e-12);
  }
}
