// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "hdpca/cli.hpp"
#include "hdpca/estimators.hpp"
#include "hdpca/levene.hpp"
#include "hdpca/metrics.hpp"
#include "hdpca/simlab.hpp"
#include "oracles.hpp"

using namespace hdpca;
using oracle::Mat;
using oracle::Vec;

namespace {

constexpr std::uint64_t kSigmaSeed = 1;
constexpr std::uint64_t kMasterSeed = 2;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int k, const std::string& title, double budget_seconds,
               const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_seconds <= 0 || secs < budget_seconds;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof(timing), "%.2fs", secs);
  std::string line = std::string(pass ? "[PASS]" : "[FAIL]") + " criterion " + std::to_string(k) +
                     ": " + title + " (" + timing;
  if (budget_seconds > 0) line += ", limit " + std::to_string(static_cast<int>(budget_seconds)) + "s";
  line += ")";
  if (!out.detail.empty()) line += " -- " + out.detail;
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Significant decimal digits on which a and b agree.
double agreeing_digits(double a, double b) {
  if (a == b) return 17;
  return -std::log10(std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const Eigen::Map<const Vec> a(rx.data(), static_cast<Index>(rx.size()));
  const Eigen::Map<const Vec> b(ry.data(), static_cast<Index>(ry.size()));
  const Vec ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tracks the first violation of an ordering claim.
struct Ordering {
  bool ok = true;
  std::string first;
  void check(bool holds, const std::string& what) {
    if (!holds && ok) {
      ok = false;
      first = what;
    }
  }
};

}  // namespace

int main() {
  std::printf("acceptance: sigma_seed=%llu master_seed=%llu\n",
              static_cast<unsigned long long>(kSigmaSeed), static_cast<unsigned long long>(kMasterSeed));

  criterion(1, "streaming accumulation equals the explicit stacked product", 10, [] {
    double worst = 0;
    for (Index n = 2; n <= 8; ++n)
      for (Index p = 1; p <= 6; ++p)
        for (std::uint64_t s = 0; s < 20; ++s) {
          const Mat x = oracle::gaussian(n, p, derive_seed(kMasterSeed, static_cast<std::uint64_t>(n * 10 + p), s));
          const auto acc = accumulate_E(DataMatrix<double>(x), ScalerSpec{});
          worst = std::max(worst, oracle::rel_frobenius(acc.matrix.values(), oracle::explicit_e(x)));
        }
    return Outcome{worst < 1e-12, "max relative Frobenius error " + fmt(worst) + " over 840 cases"};
  });

  criterion(2, "EQ1-normalised PDC equals (n+2)/(n-1) * MLE; PC1 shares agree", 30, [] {
    double worst = 0, fewest_digits = 17;
    for (Index n = 3; n <= 10; ++n)
      for (Index p = 2; p <= 30; ++p)
        for (std::uint64_t s = 0; s < 10; ++s) {
          const DataMatrix<double> data(
              oracle::gaussian(n, p, derive_seed(kMasterSeed + 1, static_cast<std::uint64_t>(n * 100 + p), s)));
          const auto mle = estimate_mle(data);
          const auto pdc = estimate_pdc_family(data, {Method::Pdc, PdcNormalization::Eq1});
          const double c = static_cast<double>(n + 2) / static_cast<double>(n - 1);
          worst = std::max(worst, oracle::rel_frobenius(pdc.matrix.values(), c * mle.matrix.values()));
          const double a = explained_variance_proportions(sym_eigen(mle.matrix))(0);
          const double b = explained_variance_proportions(sym_eigen(pdc.matrix))(0);
          fewest_digits = std::min(fewest_digits, agreeing_digits(a, b));
        }
    return Outcome{worst < 1e-10 && fewest_digits >= 10,
                   "max relative error " + fmt(worst) + ", PC1 share agrees to >= " + fmt(fewest_digits) +
                       " significant digits (2320 cases)"};
  });

  // Shared synthetic sweep for criteria 3 to 5.
  ExperimentConfig cfg;
  cfg.p = 20;
  for (Index n = 3; n <= 20; ++n) cfg.n_values.push_back(n);
  cfg.m = 500;
  cfg.estimators = {{Method::Mle}, {Method::LedoitWolf}, {Method::Spdc}, {Method::Rpdc}};
  cfg.sigma_seed = kSigmaSeed;
  cfg.master_seed = kMasterSeed;
  std::optional<SweepResult> sweep;
  double sweep_seconds = 0;
  std::string sweep_error;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sweep = run_sweep(cfg, resolve_threads(0));
    } catch (const std::exception& e) {
      sweep_error = e.what();
    }
    sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance: synthetic sweep p=20, n=3..20, m=500 took %.1fs\n", sweep_seconds);
  }

  criterion(3, "overdispersion ordering: SPDC < MLE, RPDC < MLE (all n), LW > MLE (n >= 5)", 0, [&] {
    if (!sweep) return Outcome{false, "sweep failed: " + sweep_error};
    if (sweep_seconds >= 600) return Outcome{false, "sweep exceeded 10 min"};
    Ordering o;
    for (Index n : cfg.n_values) {
      const double mle = sweep->cell(n, Method::Mle, 1).overdispersion;
      const double spdc = sweep->cell(n, Method::Spdc, 1).overdispersion;
      const double rpdc = sweep->cell(n, Method::Rpdc, 1).overdispersion;
      const double lw = sweep->cell(n, Method::LedoitWolf, 1).overdispersion;
      const std::string at = " at n=" + std::to_string(n) + " (MLE " + fmt(mle);
      o.check(spdc < mle, "SPDC " + fmt(spdc) + " >= MLE" + at + ")");
      o.check(rpdc < mle, "RPDC " + fmt(rpdc) + " >= MLE" + at + ")");
      if (n >= 5) o.check(lw > mle, "LW " + fmt(lw) + " <= MLE" + at + ")");
    }
    return Outcome{o.ok, o.ok ? "holds for n=3..20; sweep " + fmt(sweep_seconds) + "s" : o.first};
  });

  criterion(4, "explained variance of PC1: LW < POP < MLE for n >= 4", 0, [&] {
    if (!sweep) return Outcome{false, "sweep failed: " + sweep_error};
    Ordering o;
    for (Index n : cfg.n_values) {
      if (n < 4) continue;
      const double pop = sweep->cell(n, Method::Pop, 1).explained_pct;
      const double mle = sweep->cell(n, Method::Mle, 1).explained_pct;
      const double lw = sweep->cell(n, Method::LedoitWolf, 1).explained_pct;
      o.check(lw < pop && pop < mle, "n=" + std::to_string(n) + ": LW " + fmt(lw) + ", POP " + fmt(pop) +
                                         ", MLE " + fmt(mle));
    }
    return Outcome{o.ok, o.ok ? "holds for n=4..20" : o.first};
  });

  criterion(5, "CSE: SPDC < MLE for n=5..20; MLE CSE falls with n (Spearman <= -0.8)", 0, [&] {
    if (!sweep) return Outcome{false, "sweep failed: " + sweep_error};
    Ordering o;
    std::vector<double> ns, mle_cse;
    for (Index n : cfg.n_values) {
      const double mle = sweep->cell(n, Method::Mle, 1).cse;
      ns.push_back(static_cast<double>(n));
      mle_cse.push_back(mle);
      if (n >= 5) {
        const double spdc = sweep->cell(n, Method::Spdc, 1).cse;
        o.check(spdc < mle, "n=" + std::to_string(n) + ": SPDC " + fmt(spdc) + " >= MLE " + fmt(mle));
      }
    }
    const double rho = spearman(ns, mle_cse);
    o.check(rho <= -0.8, "Spearman rho " + fmt(rho));
    return Outcome{o.ok, o.ok ? "Spearman rho " + fmt(rho) : o.first};
  });

  criterion(6, "fixture protocol: CSE SPDC < MLE and overdispersion RPDC < MLE for n=5..15", 300, [] {
    ExperimentConfig fc;
    for (Index n = 5; n <= 15; ++n) fc.n_values.push_back(n);
    fc.m = 100;
    fc.estimators = {{Method::Mle}, {Method::Spdc}, {Method::Rpdc}};
    fc.master_seed = kMasterSeed;
    fc.data_source = {DataSource::Kind::File, HDPCA_FIXTURE, std::nullopt};
    const Population pop = make_population(fc);
    fc.p = pop.sigma.dim();
    const auto res = run_sweep(fc, pop, resolve_threads(0));
    Ordering o;
    for (Index n : fc.n_values) {
      const auto& mle = res.cell(n, Method::Mle, 1);
      const auto& spdc = res.cell(n, Method::Spdc, 1);
      const auto& rpdc = res.cell(n, Method::Rpdc, 1);
      o.check(spdc.cse < mle.cse,
              "n=" + std::to_string(n) + ": CSE SPDC " + fmt(spdc.cse) + " >= MLE " + fmt(mle.cse));
      o.check(rpdc.overdispersion < mle.overdispersion, "n=" + std::to_string(n) + ": overdispersion RPDC " +
                                                            fmt(rpdc.overdispersion) + " >= MLE " +
                                                            fmt(mle.overdispersion));
    }
    return Outcome{o.ok, o.ok ? "holds for n=5..15 (p=" + std::to_string(fc.p) + ")" : o.first};
  });

  criterion(7, "metric identities and scale invariance", 0, [] {
    Ordering o;
    const Vec e0 = Vec::Unit(4, 0), e1 = Vec::Unit(4, 1);
    o.check(cosine_similarity_error(e0, e0) == 0.0, "CSE(identical) != 0");
    o.check(cosine_similarity_error(e0, e1) == 1.0, "CSE(orthogonal) != 1");
    o.check(cosine_similarity_error(e0, Vec(-e0)) == 0.0, "CSE(antiparallel) != 0");
    o.check(overdispersion(0.37, 0.37, 20, 8) == 0.0, "overdispersion(pi_hat = pi) != 0");
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const Mat g = oracle::gaussian(8, 8, derive_seed(kMasterSeed, 7, s));
      const Mat h = oracle::gaussian(8, 8, derive_seed(kMasterSeed, 77, s));
      const SymmetricMatrix<double> pop(g * g.transpose()), sample(h * h.transpose());
      const auto pe = sym_eigen(pop), se = sym_eigen(sample);
      const double sum = explained_variance_proportions(se).sum();
      o.check(std::abs(sum - 1.0) <= 1e-8, "proportions sum to " + fmt(sum));
      const auto base = pc_metrics(se, pe, Method::Mle, 1, 8);
      const auto scaled = pc_metrics(sym_eigen(SymmetricMatrix<double>(1e3 * sample.values())),
                                     sym_eigen(SymmetricMatrix<double>(1e-2 * pop.values())), Method::Mle, 1, 8);
      o.check(std::abs(scaled.explained_pct - base.explained_pct) <= 1e-10 * base.explained_pct &&
                  std::abs(scaled.overdispersion - base.overdispersion) <= 1e-9 * std::max(base.overdispersion, 1e-12) &&
                  std::abs(scaled.cse - base.cse) <= 1e-9,
              "metrics changed under rescaling (seed " + std::to_string(s) + ")");
    }
    return Outcome{o.ok, o.ok ? "" : o.first};
  });

  criterion(8, "Levene statistic and p-value against the exact two-group oracle", 0, [] {
    Vec a(4), b(4);
    a << 1, 2, 3, 4;
    b << 10, 20, 30, 40;
    const auto r = levene_test({a, b});
    // absolute deviations {1.5, .5, .5, 1.5} and {15, 5, 5, 15}: F = 972/101 on (1, 6) df
    const double f = 972.0 / 101.0;
    const double y = 6.0 / (6.0 + f);
    const double p = 1.0 - std::sqrt(1.0 - y) * (1.0 + y / 2.0 + 3.0 * y * y / 8.0);
    const auto same = levene_test({a, a});
    const bool ok = std::abs(r.statistic - f) <= 1e-10 * f && std::abs(r.p_value - p) <= 1e-8 &&
                    same.statistic == 0.0 && same.p_value == 1.0;
    return Outcome{ok, "F " + fmt(r.statistic) + " vs " + fmt(f) + ", p " + fmt(r.p_value) + " vs " + fmt(p)};
  });

  criterion(9, "sampler: N(0, I) covariance converges; 1 vs 8 workers byte-identical", 0, [] {
    const auto id = SymmetricMatrix<double>::identity(3);
    const auto one = sample_mvn(id, 100000, kMasterSeed, 1);
    const auto eight = sample_mvn(id, 100000, kMasterSeed, 8);
    const double err = oracle::rel_frobenius(estimate_mle(one).matrix.values(), Mat::Identity(3, 3));
    const bool same = std::memcmp(one.values().data(), eight.values().data(),
                                  sizeof(double) * static_cast<std::size_t>(one.values().size())) == 0;
    return Outcome{err < 0.05 && same,
                   "relative Frobenius error " + fmt(err) + (same ? ", identical bytes" : ", bytes differ")};
  });

  criterion(10, "n=5, p=20: MLE rank <= 4 and condition infinite; LW condition finite (50 seeds)", 0, [] {
    const auto sigma = generate_population_sigma(20, kSigmaSeed);
    Ordering o;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto data = sample_mvn(sigma, 5, derive_seed(kMasterSeed, 5, s));
      const auto mle = estimate_mle(data);
      const auto lw = estimate_ledoit_wolf(data);
      const Index rank = numerical_rank(mle.matrix);
      o.check(rank <= 4, "seed " + std::to_string(s) + ": MLE rank " + std::to_string(rank));
      o.check(std::isinf(condition_number(mle.matrix)), "seed " + std::to_string(s) + ": MLE condition finite");
      o.check(std::isfinite(condition_number(lw.matrix)), "seed " + std::to_string(s) + ": LW condition infinite");
    }
    return Outcome{o.ok, o.ok ? "" : o.first};
  });

  criterion(11, "simulate replay from one manifest is byte-identical across --threads", 0, [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hdpca_acceptance_replay";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
      std::ofstream(dir / "run.cfg") << "p = 10\nn_values = 3..8\nm = 25\nmaster_seed = 2\nsigma_seed = 1\n";
    }
    auto simulate = [&](const std::string& out, const std::string& threads) {
      const std::string cfg = (dir / "run.cfg").string(), o = (dir / out).string();
      const char* argv[] = {"hdpca", "simulate", "--config", cfg.c_str(), "--out", o.c_str(), "--threads", threads.c_str()};
      return cli::run(8, argv);
    };
    if (simulate("t1", "1") != 0 || simulate("t4", "4") != 0 || simulate("t1b", "1") != 0) {
      return Outcome{false, "simulate exited nonzero"};
    }
    for (const char* f : {"overdispersion.csv", "explained.csv", "cse.csv", "sweep.csv", "run.cfg"}) {
      const std::string a = slurp(dir / "t1" / f);
      if (a.empty() || a != slurp(dir / "t4" / f) || a != slurp(dir / "t1b" / f)) {
        return Outcome{false, std::string(f) + " differs"};
      }
    }
    fs::remove_all(dir);
    return Outcome{true, "5 files identical over 3 runs (threads 1, 4, 1)"};
  });

  std::printf("acceptance: %d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
