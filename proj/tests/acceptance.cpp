// Acceptance suite: runs the ten criteria at their stated tolerances and
// prints one PASS/FAIL line per criterion. Exit status is nonzero when any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "ueq/experiments.hpp"
#include "ueq/intlinalg.hpp"
#include "ueq/io.hpp"
#include "ueq/pi.hpp"
#include "ueq/regress.hpp"
#include "ueq/rng.hpp"
#include "ueq/sims.hpp"

using namespace ueq;

namespace {

constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Units of a monomial summed in test code.
std::vector<long long> units_of(const Monomial& m, const FeatureSpec& spec) {
  std::vector<long long> u(spec.system().size(), 0);
  for (std::size_t i = 0; i < spec.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += static_cast<long long>(m.exps[i]) * spec[i].units[j];
  return u;
}

bool all_zero(const std::vector<long long>& v) {
  return std::all_of(v.begin(), v.end(), [](long long x) { return x == 0; });
}

// ------------------------------------------------------------------ 1

Outcome feature_count_law() {
  const auto planck = planck_spec();
  const auto p_basis = dimensionless_basis(planck);
  const auto decoders = decoder_solutions(planck, intensity_units(planck.system()), 4);
  const bool planck_ok = p_basis.empty() && decoders.size() == 1 &&
                         decoders[0].exps == std::vector<std::int32_t>{-4, 1, 1, 1};

  const auto riet = rietkerk_spec();
  const auto basis = dimensionless_basis(riet);
  std::vector<IntVector> lattice;
  for (const auto& b : basis) lattice.emplace_back(b.exps.begin(), b.exps.end());
  std::size_t zero_units = 0, members = 0;
  const auto reference = rietkerk_reference_basis(riet);
  for (const auto& r : reference) {
    zero_units += all_zero(units_of(r, riet));
    members += lattice_coordinates(lattice, IntVector(r.exps.begin(), r.exps.end())).has_value();
  }
  const bool riet_ok = basis.size() == 12 && reference.size() == 12 && zero_units == 12 && members == 12;
  return {planck_ok && riet_ok,
          fmt("Planck s=%zu, %zu decoder(s) %s; Rietkerk s=%zu, %zu/12 listed features dimensionless, %zu/12 in lattice",
              p_basis.size(), decoders.size(), decoders.empty() ? "-" : format_monomial(decoders[0], planck).c_str(),
              basis.size(), zero_units, members)};
}

// ------------------------------------------------------------------ 2

Outcome monomial_counts() {
  const auto committed = load_spec(UEQ_CONFIGS "/pendulum.json").spec;
  const std::size_t dimless = enumerate_monomials(committed, 2, true).size();
  const std::size_t total = enumerate_monomials(committed, 2, false).size();
  const std::size_t lib_dimless = enumerate_monomials(pendulum_spec(), 2, true).size();
  return {dimless == 286 && total == 187500 && lib_dimless == 286,
          fmt("configs/pendulum.json: %zu dimensionless, %zu total (built-in spec: %zu)", dimless, total,
              lib_dimless)};
}

// ------------------------------------------------------------------ 3, 4, 5

struct PendulumRuns {
  FeatureSpec spec;
  Monomial decoder;
  std::vector<Monomial> features;
  Dataset train_l2, train_lasso, validation, test;
  FitReport ols;
  LassoPath lasso;
  Metrics ols_test, lasso_test;
  FitOptions lasso_opts;
};

PendulumRuns& runs() {
  static PendulumRuns r;
  return r;
}

bool same_exps(const Monomial& a, const Monomial& b) { return a.exps == b.exps; }

std::set<std::size_t> hamiltonian_indices(const std::vector<Monomial>& features, const FeatureSpec& spec) {
  std::set<std::size_t> idx;
  for (const auto& t : pendulum_hamiltonian_terms(spec)) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (same_exps(features[j], t.monomial)) idx.insert(j);
    }
  }
  return idx;
}

Outcome hamiltonian_recovery() {
  auto& r = runs();
  r.spec = pendulum_spec();
  r.decoder = pendulum_decoder(r.spec);
  r.features = enumerate_monomials(r.spec, 2, true);
  r.train_l2 = sample_pendulum_dataset(8192, derive_seed(kSeed, 30));
  r.test = sample_pendulum_dataset(1024, derive_seed(kSeed, 31));
  r.train_lasso = sample_pendulum_dataset(128, derive_seed(kSeed, 32));
  r.validation = sample_pendulum_dataset(512, derive_seed(kSeed, 33));

  r.ols = fit_model(r.train_l2, r.features, r.decoder);
  r.ols_test = evaluate(predict_all(r.ols.model, r.test), r.test, &r.decoder);
  double term_err = 0.0;
  for (const auto& t : hamiltonian_term_table(r.ols.model, r.spec)) term_err = std::max(term_err, std::abs(t.fitted - t.expected));
  const double off = max_off_support_weight(r.ols.model, r.spec);
  const bool ols_ok = r.ols_test.dimensionless_mse <= 1e-10 && term_err <= 1e-6 && off <= 1e-6;

  // The stopping rule has to resolve coordinate updates well below the
  // smallest lambda on the path (about 3e-10 here).
  r.lasso_opts.lasso.max_sweeps = 100000;
  r.lasso_opts.lasso.tol = 1e-14;
  r.lasso = fit_lasso_path(r.train_lasso, r.validation, r.features, r.decoder, 10, r.lasso_opts);
  r.lasso_test = evaluate(predict_all(r.lasso.report.model, r.test), r.test, &r.decoder);
  const auto found = support(r.lasso.report.model, 1e-6);
  const auto truth = hamiltonian_indices(r.features, r.spec);
  const bool lasso_ok = std::set<std::size_t>(found.begin(), found.end()) == truth && r.lasso.report.converged;

  return {ols_ok && lasso_ok,
          fmt("OLS N=8192 p=%zu rank=%ld: test dimensionless mse %.2e, max term error %.2e, max off-support |w| %.2e; "
              "LASSO N=128 lambda=%.2e: support %zu/%zu (|w|>1e-6) %s, converged=%d",
              r.features.size(), static_cast<long>(r.ols.rank), r.ols_test.dimensionless_mse, term_err, off,
              r.lasso.lambdas[r.lasso.best], found.size(), truth.size(),
              std::set<std::size_t>(found.begin(), found.end()) == truth ? "exact" : "differs",
              static_cast<int>(r.lasso.report.converged))};
}

Outcome contamination() {
  auto& r = runs();
  auto features = r.features;
  const auto extra = random_dimensional_monomials(r.spec, 2, 500, derive_seed(kSeed, 40));
  features.insert(features.end(), extra.begin(), extra.end());

  const FitReport ols = fit_model(r.train_l2, features, r.decoder);
  const Metrics ols_test = evaluate(predict_all(ols.model, r.test), r.test, &r.decoder);
  const double l2_ratio = ols_test.mse / r.ols_test.mse;
  // A contaminated fit that still reaches the clean fit's recovery precision
  // has not degraded, whatever the ratio of two rounding-level errors says.
  const bool l2_ok = l2_ratio >= 10.0 && ols_test.dimensionless_mse > 1e-10;

  const LassoPath lasso = fit_lasso_path(r.train_lasso, r.validation, features, r.decoder, 10, r.lasso_opts);
  const Metrics lasso_test = evaluate(predict_all(lasso.report.model, r.test), r.test, &r.decoder);
  const double lasso_ratio = lasso_test.mse / r.lasso_test.mse;
  const bool lasso_ok = lasso_ratio >= 10.0;

  return {l2_ok && lasso_ok,
          fmt("p=%zu; L2 N=8192: mse %.2e vs %.2e (ratio %.2f, dimensionless %.2e) %s; "
              "LASSO N=128: mse %.2e vs %.2e (ratio %.2e) %s",
              features.size(), ols_test.mse, r.ols_test.mse, l2_ratio, ols_test.dimensionless_mse,
              l2_ok ? "degraded" : "no degradation beyond rounding", lasso_test.mse, r.lasso_test.mse, lasso_ratio,
              lasso_ok ? "degraded" : "not degraded")};
}

Outcome equivariance() {
  auto& r = runs();
  const double ols = equivariance_residual({r.ols.model}, r.test, 100, derive_seed(kSeed, 50), 100);
  const double lasso = equivariance_residual({r.lasso.report.model}, r.test, 100, derive_seed(kSeed, 51), 100);
  return {ols <= 1e-10 && lasso <= 1e-10,
          fmt("max relative deviation over 100 g x 100 points: OLS %.2e, LASSO %.2e", ols, lasso)};
}

// ------------------------------------------------------------------ 6

// alpha in [-3,3]^d with alpha^T A = 0, by direct sweep.
std::vector<std::vector<int>> brute_kernel(const oracle::Mat& A) {
  const std::size_t d = A.size(), k = A[0].size();
  std::vector<std::vector<int>> out;
  std::array<int, 6> a{};
  a.fill(-3);
  for (;;) {
    bool zero = true;
    for (std::size_t j = 0; j < k && zero; ++j) {
      long long s = 0;
      for (std::size_t i = 0; i < d; ++i) s += a[i] * A[i][j];
      zero = s == 0;
    }
    if (zero) out.emplace_back(a.begin(), a.begin() + static_cast<long>(d));
    std::size_t i = d;
    while (i > 0 && a[i - 1] == 3) a[--i] = -3;
    if (i == 0) return out;
    ++a[i - 1];
  }
}

Outcome integer_algebra() {
  Rng rng(derive_seed(kSeed, 60));
  std::size_t bad_snf = 0, bad_rank = 0, bad_null = 0, kernel_vectors = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(6);
    IntMatrix a(rows, cols);
    oracle::Mat A(rows, std::vector<long long>(cols));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) A[i][j] = a(i, j) = static_cast<std::int64_t>(rng.below(11)) - 5;

    const auto snf = smith_normal_form(a);
    const auto r = oracle::rational_rank(A);
    oracle::Mat S(rows, std::vector<long long>(rows)), T(cols, std::vector<long long>(cols));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < rows; ++j) S[i][j] = snf.S(i, j);
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = 0; j < cols; ++j) T[i][j] = snf.T(i, j);
    bool ok = std::llabs(oracle::cofactor_det(S)) == 1 && std::llabs(oracle::cofactor_det(T)) == 1;
    for (std::size_t i = 0; i < rows && ok; ++i) {
      for (std::size_t j = 0; j < cols && ok; ++j) {
        long long sat = 0;
        for (std::size_t p = 0; p < rows; ++p)
          for (std::size_t q = 0; q < cols; ++q) sat += S[i][p] * A[p][q] * T[q][j];
        ok = sat == snf.D(i, j) && (i == j || sat == 0);
      }
    }
    for (std::size_t i = 0; i < std::min(rows, cols) && ok; ++i) {
      ok = snf.D(i, i) >= 0 && (snf.D(i, i) != 0) == (i < r);
      if (ok && i + 1 < r) ok = snf.D(i + 1, i + 1) % snf.D(i, i) == 0;
    }
    bad_snf += !ok;
    bad_rank += snf.rank != r;

    const auto basis = nullspace_basis(a);
    bool null_ok = basis.size() == rows - r;
    for (const auto& b : basis) null_ok = null_ok && left_multiply(b, a) == IntVector(cols, 0);
    // Basis vectors are kernel vectors, so only kernel points can be lattice
    // points; every kernel point must be one.
    for (const auto& alpha : brute_kernel(A)) {
      ++kernel_vectors;
      null_ok = null_ok && lattice_coordinates(basis, IntVector(alpha.begin(), alpha.end())).has_value();
    }
    bad_null += !null_ok;
  }
  return {bad_snf == 0 && bad_rank == 0 && bad_null == 0,
          fmt("1000 matrices: %zu SNF failures, %zu rank mismatches, %zu nullspace mismatches (%zu kernel points in "
              "[-3,3]^d checked)",
              bad_snf, bad_rank, bad_null, kernel_vectors)};
}

// ------------------------------------------------------------------ 7

Outcome reynolds() {
  Rng rng(derive_seed(kSeed, 70));
  std::size_t wrong = 0, fixed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.below(6), k = 1 + rng.below(4);
    std::vector<std::string> base;
    for (std::size_t j = 0; j < k; ++j) base.push_back("b" + std::to_string(j));
    std::vector<FeatureDescriptor> f;
    for (std::size_t i = 0; i < d; ++i) {
      UnitVector u(k);
      for (std::size_t j = 0; j < k; ++j) u[j] = static_cast<std::int32_t>(rng.below(5)) - 2;
      f.push_back({"x" + std::to_string(i), u});
    }
    const FeatureSpec spec(BaseUnitSystem(base), f);
    Monomial m = Monomial::constant(d);
    for (auto& e : m.exps) e = static_cast<std::int32_t>(rng.below(7)) - 3;
    m.coeff = rng.uniform(-2, 2);
    const bool dimless = all_zero(units_of(m, spec));
    const auto p = reynolds_project(m, spec);
    bool ok = p.has_value() == dimless;
    if (p) {
      ok = ok && *p == m && reynolds_project(*p, spec) == p;
      ++fixed;
    }
    wrong += !ok;
  }
  return {wrong == 0, fmt("1000 monomials: %zu dimensionless fixed, %zu killed, %zu wrong", fixed, 1000 - fixed, wrong)};
}

// ------------------------------------------------------------------ 8

Outcome rietkerk_direction() {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  const auto ex = rietkerk_experiment(200, 50, kSeed, GridScale::desk(), threads);
  const auto& spec = ex.train.spec;
  const auto cmp = compare_rietkerk(ex.train, ex.test, rietkerk_reference_basis(spec));
  const auto& b = cmp.baseline.test;
  const auto& d = cmp.dimensionless.test;
  return {d.mse <= b.mse && d.pearson >= b.pearson,
          fmt("%zu runs (%zu extinct); test mse %.2f (25 features, decoder %s) vs %.2f (33 features); pearson %.4f "
              "vs %.4f",
              ex.attempted, ex.extinct, d.mse, format_monomial(cmp.decoder, spec).c_str(), b.mse, d.pearson,
              b.pearson)};
}

// ------------------------------------------------------------------ 9

Outcome double_pendulum() {
  const auto fx = double_pendulum_feature_fixtures();
  const std::vector<long long> energy{1, 2, -2};
  std::size_t e_ok = 0, z_ok = 0;
  for (const auto& f : fx.energy) e_ok += units_of(f.monomial, fx.spec) == energy;
  for (const auto& f : fx.dimensionless) z_ok += all_zero(units_of(f.monomial, fx.spec));
  return {fx.energy.size() == 26 && e_ok == 26 && z_ok == fx.dimensionless.size(),
          fmt("%zu/%zu energy factors are kg m^2 s^-2; %zu/%zu integer dimensionless fixtures have zero units", e_ok,
              fx.energy.size(), z_ok, fx.dimensionless.size())};
}

// ------------------------------------------------------------------ 10

Outcome rescale_example() {
  const auto sys = mechanics_system();
  const Quantity e{2.9, sys.parse("J")};
  const Quantity cgs = rescale(GroupElement({1e-3, 1e-2, 1.0}), e);
  const double rel = std::abs(cgs.value - 2.9e7) / 2.9e7;
  return {rel <= 1e-12 && cgs.units == e.units, fmt("2.9 J -> %.10g g cm^2 s^-2, relative error %.1e", cgs.value, rel)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: none stated
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "feature-count law", 1, feature_count_law},
      {2, "monomial counts", 30, monomial_counts},
      {3, "Hamiltonian recovery", 60, hamiltonian_recovery},
      {4, "dimensional contamination", 60, contamination},
      {5, "equivariance", 0, equivariance},
      {6, "integer algebra", 30, integer_algebra},
      {7, "Reynolds projection", 0, reynolds},
      {8, "Rietkerk direction", 900, rietkerk_direction},
      {9, "double-pendulum fixtures", 1, double_pendulum},
      {10, "rescale arithmetic", 0, rescale_example},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_seconds == 0 || secs <= c.budget_seconds;
    const bool ok = o.pass && in_time;
    passed += ok;
    std::string time = fmt("%.2f s", secs);
    if (c.budget_seconds > 0) time += fmt(" of %.0f s", c.budget_seconds);
    std::printf("%s  %2d  %-26s [%s] %s\n", ok ? "PASS" : "FAIL", c.id, c.name, time.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
