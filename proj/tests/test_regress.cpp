#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>

#include "oracles.hpp"
#include "ueq/errors.hpp"
#include "ueq/regress.hpp"
#include "ueq/rng.hpp"
#include "ueq/sims.hpp"

using namespace ueq;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

RegressionModel exact_pendulum_model(const FeatureSpec& spec) {
  RegressionModel model;
  for (const auto& t : pendulum_hamiltonian_terms(spec)) {
    model.monomials.push_back(t.monomial);
    model.weights.push_back(t.weight);
  }
  model.decoder = pendulum_decoder(spec);
  model.label_units = energy_units(spec.system());
  return model;
}

std::vector<double> rescale_row(const GroupElement& g, const std::vector<double>& x, const FeatureSpec& spec) {
  const auto u = spec.units();
  return rescale_values(g, x, u);
}

GroupElement random_group(Rng& rng, std::size_t k) {
  std::vector<double> g(k);
  for (auto& v : g) v = rng.log_uniform(0.1, 10.0);
  return GroupElement(g);
}

Dataset two_mass_data(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.spec = FeatureSpec(BaseUnitSystem({"kg"}), {{"m_1", UnitVector{1}}, {"m_2", UnitVector{1}}});
  d.label_units = UnitVector{1};
  Rng rng(seed);
  for (std::size_t t = 0; t < n; ++t) {
    const double m1 = rng.uniform(1, 5), m2 = rng.uniform(1, 5);
    d.rows.push_back({m1, m2});
    d.labels.push_back(3.0 * m1);
  }
  return d;
}

}  // namespace

TEST(DesignMatrix, Examples) {
  const auto sys = BaseUnitSystem::with_si_aliases({"kg", "m", "s"});
  const FeatureSpec spec(sys, {{"m", sys.parse("kg")},
                               {"k_s", sys.parse("kg s^-2")},
                               {"L", sys.parse("m")},
                               {"p_norm", sys.parse("kg m s^-1")}});
  const std::vector<std::vector<double>> rows{{2, 3, 2, 4}, {1, 1, 1, 1}};
  const auto X = build_design_matrix(rows, {Monomial::constant(4), parse_monomial("m k_s L^2 p_norm^-2", spec)});
  EXPECT_EQ(X(0, 0), 1.0);
  EXPECT_EQ(X(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(X(0, 1), 1.5);
  const auto empty = build_design_matrix(rows, {});
  EXPECT_EQ(empty.rows(), 2);
  EXPECT_EQ(empty.cols(), 0);
  try {
    build_design_matrix(std::vector<std::vector<double>>{{1, 1, 1, 1}, {1, 1, 1, 0}},
                        {Monomial::constant(4), parse_monomial("p_norm^-1", spec)});
    FAIL() << "expected DesignMatrixError";
  } catch (const DesignMatrixError& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 1u);
  }
}

TEST(Ols, IdentityReturnsLabels) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -2, 2);
  const auto r = fit_ols(X, y);
  EXPECT_LE((r.weights - y).norm(), 1e-15);
  EXPECT_FALSE(r.rank_deficient);
  EXPECT_EQ(r.rank, 5);
}

TEST(Ols, RecoversExactLinearData) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = gaussian(rng, 200, 30);
    Eigen::VectorXd w(30);
    for (auto& v : w) v = rng.uniform(-3, 3);
    const auto r = fit_ols(X, X * w);
    EXPECT_LE((r.weights - w).norm() / w.norm(), 1e-8);
  }
}

TEST(Ols, ResidualIsOrthogonalToColumns) {
  Rng rng(2);
  const Eigen::MatrixXd X = gaussian(rng, 100, 12);
  Eigen::VectorXd y(100);
  for (auto& v : y) v = rng.normal();
  const auto r = fit_ols(X, y);
  const double bound = X.norm() * y.norm() * 1e-10;
  EXPECT_LE((X.transpose() * (X * r.weights - y)).cwiseAbs().maxCoeff(), bound);
}

TEST(Ols, LargeRidgeShrinksMonotonically) {
  Rng rng(3);
  const Eigen::MatrixXd X = gaussian(rng, 50, 8);
  Eigen::VectorXd y(50);
  for (auto& v : y) v = rng.normal();
  double prev = fit_ols(X, y).weights.norm();
  for (double ridge : {1e-2, 1.0, 1e2, 1e4, 1e6}) {
    const double n = fit_ols(X, y, ridge).weights.norm();
    EXPECT_LT(n, prev);
    prev = n;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Ols, RankDeficientGivesMinimumNorm) {
  Rng rng(4);
  Eigen::MatrixXd X = gaussian(rng, 40, 6);
  X.col(4) = X.col(0) + X.col(1);
  X.col(5) = 2.0 * X.col(2);
  Eigen::VectorXd y(40);
  for (auto& v : y) v = rng.normal();
  const auto r = fit_ols(X, y);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.rank, 4);
  const Eigen::VectorXd ref = X.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  EXPECT_LE((r.weights - ref).norm(), 1e-10 * ref.norm());
}

TEST(Lasso, ZeroLambdaMatchesOls) {
  Rng rng(5);
  const Eigen::MatrixXd X = gaussian(rng, 120, 10);
  Eigen::VectorXd y(120);
  for (auto& v : y) v = rng.normal();
  LassoOptions opts;
  opts.lambda = 0.0;
  opts.tol = 1e-14;
  const auto lasso = fit_lasso(X, y, opts);
  ASSERT_TRUE(lasso.converged);
  // No constant column, so OLS is compared with an appended intercept.
  Eigen::MatrixXd Xc(120, 11);
  Xc << X, Eigen::VectorXd::Ones(120);
  const auto ols = fit_ols(Xc, y);
  EXPECT_LE((lasso.weights - ols.weights.head(10)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(lasso.intercept, ols.weights(10), 1e-6);
}

TEST(Lasso, LambdaMaxZeroesEverything) {
  Rng rng(6);
  const Eigen::MatrixXd X = gaussian(rng, 80, 15);
  Eigen::VectorXd y(80);
  for (auto& v : y) v = rng.normal();
  // Independent bound: max_j |z_j^T (y - ybar)| / N over standardized columns.
  const double n = 80;
  double bound = 0;
  for (Eigen::Index j = 0; j < 15; ++j) {
    const Eigen::VectorXd c = X.col(j).array() - X.col(j).mean();
    const Eigen::VectorXd z = c / std::sqrt(c.squaredNorm() / n);
    bound = std::max(bound, std::abs(z.dot((y.array() - y.mean()).matrix())) / n);
  }
  EXPECT_NEAR(lasso_lambda_max(X, y), bound, 1e-12 * bound);
  LassoOptions opts;
  opts.lambda = bound;
  const auto r = fit_lasso(X, y, opts);
  EXPECT_TRUE((r.weights.array() == 0.0).all());
  opts.lambda = 0.9 * bound;
  EXPECT_FALSE((fit_lasso(X, y, opts).weights.array() == 0.0).all());
}

TEST(Lasso, ObjectiveNeverIncreases) {
  Rng rng(7);
  const Eigen::MatrixXd X = gaussian(rng, 64, 40);
  Eigen::VectorXd y(64);
  for (auto& v : y) v = rng.normal();
  for (double lambda : {1e-3, 1e-2, 1e-1}) {
    LassoOptions opts;
    opts.lambda = lambda;
    const auto r = fit_lasso(X, y, opts);
    ASSERT_FALSE(r.objective_history.empty());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] * (1 + 1e-14));
    }
  }
}

TEST(Lasso, RecoversSparseSupport) {
  Rng rng(8);
  const Eigen::MatrixXd X = gaussian(rng, 128, 50);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(50);
  w(3) = 2.0;
  w(17) = -3.0;
  w(41) = 1.5;
  const Eigen::VectorXd y = X * w;
  for (double lambda : {0.01, 0.05, 0.2}) {
    LassoOptions opts;
    opts.lambda = lambda;
    const auto r = fit_lasso(X, y, opts);
    ASSERT_TRUE(r.converged);
    for (Eigen::Index j = 0; j < 50; ++j) EXPECT_EQ(r.weights(j) != 0.0, w(j) != 0.0) << "lambda " << lambda << " j " << j;
  }
}

TEST(Lasso, WarmStartReachesTheSameSolution) {
  Rng rng(9);
  const Eigen::MatrixXd X = gaussian(rng, 100, 20);
  Eigen::VectorXd y(100);
  for (auto& v : y) v = rng.normal();
  LassoOptions opts;
  opts.lambda = 0.01;
  opts.tol = 1e-13;
  const auto cold = fit_lasso(X, y, opts);
  opts.lambda = 0.02;
  const auto prev = fit_lasso(X, y, opts);
  opts.lambda = 0.01;
  opts.warm_start = prev.weights;
  const auto warm = fit_lasso(X, y, opts);
  EXPECT_LE((cold.weights - warm.weights).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(warm.sweeps, cold.sweeps);
}

TEST(Lasso, ReportsNonConvergence) {
  Rng rng(10);
  const Eigen::MatrixXd X = gaussian(rng, 30, 60);
  Eigen::VectorXd y(30);
  for (auto& v : y) v = rng.normal();
  LassoOptions opts;
  opts.lambda = 1e-6;
  opts.max_sweeps = 1;
  opts.tol = 1e-15;
  const auto r = fit_lasso(X, y, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.sweeps, 1);
  EXPECT_TRUE(std::isfinite(r.objective));
}

TEST(Predict, ZeroWeightsGiveZero) {
  const auto spec = pendulum_spec();
  auto model = exact_pendulum_model(spec);
  std::fill(model.weights.begin(), model.weights.end(), 0.0);
  const auto data = sample_pendulum_dataset(1, 1);
  const auto y = predict(model, spec, data.rows[0]);
  EXPECT_EQ(y.value, 0.0);
  EXPECT_EQ(y.units, energy_units(spec.system()));
}

TEST(Predict, ExactWeightsMatchTheHamiltonian) {
  const auto spec = pendulum_spec();
  const auto model = exact_pendulum_model(spec);
  const auto samples = sample_pendulum(200, 2);
  const auto data = pendulum_dataset(samples);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& s = samples[t];
    const double H = oracle::pendulum_energy(s.m, s.k_s, s.L, s.g, s.p, s.q);
    EXPECT_NEAR(predict(model, spec, data.rows[t]).value, H, 1e-10 * std::abs(H));
  }
}

TEST(Predict, IsEquivariant) {
  const auto spec = pendulum_spec();
  const auto model = exact_pendulum_model(spec);
  const auto data = sample_pendulum_dataset(100, 3);
  const auto v = energy_units(spec.system());
  Rng rng(4);
  for (const auto& x : data.rows) {
    const auto g = random_group(rng, 3);
    const double lhs = predict(model, spec, rescale_row(g, x, spec)).value;
    const double rhs = g.factor(v) * predict(model, spec, x).value;
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs));
  }
  EXPECT_LE(equivariance_residual({model}, data, 100, 5), 1e-10);
}

TEST(Ensemble, MeanAndErrors) {
  const auto spec = pendulum_spec();
  const auto base = exact_pendulum_model(spec);
  const auto data = sample_pendulum_dataset(20, 6);
  const auto& x = data.rows[0];
  EXPECT_EQ(ensemble_predict({base}, spec, x), predict(base, spec, x));

  // Two constant models scaled to predict 4 and 6 through the same decoder.
  const double dec = evaluate_monomial(base.decoder, x);
  RegressionModel a;
  a.monomials = {Monomial::constant(spec.size())};
  a.weights = {4.0 / dec};
  a.decoder = base.decoder;
  a.label_units = base.label_units;
  RegressionModel b = a;
  b.weights = {6.0 / dec};
  EXPECT_NEAR(ensemble_predict({a, b}, spec, x).value, 5.0, 1e-12);
  EXPECT_NEAR(ensemble_predict({a, b, b}, spec, x, Combiner::Median).value, 6.0, 1e-12);

  EXPECT_THROW(ensemble_predict({}, spec, x), EmptyEnsemble);
  RegressionModel c = a;
  c.decoder = parse_monomial("m", spec);
  c.label_units = spec.system().parse("kg");
  EXPECT_THROW(ensemble_predict({a, c}, spec, x), UnitMismatch);
}

TEST(Ensemble, IsEquivariant) {
  const auto spec = pendulum_spec();
  auto a = exact_pendulum_model(spec);
  auto b = a;
  b.decoder = parse_monomial("m g_norm L", spec);
  b.weights[0] *= 0.5;
  const auto data = sample_pendulum_dataset(100, 7);
  EXPECT_LE(equivariance_residual({a, b}, data, 100, 8), 1e-10);
}

TEST(Loss, DimensionlessLoss) {
  const auto sys = BaseUnitSystem::with_si_aliases({"kg", "m", "s"});
  const auto J = sys.parse("J");
  EXPECT_EQ(dimensionless_loss({3, J}, {3, J}, {2, J}), 0.0);
  EXPECT_DOUBLE_EQ(dimensionless_loss({5, J}, {3, J}, {2, J}), 1.0);
  EXPECT_THROW(dimensionless_loss({5, J}, {3, sys.parse("m")}, {2, J}), UnitMismatch);
  EXPECT_THROW(dimensionless_loss({5, J}, {3, J}, {0, J}), ZeroScale);
}

TEST(Loss, StateRelativeError) {
  const std::vector<double> z{1.0, -2.0, 0.5}, neg{-1.0, 2.0, -0.5};
  EXPECT_EQ(state_relative_error(z, z), 0.0);
  EXPECT_DOUBLE_EQ(state_relative_error(neg, z), 1.0);
  EXPECT_DOUBLE_EQ(state_relative_error(std::vector<double>{2, 0}, std::vector<double>{1, 0}), 1.0 / 3.0);
  EXPECT_THROW(state_relative_error(std::vector<double>{0, 0}, std::vector<double>{0, 0}), BothZero);
}

TEST(FitModel, RecoversThePendulumFromItsTerms) {
  const auto spec = pendulum_spec();
  const auto exact = exact_pendulum_model(spec);
  const auto train = sample_pendulum_dataset(256, 11);
  const auto rep = fit_model(train, exact.monomials, exact.decoder);
  ASSERT_EQ(rep.model.weights.size(), exact.weights.size());
  for (std::size_t j = 0; j < exact.weights.size(); ++j) EXPECT_NEAR(rep.model.weights[j], exact.weights[j], 1e-10);
  EXPECT_FALSE(rep.rank_deficient);
}

TEST(FitModel, RejectsDecoderWithWrongUnits) {
  const auto spec = pendulum_spec();
  const auto train = sample_pendulum_dataset(16, 12);
  EXPECT_THROW(fit_model(train, {Monomial::constant(spec.size())}, parse_monomial("m", spec)), UnitMismatch);
}

TEST(LassoPath, SelectsTheLowestValidationError) {
  const auto spec = pendulum_spec();
  const auto exact = exact_pendulum_model(spec);
  auto monomials = exact.monomials;
  for (const char* extra : {"m g_norm L k_s^-1 L^-2", "q_norm^2 L^-2", "g_norm q_norm m k_s^-1 L^-2"}) {
    monomials.push_back(parse_monomial(extra, spec));
  }
  const auto train = sample_pendulum_dataset(128, 13);
  const auto valid = sample_pendulum_dataset(128, 14);
  const auto path = fit_lasso_path(train, valid, monomials, exact.decoder, 6);
  ASSERT_EQ(path.lambdas.size(), 6u);
  for (std::size_t i = 1; i < path.lambdas.size(); ++i) EXPECT_LT(path.lambdas[i], path.lambdas[i - 1]);
  const auto best = std::min_element(path.validation_mse.begin(), path.validation_mse.end());
  EXPECT_EQ(path.best, static_cast<std::size_t>(best - path.validation_mse.begin()));
  EXPECT_EQ(path.report.model.weights.size(), monomials.size());
}

TEST(DecoderCv, PrefersTheExactDecoder) {
  const auto data = two_mass_data(60, 15);
  const std::vector<Monomial> features{Monomial::constant(2)};
  const std::vector<Monomial> candidates{Monomial{{0, 1}, 1.0}, Monomial{{1, 0}, 1.0}};
  const auto sel = select_decoder_cv(data, features, candidates, 5);
  ASSERT_EQ(sel.cv_mse.size(), 2u);
  EXPECT_EQ(sel.best, 1u);
  EXPECT_LE(sel.cv_mse[1], 1e-20);
  EXPECT_GT(sel.cv_mse[0], 1e-3);
}

TEST(Metrics, PearsonAndEvaluate) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-15);
  const auto data = two_mass_data(4, 16);
  std::vector<double> pred(data.labels);
  pred[0] += 2.0;
  const auto m = evaluate(pred, data);
  EXPECT_NEAR(m.mse, 1.0, 1e-12);
}
