#include "ueq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ueq/errors.hpp"
#include "ueq/rng.hpp"

namespace ueq {

std::vector<Monomial> random_dimensional_monomials(const FeatureSpec& spec, int max_degree, std::size_t count,
                                                   std::uint64_t seed) {
  std::vector<Monomial> pool;
  for (auto& m : enumerate_monomials(spec, max_degree, false)) {
    if (!monomial_units(m, spec).is_dimensionless()) pool.push_back(std::move(m));
  }
  if (pool.size() < count) throw DataError("only " + std::to_string(pool.size()) + " dimensional monomials available");
  // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<TermCheck> hamiltonian_term_table(const RegressionModel& model, const FeatureSpec& spec) {
  std::vector<TermCheck> out;
  for (const auto& term : pendulum_hamiltonian_terms(spec)) {
    TermCheck row{format_monomial(term.monomial, spec), term.weight, 0.0};
    for (std::size_t j = 0; j < model.monomials.size(); ++j) {
      if (model.monomials[j].exps == term.monomial.exps) row.fitted += model.weights[j];
    }
    if (term.monomial.is_constant()) row.fitted += model.intercept;
    out.push_back(std::move(row));
  }
  return out;
}

double max_off_support_weight(const RegressionModel& model, const FeatureSpec& spec) {
  const auto terms = pendulum_hamiltonian_terms(spec);
  double worst = 0.0;
  for (std::size_t j = 0; j < model.monomials.size(); ++j) {
    const bool on = std::any_of(terms.begin(), terms.end(),
                                [&](const WeightedMonomial& t) { return t.monomial.exps == model.monomials[j].exps; });
    if (!on) worst = std::max(worst, std::abs(model.weights[j]));
  }
  return worst;
}

std::vector<std::size_t> support(const RegressionModel& model, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    if (std::abs(model.weights[j]) > threshold) out.push_back(j);
  }
  return out;
}

std::vector<TopWeight> top_weights(const RegressionModel& model, const FeatureSpec& spec, std::size_t count) {
  std::vector<std::size_t> idx(model.weights.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(model.weights[a]) > std::abs(model.weights[b]); });
  std::vector<TopWeight> out;
  for (std::size_t i = 0; i < std::min(count, idx.size()); ++i) {
    out.push_back({format_monomial(model.monomials[idx[i]], spec), model.weights[idx[i]]});
  }
  return out;
}

Dataset planck_dataset(std::size_t n, std::uint64_t seed, const PlanckSampler& cfg) {
  Dataset d;
  d.spec = planck_spec();
  d.label_units = intensity_units(d.spec.system());
  Rng rng(seed);
  for (std::size_t t = 0; t < n; ++t) {
    const double lambda = rng.log_uniform(cfg.lambda_lo, cfg.lambda_hi);
    const double T = rng.uniform(cfg.T_lo, cfg.T_hi);
    d.rows.push_back({lambda, T, kSpeedOfLight, kBoltzmann});
    d.labels.push_back(planck_intensity(lambda, T));
  }
  return d;
}

std::vector<Monomial> rietkerk_baseline_features(const FeatureSpec& spec) {
  const std::size_t d = spec.size();
  std::vector<Monomial> out;
  for (int sign : {1, -1}) {
    for (std::size_t i = 0; i < d; ++i) {
      Monomial m = Monomial::constant(d);
      m.exps[i] = sign;
      out.push_back(std::move(m));
    }
  }
  out.push_back(Monomial::constant(d));
  return out;
}

std::vector<Monomial> with_inverses_and_constant(const std::vector<Monomial>& basis, std::size_t d) {
  std::vector<Monomial> out = basis;
  for (const auto& b : basis) {
    Monomial inv = b;
    for (auto& e : inv.exps) e = -e;
    out.push_back(std::move(inv));
  }
  out.push_back(Monomial::constant(d));
  return out;
}

std::vector<Monomial> rietkerk_decoder_candidates(const FeatureSpec& spec) {
  std::vector<Monomial> out;
  for (auto& m : decoder_solutions(spec, vegetation_units(spec.system()), 1)) {
    if (total_degree(m) <= 3) out.push_back(std::move(m));
  }
  return out;
}

ComparisonFit fit_dimensional_baseline(const Dataset& train, const Dataset& test,
                                       const std::vector<Monomial>& monomials) {
  train.validate();
  const Eigen::MatrixXd X = build_design_matrix(train, monomials);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.labels.data(),
                                                              static_cast<Eigen::Index>(train.labels.size()));
  const OlsResult ols = fit_ols(X, y);
  ComparisonFit out;
  out.model.monomials = monomials;
  out.model.weights.assign(ols.weights.data(), ols.weights.data() + ols.weights.size());
  out.model.decoder = Monomial::constant(train.spec.size());
  out.model.label_units = train.label_units;
  out.rank = ols.rank;
  out.rank_deficient = ols.rank_deficient;
  out.train = evaluate(predict_all(out.model, train), train);
  out.test = evaluate(predict_all(out.model, test), test);
  return out;
}

ComparisonFit fit_dimensionless(const Dataset& train, const Dataset& test, const std::vector<Monomial>& monomials,
                                const Monomial& decoder) {
  FitOptions opts;
  opts.dimensional_loss = true;
  FitReport rep = fit_model(train, monomials, decoder, opts);
  ComparisonFit out;
  out.model = std::move(rep.model);
  out.rank = rep.rank;
  out.rank_deficient = rep.rank_deficient;
  out.train = evaluate(predict_all(out.model, train), train, &decoder);
  out.test = evaluate(predict_all(out.model, test), test, &decoder);
  return out;
}

RietkerkComparison compare_rietkerk(const Dataset& train, const Dataset& test, const std::vector<Monomial>& basis,
                                    std::size_t folds) {
  const FeatureSpec& spec = train.spec;
  RietkerkComparison out;
  out.baseline = fit_dimensional_baseline(train, test, rietkerk_baseline_features(spec));
  out.features = with_inverses_and_constant(basis, spec.size());
  out.candidates = rietkerk_decoder_candidates(spec);
  FitOptions cv_opts;
  cv_opts.dimensional_loss = true;
  out.selection = select_decoder_cv(train, out.features, out.candidates, folds, cv_opts);
  out.decoder = out.candidates[out.selection.best];
  out.dimensionless = fit_dimensionless(train, test, out.features, out.decoder);
  return out;
}

}  // namespace ueq
