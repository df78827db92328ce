#pragma once

// End-to-end pipelines shared by the command-line tool and the acceptance
// suite: pendulum recovery, contamination, black-body and Rietkerk fits.

#include <cstdint>
#include <string>
#include <vector>

#include "ueq/regress.hpp"
#include "ueq/sims.hpp"

namespace ueq {

/// `count` distinct non-constant monomials with nonzero units, degree <= max_degree,
/// drawn uniformly from the full enumeration.
std::vector<Monomial> random_dimensional_monomials(const FeatureSpec& spec, int max_degree, std::size_t count,
                                                   std::uint64_t seed);

struct TermCheck {
  std::string expr;
  double expected = 0.0;
  double fitted = 0.0;
};

/// Fitted weight of each expanded-Hamiltonian monomial next to its exact value.
std::vector<TermCheck> hamiltonian_term_table(const RegressionModel& model, const FeatureSpec& spec);
/// Largest |w| over monomials that are not Hamiltonian terms.
double max_off_support_weight(const RegressionModel& model, const FeatureSpec& spec);
/// Monomials with |w| > threshold, as indices into model.monomials.
std::vector<std::size_t> support(const RegressionModel& model, double threshold);

struct TopWeight {
  std::string expr;
  double weight = 0.0;
};
std::vector<TopWeight> top_weights(const RegressionModel& model, const FeatureSpec& spec, std::size_t count);

// ---------------------------------------------------------------- Planck

struct PlanckSampler {
  double lambda_lo = 1e-2, lambda_hi = 1e-1;  // m, log-uniform
  double T_lo = 1000.0, T_hi = 5000.0;         // K, uniform
};
/// Long-wavelength samples of Planck's law; c and k_B columns are the
/// physical constants.
Dataset planck_dataset(std::size_t n, std::uint64_t seed, const PlanckSampler& cfg = {});

// ---------------------------------------------------------------- Rietkerk

/// The 16 parameters, their inverses and the constant: 33 features.
std::vector<Monomial> rietkerk_baseline_features(const FeatureSpec& spec);
/// A dimensionless basis, its inverses and the constant.
std::vector<Monomial> with_inverses_and_constant(const std::vector<Monomial>& basis, std::size_t d);

/// Decoders with vegetation units, exponents in {-1, 0, 1} and at most
/// three nonzero exponents.
std::vector<Monomial> rietkerk_decoder_candidates(const FeatureSpec& spec);

struct ComparisonFit {
  RegressionModel model;
  Metrics train, test;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

/// Plain least squares of the raw label on dimensional features. The model's
/// decoder is the constant monomial, so it is not units-equivariant.
ComparisonFit fit_dimensional_baseline(const Dataset& train, const Dataset& test,
                                       const std::vector<Monomial>& monomials);
/// Least squares on dimensionless features through `decoder`, with a
/// dimensional squared loss so both fits minimize the same objective.
ComparisonFit fit_dimensionless(const Dataset& train, const Dataset& test, const std::vector<Monomial>& monomials,
                                const Monomial& decoder);

struct RietkerkComparison {
  ComparisonFit baseline;       // 33 dimensional features
  ComparisonFit dimensionless;  // basis, inverses and the constant
  std::vector<Monomial> features;
  std::vector<Monomial> candidates;
  DecoderSelection selection;
  Monomial decoder;
};

/// Baseline fit, decoder choice by K-fold CV on the training set, then the
/// dimensionless fit through the chosen decoder.
RietkerkComparison compare_rietkerk(const Dataset& train, const Dataset& test, const std::vector<Monomial>& basis,
                                    std::size_t folds = 5);

}  // namespace ueq
