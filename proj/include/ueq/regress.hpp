#pragma once

// Linear models over monomial features, trained in dimensionless space and
// mapped back to label units through a decoder monomial.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ueq/pi.hpp"
#include "ueq/units.hpp"

namespace ueq {

struct Dataset {
  FeatureSpec spec;
  std::vector<std::vector<double>> rows;  // N x d feature values
  std::vector<double> labels;             // N label values
  UnitVector label_units;

  std::size_t size() const noexcept { return rows.size(); }
  /// Throws DataError if a row has the wrong length or label count differs.
  void validate() const;
};

/// Entry (t, j) = monomial_j(row_t). Throws DesignMatrixError(row, col, ...).
Eigen::MatrixXd build_design_matrix(const Dataset& data, const std::vector<Monomial>& monomials);
Eigen::MatrixXd build_design_matrix(const std::vector<std::vector<double>>& rows,
                                    const std::vector<Monomial>& monomials);

struct OlsResult {
  Eigen::VectorXd weights;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

/// Minimizes |Xw - y|^2 + ridge |w|^2 with orthogonal factorizations.
/// ridge = 0 and rank(X) < p: minimum-norm solution, rank_deficient set.
OlsResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge = 0.0);

struct LassoOptions {
  double lambda = 1e-3;
  int max_sweeps = 10000;
  double tol = 1e-10;
  /// Starting weights in original column scale, e.g. the previous point on
  /// a decreasing lambda path. Constant columns are ignored.
  std::optional<Eigen::VectorXd> warm_start;
};

struct LassoResult {
  Eigen::VectorXd weights;   // original column scale
  double intercept = 0.0;    // nonzero only when X has no constant column
  int sweeps = 0;  // full passes over all columns
  bool converged = false;
  double objective = 0.0;
  std::vector<double> objective_history;  // one entry per sweep
};

/// Cyclic coordinate descent on (1/2N)|Xw - y|^2 + lambda |w|_1 over
/// standardized columns. Constant columns are unpenalized. After each full
/// pass the nonzero coordinates are iterated to convergence on their own;
/// convergence means a full pass moves no standardized weight by tol.
LassoResult fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoOptions& opts);

/// Smallest lambda at which every penalized standardized weight is zero.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct RegressionModel {
  std::vector<Monomial> monomials;
  std::vector<double> weights;
  Monomial decoder;
  double intercept = 0.0;
  UnitVector label_units;

  /// Dimensionless prediction eta_hat.
  double eta(std::span<const double> x) const;
};

Quantity predict(const RegressionModel& model, const FeatureSpec& spec, std::span<const double> x);

enum class Combiner { Mean, Median };

Quantity ensemble_predict(const std::vector<RegressionModel>& models, const FeatureSpec& spec,
                          std::span<const double> x, Combiner combiner = Combiner::Mean);

/// ((pred - label) / scale)^2; all three must share units.
double dimensionless_loss(const Quantity& pred, const Quantity& label, const Quantity& scale);

/// |zhat - z| / (|zhat| + |z|).
double state_relative_error(std::span<const double> pred, std::span<const double> truth);

enum class Method { Ols, Lasso };

struct FitOptions {
  Method method = Method::Ols;
  double ridge = 0.0;
  LassoOptions lasso;
  /// Residuals are divided by this monomial (label units) before squaring;
  /// defaults to the decoder. A dimensional loss is `dimensional_loss = true`.
  std::optional<Monomial> loss_scale;
  bool dimensional_loss = false;
};

struct FitReport {
  RegressionModel model;
  bool converged = true;
  bool rank_deficient = false;
  Eigen::Index rank = 0;
  double objective = 0.0;
};

/// Trains eta = y / decoder(x) on the monomial features.
FitReport fit_model(const Dataset& data, const std::vector<Monomial>& monomials, const Monomial& decoder,
                    const FitOptions& opts = {});

struct LassoPath {
  std::vector<double> lambdas;          // decreasing
  std::vector<double> validation_mse;   // dimensionless, one per lambda
  std::vector<bool> converged;
  std::size_t best = 0;                 // index of the smallest validation error
  FitReport report;                     // the fit at lambdas[best]
};

/// Warm-started LASSO fits on a log grid from lambda_max * 10^-1 down to
/// lambda_max * 10^-points, scored on a separate validation set with the
/// decoder as scale. opts.method is ignored. opts.lasso.tol should sit well
/// below the smallest lambda, or the small-lambda fits stop early with
/// spurious weights of order tol.
LassoPath fit_lasso_path(const Dataset& train, const Dataset& validation, const std::vector<Monomial>& monomials,
                         const Monomial& decoder, int points = 10, const FitOptions& opts = {});

struct DecoderSelection {
  std::size_t best = 0;
  std::vector<double> cv_mse;  // one per candidate, label units squared
};

/// K-fold cross-validation over decoder candidates on the training set only.
/// Folds are contiguous index blocks; the score is the dimensional MSE of the
/// held-out fold. Ties go to the earlier candidate.
DecoderSelection select_decoder_cv(const Dataset& train, const std::vector<Monomial>& features,
                                   const std::vector<Monomial>& candidates, std::size_t folds,
                                   const FitOptions& opts = {});

struct Metrics {
  double mse = 0.0;                // dimensional, label units squared
  double dimensionless_mse = 0.0;  // residual / scale, squared
  double pearson = 0.0;
};

std::vector<double> predict_all(const RegressionModel& model, const Dataset& data);
Metrics evaluate(const std::vector<double>& pred, const Dataset& data, const Monomial* scale = nullptr);
double pearson(std::span<const double> a, std::span<const double> b);

/// Max over `n_groups` random g in (0.1, 10)^k and all rows of
/// |f(g.x) - g.f(x)| / |g.f(x)|.
double equivariance_residual(const std::vector<RegressionModel>& models, const Dataset& data,
                             std::size_t n_groups, std::uint64_t seed, std::size_t max_rows = 100);

}  // namespace ueq
