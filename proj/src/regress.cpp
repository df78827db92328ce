#include "ueq/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ueq/errors.hpp"
#include "ueq/rng.hpp"

namespace ueq {

namespace {

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

}  // namespace

void Dataset::validate() const {
  if (labels.size() != rows.size()) {
    throw DataError("dataset has " + std::to_string(rows.size()) + " rows but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != spec.size()) {
      throw DataError("row " + std::to_string(t) + " has " + std::to_string(rows[t].size()) +
                      " values, spec has " + std::to_string(spec.size()) + " features");
    }
  }
  if (label_units.size() != spec.system().size()) throw DataError("label units do not match the unit system");
}

Eigen::MatrixXd build_design_matrix(const std::vector<std::vector<double>>& rows,
                                    const std::vector<Monomial>& monomials) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(monomials.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < monomials.size(); ++j) {
      try {
        X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = evaluate_monomial(monomials[j], rows[t]);
      } catch (const DataError& e) {
        throw DesignMatrixError(t, j, e.what());
      }
    }
  }
  return X;
}

Eigen::MatrixXd build_design_matrix(const Dataset& data, const std::vector<Monomial>& monomials) {
  return build_design_matrix(data.rows, monomials);
}

OlsResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge) {
  if (X.rows() < 1 || X.cols() < 1) throw DataError("fit_ols needs at least one row and one column");
  if (X.rows() != y.size()) throw DataError("fit_ols: X and y disagree on N");
  if (ridge < 0.0) throw DataError("ridge must be nonnegative");
  const Eigen::Index p = X.cols();
  OlsResult out;

  // Equilibrate columns; monomial features span many orders of magnitude.
  Eigen::VectorXd scale = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();

  if (ridge > 0.0) {
    // |Xw - y|^2 + ridge |w|^2 as an augmented least-squares problem.
    Eigen::MatrixXd A(X.rows() + p, p);
    A.topRows(X.rows()) = X;
    A.bottomRows(p) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.rows() + p);
    b.head(X.rows()) = y;
    out.weights = A.householderQr().solve(b);
    out.rank = p;
    return out;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  out.rank = qr.rank();
  if (out.rank == p) {
    out.weights = qr.solve(y).cwiseQuotient(scale);
    return out;
  }
  out.rank_deficient = true;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  out.weights = cod.solve(y);
  return out;
}

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(X.rows());
  const double ybar = y.mean();
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mu = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - mu).square().mean());
    if (sd <= 1e-12 * std::max(std::abs(mu), 1e-300)) continue;
    const double c = ((X.col(j).array() - mu) / sd * (y.array() - ybar)).sum() / n;
    lmax = std::max(lmax, std::abs(c));
  }
  return lmax;
}

LassoResult fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoOptions& opts) {
  if (X.rows() < 1) throw DataError("fit_lasso needs at least one row");
  if (X.rows() != y.size()) throw DataError("fit_lasso: X and y disagree on N");
  if (!(opts.lambda >= 0.0)) throw DataError("lambda must be nonnegative");
  const Eigen::Index n = X.rows(), p = X.cols();
  const double nd = static_cast<double>(n);

  Eigen::VectorXd mu(p), sd(p);
  std::vector<bool> constant(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    mu(j) = X.col(j).mean();
    sd(j) = std::sqrt((X.col(j).array() - mu(j)).square().mean());
    if (sd(j) <= 1e-12 * std::max(std::abs(mu(j)), 1e-300)) {
      constant[static_cast<std::size_t>(j)] = true;
      sd(j) = 1.0;
    }
  }
  Eigen::MatrixXd Z(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (constant[static_cast<std::size_t>(j)]) {
      Z.col(j).setZero();
    } else {
      Z.col(j) = (X.col(j).array() - mu(j)) / sd(j);
    }
  }
  const double ybar = y.mean();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  if (opts.warm_start) {
    if (opts.warm_start->size() != p) throw DataError("fit_lasso: warm start has the wrong length");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!constant[static_cast<std::size_t>(j)]) b(j) = (*opts.warm_start)(j) * sd(j);
    }
  }
  Eigen::VectorXd r = (y.array() - ybar).matrix() - Z * b;

  auto objective = [&] { return r.squaredNorm() / (2.0 * nd) + opts.lambda * b.lpNorm<1>(); };
  auto update = [&](Eigen::Index j) {
    const double rho = Z.col(j).dot(r) / nd + b(j);
    const double next = soft_threshold(rho, opts.lambda);
    const double step = next - b(j);
    if (step != 0.0) {
      r.noalias() -= step * Z.col(j);
      b(j) = next;
    }
    return std::abs(step);
  };

  LassoResult out;
  std::vector<Eigen::Index> active;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!constant[static_cast<std::size_t>(j)]) max_step = std::max(max_step, update(j));
    }
    out.sweeps = sweep + 1;
    out.objective_history.push_back(objective());
    if (max_step < opts.tol) {
      out.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (b(j) != 0.0) active.push_back(j);
    }
    for (int inner = 0; inner < opts.max_sweeps; ++inner) {
      double inner_step = 0.0;
      for (Eigen::Index j : active) inner_step = std::max(inner_step, update(j));
      if (inner_step < opts.tol) break;
    }
  }
  out.objective = objective();

  out.weights = Eigen::VectorXd::Zero(p);
  double offset = ybar;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (constant[static_cast<std::size_t>(j)]) continue;
    out.weights(j) = b(j) / sd(j);
    offset -= out.weights(j) * mu(j);
  }
  // The intercept lives on the first nonzero constant column if there is one.
  Eigen::Index carrier = -1;
  for (Eigen::Index j = 0; j < p && carrier < 0; ++j) {
    if (constant[static_cast<std::size_t>(j)] && mu(j) != 0.0) carrier = j;
  }
  if (carrier >= 0) {
    out.weights(carrier) = offset / mu(carrier);
  } else {
    out.intercept = offset;
  }
  return out;
}

double RegressionModel::eta(std::span<const double> x) const {
  double s = intercept;
  for (std::size_t j = 0; j < monomials.size(); ++j) {
    if (weights[j] != 0.0) s += weights[j] * evaluate_monomial(monomials[j], x);
  }
  return s;
}

Quantity predict(const RegressionModel& model, const FeatureSpec& spec, std::span<const double> x) {
  return apply_decoder(model.decoder, spec, x, model.eta(x));
}

Quantity ensemble_predict(const std::vector<RegressionModel>& models, const FeatureSpec& spec,
                          std::span<const double> x, Combiner combiner) {
  if (models.empty()) throw EmptyEnsemble();
  std::vector<double> values;
  values.reserve(models.size());
  UnitVector units;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Quantity q = predict(models[i], spec, x);
    if (i == 0) {
      units = q.units;
    } else if (q.units != units) {
      throw UnitMismatch(to_string(units), to_string(q.units));
    }
    values.push_back(q.value);
  }
  if (combiner == Combiner::Median) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    const double med = (m % 2) ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    return {med, units};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return {sum / static_cast<double>(values.size()), units};
}

double dimensionless_loss(const Quantity& pred, const Quantity& label, const Quantity& scale) {
  if (pred.units != label.units) throw UnitMismatch(to_string(pred.units), to_string(label.units));
  if (scale.units != label.units) throw UnitMismatch(to_string(scale.units), to_string(label.units));
  if (scale.value == 0.0) throw ZeroScale();
  const double r = (pred.value - label.value) / scale.value;
  return r * r;
}

double state_relative_error(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw DataError("state vectors differ in length");
  double diff = 0.0, np = 0.0, nt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    diff += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    np += pred[i] * pred[i];
    nt += truth[i] * truth[i];
  }
  const double denom = std::sqrt(np) + std::sqrt(nt);
  if (denom == 0.0) throw BothZero();
  return std::sqrt(diff) / denom;
}

FitReport fit_model(const Dataset& data, const std::vector<Monomial>& monomials, const Monomial& decoder,
                    const FitOptions& opts) {
  data.validate();
  if (monomial_units(decoder, data.spec) != data.label_units) {
    throw UnitMismatch(to_string(monomial_units(decoder, data.spec)), to_string(data.label_units));
  }
  if (opts.loss_scale && monomial_units(*opts.loss_scale, data.spec) != data.label_units) {
    throw UnitMismatch(to_string(monomial_units(*opts.loss_scale, data.spec)), to_string(data.label_units));
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X = build_design_matrix(data, monomials);
  Eigen::VectorXd eta(n), weight(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& row = data.rows[static_cast<std::size_t>(t)];
    const double dec = evaluate_monomial(decoder, row);
    if (dec == 0.0) throw DesignMatrixError(static_cast<std::size_t>(t), 0, "decoder is zero");
    eta(t) = data.labels[static_cast<std::size_t>(t)] / dec;
    if (opts.dimensional_loss) {
      weight(t) = dec;
    } else if (opts.loss_scale) {
      const double s = evaluate_monomial(*opts.loss_scale, row);
      if (s == 0.0) throw ZeroScale();
      weight(t) = dec / s;
    } else {
      weight(t) = 1.0;
    }
  }
  // |dec*eta_hat - y| / scale = |w_t| |eta_hat - eta|: a row-weighted problem.
  const bool unit_weights = (weight.array() == 1.0).all();
  if (!unit_weights) {
    X = weight.asDiagonal() * X;
    eta = eta.cwiseProduct(weight);
  }

  FitReport rep;
  rep.model.monomials = monomials;
  rep.model.decoder = decoder;
  rep.model.label_units = data.label_units;
  if (opts.method == Method::Ols) {
    OlsResult ols = fit_ols(X, eta, opts.ridge);
    rep.model.weights.assign(ols.weights.data(), ols.weights.data() + ols.weights.size());
    rep.rank = ols.rank;
    rep.rank_deficient = ols.rank_deficient;
    rep.objective = (X * ols.weights - eta).squaredNorm() / static_cast<double>(n);
  } else {
    LassoOptions lo = opts.lasso;
    LassoResult lasso = fit_lasso(X, eta, lo);
    if (!unit_weights && lasso.intercept != 0.0) {
      // A free intercept in the weighted problem is not a model term; refit
      // with an explicit constant column instead.
      throw DataError("LASSO with a non-uniform loss scale needs the constant monomial in the feature list");
    }
    rep.model.weights.assign(lasso.weights.data(), lasso.weights.data() + lasso.weights.size());
    rep.model.intercept = lasso.intercept;
    rep.converged = lasso.converged;
    rep.objective = lasso.objective;
    rep.rank = X.cols();
  }
  return rep;
}

LassoPath fit_lasso_path(const Dataset& train, const Dataset& validation, const std::vector<Monomial>& monomials,
                         const Monomial& decoder, int points, const FitOptions& opts) {
  if (points < 1) throw DataError("fit_lasso_path needs at least one lambda");
  Eigen::VectorXd eta(static_cast<Eigen::Index>(train.size()));
  for (std::size_t t = 0; t < train.size(); ++t) {
    eta(static_cast<Eigen::Index>(t)) = train.labels[t] / evaluate_monomial(decoder, train.rows[t]);
  }
  const double lmax = lasso_lambda_max(build_design_matrix(train, monomials), eta);

  LassoPath path;
  FitOptions o = opts;
  o.method = Method::Lasso;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= points; ++i) {
    o.lasso.lambda = lmax * std::pow(10.0, -i);
    FitReport rep = fit_model(train, monomials, decoder, o);
    o.lasso.warm_start = Eigen::Map<const Eigen::VectorXd>(rep.model.weights.data(),
                                                           static_cast<Eigen::Index>(rep.model.weights.size()));
    const double v = evaluate(predict_all(rep.model, validation), validation, &decoder).dimensionless_mse;
    path.lambdas.push_back(o.lasso.lambda);
    path.validation_mse.push_back(v);
    path.converged.push_back(rep.converged);
    if (v < best || path.lambdas.size() == 1) {
      best = v;
      path.best = path.lambdas.size() - 1;
      path.report = std::move(rep);
    }
  }
  return path;
}

DecoderSelection select_decoder_cv(const Dataset& train, const std::vector<Monomial>& features,
                                   const std::vector<Monomial>& candidates, std::size_t folds,
                                   const FitOptions& opts) {
  if (candidates.empty()) throw DataError("select_decoder_cv: no candidates");
  if (folds < 2 || folds > train.size()) throw DataError("select_decoder_cv: need 2 <= folds <= N");
  const std::size_t n = train.size();
  DecoderSelection out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double sse = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::size_t lo = f * n / folds, hi = (f + 1) * n / folds;
      Dataset fit{train.spec, {}, {}, train.label_units};
      Dataset held{train.spec, {}, {}, train.label_units};
      for (std::size_t t = 0; t < n; ++t) {
        Dataset& dst = (t >= lo && t < hi) ? held : fit;
        dst.rows.push_back(train.rows[t]);
        dst.labels.push_back(train.labels[t]);
      }
      const FitReport rep = fit_model(fit, features, candidates[c], opts);
      const auto pred = predict_all(rep.model, held);
      for (std::size_t t = 0; t < held.size(); ++t) sse += (pred[t] - held.labels[t]) * (pred[t] - held.labels[t]);
    }
    const double mse = sse / static_cast<double>(n);
    out.cv_mse.push_back(mse);
    if (mse < best) {
      best = mse;
      out.best = c;
    }
  }
  return out;
}

std::vector<double> predict_all(const RegressionModel& model, const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& row : data.rows) out.push_back(predict(model, data.spec, row).value);
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw DataError("pearson: bad lengths");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Metrics evaluate(const std::vector<double>& pred, const Dataset& data, const Monomial* scale) {
  if (pred.size() != data.size()) throw DataError("evaluate: prediction count mismatch");
  Metrics m;
  if (pred.empty()) return m;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const double r = pred[t] - data.labels[t];
    m.mse += r * r;
    if (scale) {
      const double s = evaluate_monomial(*scale, data.rows[t]);
      m.dimensionless_mse += (r / s) * (r / s);
    }
  }
  m.mse /= static_cast<double>(pred.size());
  m.dimensionless_mse /= static_cast<double>(pred.size());
  m.pearson = pearson(pred, data.labels);
  return m;
}

double equivariance_residual(const std::vector<RegressionModel>& models, const Dataset& data,
                             std::size_t n_groups, std::uint64_t seed, std::size_t max_rows) {
  if (models.empty()) throw EmptyEnsemble();
  const auto units = data.spec.units();
  const std::size_t k = data.spec.system().size();
  const std::size_t rows = std::min(max_rows, data.size());
  Rng rng(seed);
  double worst = 0.0;
  std::vector<double> base(rows);
  for (std::size_t t = 0; t < rows; ++t) base[t] = ensemble_predict(models, data.spec, data.rows[t]).value;
  for (std::size_t i = 0; i < n_groups; ++i) {
    std::vector<double> gv(k);
    for (auto& c : gv) c = rng.log_uniform(0.1, 10.0);
    const GroupElement g(gv);
    const double out_factor = g.factor(models.front().label_units);
    for (std::size_t t = 0; t < rows; ++t) {
      const auto moved = rescale_values(g, data.rows[t], units);
      const double lhs = ensemble_predict(models, data.spec, moved).value;
      const double rhs = out_factor * base[t];
      const double denom = std::abs(rhs) > 0.0 ? std::abs(rhs) : 1.0;
      worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
  }
  return worst;
}

}  // namespace ueq
