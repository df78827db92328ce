// ueq: command-line front end for units checking, basis generation,
// monomial enumeration, regression and the canned experiments.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ueq/errors.hpp"
#include "ueq/experiments.hpp"
#include "ueq/intlinalg.hpp"
#include "ueq/io.hpp"

namespace fs = std::filesystem;
using namespace ueq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnits = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

// Errors raised while reading data files count as data errors even when
// they are unit disagreements.
struct DataPhaseError : DataError {
  using DataError::DataError;
};

Dataset load_data(const fs::path& path, const FeatureSpec& spec) {
  try {
    return load_csv(path, spec);
  } catch (const UnitsError& e) {
    throw DataPhaseError(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ config merge

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return Json::parse(in);
}

std::string json_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Top-level keys apply to every subcommand; a section named after the
// subcommand overrides them. Explicit flags win over both.
void merge_config(CLI::App* sub, const Json& cfg) {
  Json merged = Json::object();
  for (const auto& [k, v] : cfg.items()) {
    if (!v.is_object()) merged[k] = v;
  }
  if (cfg.contains(sub->get_name()) && cfg.at(sub->get_name()).is_object()) {
    for (const auto& [k, v] : cfg.at(sub->get_name()).items()) merged[k] = v;
  }
  for (CLI::Option* opt : sub->get_options()) {
    if (opt->count() > 0) continue;
    const std::string key = opt->get_single_name();
    auto it = merged.find(key);
    if (it == merged.end()) continue;
    if (opt->get_type_size() == 0 && it->is_boolean() && !it->get<bool>()) continue;
    opt->add_result(json_scalar(*it));
    opt->run_callback();
  }
}

Json resolved_config(const CLI::App* sub) {
  Json j = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key = opt->get_single_name();
    if (key == "help" || key.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      j[key] = res.size() == 1 ? res.front() : Json(res).dump();
    } else if (opt->get_type_size() == 0) {
      j[key] = "false";
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

// ------------------------------------------------------------ shared bits

Json report_header(const std::string& command, const CLI::App* sub) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = resolved_config(sub);
  return j;
}

void write_predictions(const fs::path& path, const std::vector<double>& pred, const std::vector<double>& truth) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "predicted,true,residual\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << pred[i] << ',' << truth[i] << ',' << pred[i] - truth[i] << '\n';
}

Json metrics_json(const Metrics& m) {
  return {{"mse", m.mse}, {"dimensionless_mse", m.dimensionless_mse}, {"pearson", m.pearson}};
}

void print_monomials(const std::vector<Monomial>& ms, const FeatureSpec& spec) {
  for (std::size_t i = 0; i < ms.size(); ++i) {
    std::printf("  [%zu] %s\n", i, format_monomial(ms[i], spec).c_str());
  }
}

std::vector<Monomial> load_feature_file(const fs::path& path, const FeatureSpec& spec) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::exception& e) {
    throw SpecError(std::string("feature file: ") + e.what());
  }
  const Json& list = j.is_object() && j.contains("monomials") ? j.at("monomials") : j;
  if (!list.is_array()) throw SpecError("feature file must hold a monomial array");
  std::vector<Monomial> out;
  for (const auto& item : list) {
    if (item.is_string()) {
      out.push_back(parse_monomial(item.get<std::string>(), spec));
    } else if (item.contains("exps")) {
      out.push_back(monomial_from_json(item, spec));
    } else {
      out.push_back(parse_monomial(item.at("expr").get<std::string>(), spec));
    }
  }
  return out;
}

// ------------------------------------------------------------ units-check

struct UnitsCheckArgs {
  std::string spec;
  std::string json_out;
};

int cmd_units_check(const UnitsCheckArgs& a, const CLI::App* sub) {
  const SpecFile sf = load_spec(a.spec);
  const FeatureSpec& spec = sf.spec;
  const auto& sys = spec.system();
  const std::size_t d = spec.size(), k = sys.size();
  const std::size_t r = rank(spec.units_matrix());
  std::printf("d=%zu k=%zu rank=%zu s=%zu\n", d, k, r, d - r);

  Json warnings = Json::array();
  for (std::size_t i = 0; i < d; ++i) {
    std::printf("  %-12s %-24s %s\n", spec[i].name.c_str(), sys.format(spec[i].units).c_str(),
                to_string(spec[i].units).c_str());
    if (spec[i].units.is_dimensionless()) warnings.push_back(spec[i].name + " is already dimensionless");
    for (std::size_t j = 0; j < i; ++j) {
      if (spec[j].units == spec[i].units) warnings.push_back(spec[j].name + " and " + spec[i].name + " share units");
    }
  }
  if (r < k) warnings.push_back("base units are not independent over the features (rank " + std::to_string(r) + " < k)");
  std::optional<bool> label_ok;
  if (sf.label_units) {
    std::vector<std::int64_t> v(sf.label_units->exps().begin(), sf.label_units->exps().end());
    label_ok = solve_diophantine(spec.units_matrix(), v).has_value();
    if (!*label_ok) warnings.push_back("label units are not an integer combination of the feature units");
  }
  for (const auto& w : warnings) std::printf("warning: %s\n", w.get<std::string>().c_str());

  if (!a.json_out.empty()) {
    Json j = report_header("units-check", sub);
    j["d"] = d;
    j["k"] = k;
    j["rank"] = r;
    j["s"] = d - r;
    j["warnings"] = warnings;
    if (label_ok) j["label_decodable"] = *label_ok;
    write_json(a.json_out, j);
  }
  if (label_ok && !*label_ok) return kExitUnits;
  return kExitOk;
}

// ------------------------------------------------------------ basis

struct BasisArgs {
  std::string spec;
  std::string out;
};

int cmd_basis(const BasisArgs& a, const CLI::App* sub) {
  const SpecFile sf = load_spec(a.spec);
  const auto basis = dimensionless_basis(sf.spec);
  std::printf("s=%zu\n", basis.size());
  print_monomials(basis, sf.spec);
  if (!a.out.empty()) {
    Json j = report_header("basis", sub);
    j["count"] = basis.size();
    j["monomials"] = monomials_to_json(basis, sf.spec);
    write_json(a.out, j);
  }
  return kExitOk;
}

// ------------------------------------------------------------ enumerate

struct EnumerateArgs {
  std::string spec;
  int max_degree = 2;
  bool dimensionless_only = false;
  int max_total_degree = -1;
  double cap = 1e8;
  bool list = false;
  std::string out;
};

int cmd_enumerate(const EnumerateArgs& a, const CLI::App* sub) {
  const SpecFile sf = load_spec(a.spec);
  EnumerationOptions opts;
  opts.max_degree = a.max_degree;
  opts.dimensionless_only = a.dimensionless_only;
  if (a.max_total_degree >= 0) opts.max_total_degree = a.max_total_degree;
  opts.cap = a.cap;
  const auto ms = enumerate_monomials(sf.spec, opts);
  std::printf("count=%zu\n", ms.size());
  if (a.list) print_monomials(ms, sf.spec);
  if (!a.out.empty()) {
    Json j = report_header("enumerate", sub);
    j["count"] = ms.size();
    j["monomials"] = monomials_to_json(ms, sf.spec);
    write_json(a.out, j);
  }
  return kExitOk;
}

// ------------------------------------------------------------ regress

struct RegressArgs {
  std::string train;
  std::string spec;
  std::string test;
  std::string features = "basis";
  std::string method = "ols";
  double lambda = 1e-6;
  double ridge = 0.0;
  int max_sweeps = 100000;
  double tol = 1e-10;
  std::string decoder = "auto";
  int decoder_degree = 4;
  std::size_t max_ensemble = 16;
  std::string loss_scale;
  bool dimensional_loss = false;
  std::uint64_t seed = 1;
  std::string report;
  std::string predictions;
  std::string model_out;
};

std::vector<Monomial> resolve_features(const std::string& how, const FeatureSpec& spec) {
  if (how == "basis") {
    std::vector<Monomial> out{Monomial::constant(spec.size())};
    for (auto& m : dimensionless_basis(spec)) out.push_back(std::move(m));
    return out;
  }
  if (how.rfind("enumerate:", 0) == 0) {
    const std::string deg = how.substr(10);
    int n = 0;
    try {
      n = std::stoi(deg);
    } catch (const std::exception&) {
      throw SpecError("bad degree in --features " + how);
    }
    return enumerate_monomials(spec, n, true);
  }
  return load_feature_file(how, spec);
}

std::vector<Monomial> resolve_decoders(const RegressArgs& a, const FeatureSpec& spec, const UnitVector& label_units) {
  const auto candidates = decoder_solutions(spec, label_units, a.decoder_degree);
  if (candidates.empty()) {
    throw SpecError("no monomial of degree <= " + std::to_string(a.decoder_degree) + " has the label units " +
                    spec.system().format(label_units));
  }
  if (a.decoder == "auto") {
    auto best = std::min_element(candidates.begin(), candidates.end(), [](const Monomial& x, const Monomial& y) {
      return total_degree(x) < total_degree(y);
    });
    return {*best};
  }
  if (a.decoder.rfind("cv:", 0) == 0) return candidates;  // narrowed after loading data
  if (a.decoder == "ensemble") {
    std::vector<Monomial> out(candidates.begin(),
                              candidates.begin() + static_cast<long>(std::min(a.max_ensemble, candidates.size())));
    return out;
  }
  if (a.decoder.rfind("index:", 0) == 0) {
    std::size_t i = 0;
    try {
      i = std::stoul(a.decoder.substr(6));
    } catch (const std::exception&) {
      throw SpecError("bad --decoder " + a.decoder);
    }
    if (i >= candidates.size()) {
      throw SpecError("--decoder index " + std::to_string(i) + " out of range (" + std::to_string(candidates.size()) +
                      " candidates)");
    }
    return {candidates[i]};
  }
  throw SpecError("--decoder must be auto, ensemble, cv:<folds> or index:<i>");
}

std::vector<double> predict_models(const std::vector<RegressionModel>& models, const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& row : data.rows) out.push_back(ensemble_predict(models, data.spec, row).value);
  return out;
}

int cmd_regress(const RegressArgs& a, const CLI::App* sub) {
  const SpecFile sf = load_spec(a.spec);
  const FeatureSpec& spec = sf.spec;
  const Dataset train = load_data(a.train, spec);
  std::optional<Dataset> test;
  if (!a.test.empty()) test = load_data(a.test, spec);
  if (sf.label_units && *sf.label_units != train.label_units) {
    throw DataPhaseError("training labels are " + spec.system().format(train.label_units) + ", spec says " +
                         spec.system().format(*sf.label_units));
  }
  if (test && test->label_units != train.label_units) throw DataPhaseError("train and test label units differ");

  const auto features = resolve_features(a.features, spec);
  bool equivariant = true;
  for (const auto& m : features) equivariant = equivariant && monomial_units(m, spec).is_dimensionless();
  auto decoders = resolve_decoders(a, spec, train.label_units);

  FitOptions opts;
  if (a.method == "ols") {
    opts.method = Method::Ols;
  } else if (a.method == "lasso") {
    opts.method = Method::Lasso;
  } else {
    throw SpecError("--method must be ols or lasso");
  }
  opts.ridge = a.ridge;
  opts.lasso.lambda = a.lambda;
  opts.lasso.max_sweeps = a.max_sweeps;
  opts.lasso.tol = a.tol;
  opts.dimensional_loss = a.dimensional_loss;
  std::optional<Monomial> scale;
  if (!a.loss_scale.empty()) {
    scale = parse_monomial(a.loss_scale, spec);
    opts.loss_scale = scale;
  }

  Json cv_report;
  if (a.decoder.rfind("cv:", 0) == 0) {
    std::size_t folds = 0;
    try {
      folds = std::stoul(a.decoder.substr(3));
    } catch (const std::exception&) {
      throw SpecError("bad --decoder " + a.decoder);
    }
    const DecoderSelection sel = select_decoder_cv(train, features, decoders, folds, opts);
    cv_report = Json::array();
    for (std::size_t i = 0; i < decoders.size(); ++i) {
      cv_report.push_back({{"decoder", format_monomial(decoders[i], spec)}, {"cv_mse", sel.cv_mse[i]}});
    }
    decoders = {decoders[sel.best]};
  }

  std::vector<RegressionModel> models;
  Json fits = Json::array();
  bool converged = true;
  for (const auto& dec : decoders) {
    FitReport rep = fit_model(train, features, dec, opts);
    converged = converged && rep.converged;
    Json f;
    f["decoder"] = format_monomial(dec, spec);
    f["converged"] = rep.converged;
    f["rank"] = rep.rank;
    f["rank_deficient"] = rep.rank_deficient;
    f["objective"] = rep.objective;
    Json top = Json::array();
    for (const auto& t : top_weights(rep.model, spec, 10)) top.push_back({{"monomial", t.expr}, {"weight", t.weight}});
    f["top_weights"] = top;
    f["model"] = model_to_json(rep.model, spec);
    fits.push_back(std::move(f));
    models.push_back(std::move(rep.model));
  }

  const Monomial& metric_scale = scale ? *scale : decoders.front();
  const auto train_pred = predict_models(models, train);
  const Metrics train_m = evaluate(train_pred, train, &metric_scale);
  std::optional<Metrics> test_m;
  std::vector<double> test_pred;
  if (test) {
    test_pred = predict_models(models, *test);
    test_m = evaluate(test_pred, *test, &metric_scale);
  }
  const Dataset& probe = test ? *test : train;
  const double equiv = equivariance_residual(models, probe, 100, a.seed);

  std::printf("features=%zu decoders=%zu method=%s equivariant_features=%s\n", features.size(), decoders.size(),
              a.method.c_str(), equivariant ? "yes" : "no");
  std::printf("train mse=%.6e dimensionless_mse=%.6e pearson=%.6f\n", train_m.mse, train_m.dimensionless_mse,
              train_m.pearson);
  if (test_m) {
    std::printf("test  mse=%.6e dimensionless_mse=%.6e pearson=%.6f\n", test_m->mse, test_m->dimensionless_mse,
                test_m->pearson);
  }
  std::printf("equivariance residual (100 rescalings): %.3e\n", equiv);
  for (std::size_t i = 0; i < models.size(); ++i) {
    std::printf("decoder %s\n", format_monomial(models[i].decoder, spec).c_str());
    for (const auto& t : top_weights(models[i], spec, 10)) std::printf("  %+.12f  %s\n", t.weight, t.expr.c_str());
  }
  if (!converged) std::fprintf(stderr, "warning: LASSO did not converge within %d sweeps\n", a.max_sweeps);

  if (!a.report.empty()) {
    Json j = report_header("regress", sub);
    j["n_train"] = train.size();
    j["n_test"] = test ? test->size() : 0;
    j["n_features"] = features.size();
    j["equivariant_features"] = equivariant;
    j["converged"] = converged;
    j["fits"] = fits;
    if (!cv_report.is_null()) j["decoder_cv"] = cv_report;
    j["train"] = metrics_json(train_m);
    if (test_m) j["test"] = metrics_json(*test_m);
    j["equivariance_residual"] = equiv;
    write_json(a.report, j);
  }
  if (!a.predictions.empty()) {
    write_predictions(a.predictions, test ? test_pred : train_pred, probe.labels);
  }
  if (!a.model_out.empty()) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["spec"] = spec_to_json(spec, train.label_units);
    j["models"] = Json::array();
    for (const auto& m : models) j["models"].push_back(model_to_json(m, spec));
    j["training"] = {{"seed", a.seed},
                     {"method", a.method},
                     {"lambda", a.lambda},
                     {"ridge", a.ridge},
                     {"converged", converged}};
    write_json(a.model_out, j);
  }
  return converged ? kExitOk : kExitConvergence;
}

// ------------------------------------------------------------ experiment

struct ExperimentArgs {
  std::string name;
  std::string scale = "desk";
  std::uint64_t seed = 1;
  std::string out = "ueq-out";
  unsigned threads = 1;
  std::string basis = "reference";
  bool record_timing = false;
};

int experiment_springy(const ExperimentArgs& a, const fs::path& out, Json& report) {
  const bool paper = a.scale == "paper";
  const std::size_t n_train = paper ? 8192 : 2048, n_test = paper ? 1024 : 512;
  const Dataset train = sample_pendulum_dataset(n_train, derive_seed(a.seed, 0));
  const Dataset test = sample_pendulum_dataset(n_test, derive_seed(a.seed, 1));
  const FeatureSpec& spec = train.spec;
  const auto features = enumerate_monomials(spec, 2, true);
  const Monomial dec = pendulum_decoder(spec);
  const FitReport rep = fit_model(train, features, dec);
  const auto pred = predict_all(rep.model, test);
  const Metrics m = evaluate(pred, test, &dec);
  const double equiv = equivariance_residual({rep.model}, test, 100, derive_seed(a.seed, 2));

  std::printf("springy pendulum: %zu dimensionless features, N_train=%zu N_test=%zu\n", features.size(), n_train,
              n_test);
  std::printf("%-36s %10s %22s\n", "monomial", "exact", "fitted");
  Json table = Json::array();
  for (const auto& t : hamiltonian_term_table(rep.model, spec)) {
    std::printf("%-36s %10.4f %22.15f\n", t.expr.c_str(), t.expected, t.fitted);
    table.push_back({{"monomial", t.expr}, {"exact", t.expected}, {"fitted", t.fitted}});
  }
  const double off = max_off_support_weight(rep.model, spec);
  std::printf("max |weight| off the Hamiltonian terms: %.3e\n", off);
  std::printf("test dimensionless mse=%.3e  equivariance residual=%.3e\n", m.dimensionless_mse, equiv);

  save_csv(out / "train.csv", train);
  save_csv(out / "test.csv", test);
  write_predictions(out / "predictions.csv", pred, test.labels);
  write_json(out / "model.json", model_to_json(rep.model, spec));
  report["n_train"] = n_train;
  report["n_test"] = n_test;
  report["n_features"] = features.size();
  report["decoder"] = format_monomial(dec, spec);
  report["coefficients"] = table;
  report["max_off_support_weight"] = off;
  report["rank"] = rep.rank;
  report["test"] = metrics_json(m);
  report["equivariance_residual"] = equiv;
  return kExitOk;
}

int experiment_blackbody(const ExperimentArgs& a, const fs::path& out, Json& report) {
  const bool paper = a.scale == "paper";
  const std::size_t n_train = paper ? 1024 : 256, n_test = paper ? 256 : 64;
  const Dataset train = planck_dataset(n_train, derive_seed(a.seed, 0));
  const Dataset test = planck_dataset(n_test, derive_seed(a.seed, 1));
  const FeatureSpec& spec = train.spec;
  const auto basis = dimensionless_basis(spec);
  const auto decoders = decoder_solutions(spec, train.label_units, 4);
  if (decoders.size() != 1) throw SpecError("expected a unique decoder, found " + std::to_string(decoders.size()));
  const Monomial& dec = decoders.front();
  std::vector<Monomial> features{Monomial::constant(spec.size())};
  const FitReport rep = fit_model(train, features, dec);
  const auto pred = predict_all(rep.model, test);
  const Metrics m = evaluate(pred, test, &dec);

  std::printf("black body: s=%zu, decoder %s (unique to degree 4)\n", basis.size(), format_monomial(dec, spec).c_str());
  std::printf("fitted model: %.6f * %s\n", rep.model.weights[0], format_monomial(dec, spec).c_str());
  std::printf("test relative mse=%.3e pearson=%.6f\n", m.dimensionless_mse, m.pearson);

  save_csv(out / "train.csv", train);
  save_csv(out / "test.csv", test);
  write_predictions(out / "predictions.csv", pred, test.labels);
  write_json(out / "model.json", model_to_json(rep.model, spec));
  report["s"] = basis.size();
  report["decoder"] = format_monomial(dec, spec);
  report["decoder_count"] = decoders.size();
  report["C"] = rep.model.weights[0];
  report["test"] = metrics_json(m);
  return kExitOk;
}

int experiment_rietkerk(const ExperimentArgs& a, const fs::path& out, Json& report) {
  const bool paper = a.scale == "paper";
  const GridScale scale = paper ? GridScale::paper() : GridScale::desk();
  const std::size_t n_train = paper ? 1000 : 200, n_test = paper ? 100 : 50;
  const RietkerkExperiment ex = rietkerk_experiment(n_train, n_test, a.seed, scale, a.threads);
  const FeatureSpec& spec = ex.train.spec;

  std::vector<Monomial> basis;
  if (a.basis == "reference") {
    basis = rietkerk_reference_basis(spec);
  } else if (a.basis == "computed") {
    basis = dimensionless_basis(spec);
  } else {
    throw SpecError("--basis must be reference or computed");
  }
  const RietkerkComparison cmp = compare_rietkerk(ex.train, ex.test, basis);
  const ComparisonFit& base = cmp.baseline;
  const ComparisonFit& dl = cmp.dimensionless;
  const auto& candidates = cmp.candidates;
  const DecoderSelection& sel = cmp.selection;
  const Monomial& dec = cmp.decoder;

  std::printf("rietkerk (%s scale): %zu x %zu grid, T=%g d, %zu runs, %zu extinct\n", a.scale.c_str(), scale.cells,
              scale.cells, scale.T, ex.attempted, ex.extinct);
  std::printf("decoder %s chosen by 5-fold CV on the training set from %zu candidates\n",
              format_monomial(dec, spec).c_str(), candidates.size());
  std::printf("%-28s %14s %14s %10s\n", "model", "train mse", "test mse", "pearson");
  std::printf("%-28s %14.4f %14.4f %10.4f\n", "baseline (33 features)", base.train.mse, base.test.mse,
              base.test.pearson);
  std::printf("%-28s %14.4f %14.4f %10.4f\n", "dimensionless (25 features)", dl.train.mse, dl.test.mse,
              dl.test.pearson);

  save_csv(out / "train.csv", ex.train);
  save_csv(out / "test.csv", ex.test);
  write_predictions(out / "predictions_baseline.csv", predict_all(base.model, ex.test), ex.test.labels);
  write_predictions(out / "predictions_dimensionless.csv", predict_all(dl.model, ex.test), ex.test.labels);
  write_json(out / "model_dimensionless.json", model_to_json(dl.model, spec));

  RietkerkParams defaults;
  Json params = Json::object();
  for (std::size_t i = 0; i < RietkerkParams::kCount; ++i) {
    params[RietkerkParams::names()[i]] = {{"default", defaults.values()[i]},
                                          {"units", RietkerkParams::unit_expressions()[i]}};
  }
  report["grid"] = {{"cells", scale.cells}, {"T", scale.T}, {"delta_l", scale.delta_l}};
  report["params"] = params;
  report["runs_attempted"] = ex.attempted;
  report["runs_extinct"] = ex.extinct;
  report["n_train"] = ex.train.size();
  report["n_test"] = ex.test.size();
  report["basis"] = monomials_to_json(basis, spec);
  report["decoder"] = format_monomial(dec, spec);
  Json cv = Json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cv.push_back({{"decoder", format_monomial(candidates[i], spec)}, {"cv_mse", sel.cv_mse[i]}});
  }
  report["decoder_cv"] = cv;
  report["baseline"] = {{"features", 33}, {"rank", base.rank}, {"train", metrics_json(base.train)},
                        {"test", metrics_json(base.test)}};
  report["dimensionless"] = {{"features", 25}, {"rank", dl.rank}, {"train", metrics_json(dl.train)},
                             {"test", metrics_json(dl.test)}};
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& a, const CLI::App* sub) {
  if (a.scale != "desk" && a.scale != "paper") throw SpecError("--scale must be desk or paper");
  const fs::path out = a.out;
  fs::create_directories(out);
  Json report = report_header("experiment", sub);
  report["experiment"] = a.name;
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitOk;
  if (a.name == "springy") {
    code = experiment_springy(a, out, report);
  } else if (a.name == "blackbody") {
    code = experiment_blackbody(a, out, report);
  } else if (a.name == "rietkerk") {
    code = experiment_rietkerk(a, out, report);
  } else {
    throw SpecError("unknown experiment " + a.name);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("wall time %.1f s; artifacts in %s\n", secs, out.string().c_str());
  // Wall time would break byte-identical reruns, so it is opt-in.
  if (a.record_timing) report["wall_seconds"] = secs;
  write_json(out / "report.json", report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Units-equivariant feature construction and regression"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of default flag values")->envname("UEQ_CONFIG");

  UnitsCheckArgs uc;
  auto* s_uc = app.add_subcommand("units-check", "Report d, k, rank and the number of dimensionless features");
  s_uc->add_option("spec", uc.spec, "Spec JSON file")->required();
  s_uc->add_option("--json", uc.json_out, "Write a JSON report here");

  BasisArgs ba;
  auto* s_ba = app.add_subcommand("basis", "Dimensionless lattice basis from the Smith normal form");
  s_ba->add_option("spec", ba.spec, "Spec JSON file")->required();
  s_ba->add_option("--out", ba.out, "Write the basis as JSON");

  EnumerateArgs en;
  auto* s_en = app.add_subcommand("enumerate", "Enumerate rational monomials up to a degree");
  s_en->add_option("spec", en.spec, "Spec JSON file")->required();
  s_en->add_option("--max-degree", en.max_degree, "Maximum weighted degree")->check(CLI::NonNegativeNumber);
  s_en->add_flag("--dimensionless-only", en.dimensionless_only, "Keep only monomials with zero units");
  s_en->add_option("--max-total-degree", en.max_total_degree, "Extra budget on the sum of |exponents| (-1: none)");
  s_en->add_option("--cap", en.cap, "Abort when the sweep would visit more candidates");
  s_en->add_flag("--list", en.list, "Print every monomial");
  s_en->add_option("--out", en.out, "Write the monomials as JSON");

  RegressArgs rg;
  auto* s_rg = app.add_subcommand("regress", "Fit a units-equivariant linear model");
  s_rg->add_option("train", rg.train, "Training CSV (names line, units line, rows)")->required();
  s_rg->add_option("--spec", rg.spec, "Spec JSON file")->required();
  s_rg->add_option("--test", rg.test, "Held-out CSV");
  s_rg->add_option("--features", rg.features, "basis | enumerate:<deg> | monomial JSON file");
  s_rg->add_option("--method", rg.method, "ols | lasso");
  s_rg->add_option("--lambda", rg.lambda, "LASSO penalty")->check(CLI::NonNegativeNumber);
  s_rg->add_option("--ridge", rg.ridge, "Ridge penalty for OLS")->check(CLI::NonNegativeNumber);
  s_rg->add_option("--max-sweeps", rg.max_sweeps, "LASSO sweep budget");
  s_rg->add_option("--tol", rg.tol, "LASSO convergence tolerance");
  s_rg->add_option("--decoder", rg.decoder, "auto | index:<i> | ensemble | cv:<folds>");
  s_rg->add_option("--decoder-degree", rg.decoder_degree, "Degree bound for the decoder search");
  s_rg->add_option("--max-ensemble", rg.max_ensemble, "Largest decoder ensemble");
  s_rg->add_option("--loss-scale", rg.loss_scale, "Monomial with label units dividing the residuals");
  s_rg->add_flag("--dimensional-loss", rg.dimensional_loss, "Fit the raw squared residual instead");
  s_rg->add_option("--seed", rg.seed, "Seed for the equivariance self-check");
  s_rg->add_option("--report", rg.report, "Write a JSON report here");
  s_rg->add_option("--predictions", rg.predictions, "Write predicted,true,residual CSV here");
  s_rg->add_option("--model-out", rg.model_out, "Write the fitted model JSON here");

  ExperimentArgs ex;
  auto* s_ex = app.add_subcommand("experiment", "Run a canned experiment end to end");
  s_ex->add_option("name", ex.name, "springy | blackbody | rietkerk")
      ->required()
      ->check(CLI::IsMember({"springy", "blackbody", "rietkerk"}));
  s_ex->add_option("--scale", ex.scale, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  s_ex->add_option("--seed", ex.seed, "Master seed");
  s_ex->add_option("--out", ex.out, "Output directory");
  s_ex->add_option("--threads", ex.threads, "Worker threads for simulations")->check(CLI::PositiveNumber);
  s_ex->add_option("--basis", ex.basis, "Rietkerk dimensionless basis: reference | computed");
  s_ex->add_flag("--record-timing", ex.record_timing, "Store wall time in report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) {
      try {
        merge_config(sub, read_json_file(config_path));
      } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: config %s: %s\n", config_path.c_str(), e.what());
        return kExitUsage;
      } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: config %s: %s\n", config_path.c_str(), e.what());
        return kExitUsage;
      }
    }
    if (sub == s_uc) return cmd_units_check(uc, sub);
    if (sub == s_ba) return cmd_basis(ba, sub);
    if (sub == s_en) return cmd_enumerate(en, sub);
    if (sub == s_rg) return cmd_regress(rg, sub);
    return cmd_experiment(ex, sub);
  } catch (const DataPhaseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const UnitsError& e) {
    std::fprintf(stderr, "units error: %s\n", e.what());
    return kExitUnits;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
