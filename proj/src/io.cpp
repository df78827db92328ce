#include "ueq/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_double(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace

SpecFile spec_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw SpecError("spec must be a JSON object");
    if (!j.contains("base_units") || !j.at("base_units").is_array() || j.at("base_units").empty()) {
      throw SpecError("spec needs a nonempty 'base_units' array");
    }
    BaseUnitSystem sys = BaseUnitSystem::with_si_aliases(j.at("base_units").get<std::vector<std::string>>());
    if (j.contains("aliases")) {
      for (const auto& [name, expr] : j.at("aliases").items()) sys.add_alias(name, expr.get<std::string>());
    }
    if (!j.contains("features") || !j.at("features").is_array() || j.at("features").empty()) {
      throw SpecError("spec needs a nonempty 'features' array");
    }
    std::vector<FeatureDescriptor> feats;
    for (const auto& f : j.at("features")) {
      FeatureDescriptor d;
      d.name = f.at("name").get<std::string>();
      d.units = sys.parse(f.at("units").get<std::string>());
      d.degree_weight = f.value("degree_weight", 1);
      d.allow_negative_exponent = f.value("allow_negative_exponent", true);
      feats.push_back(std::move(d));
    }
    SpecFile out{FeatureSpec(sys, std::move(feats)), std::nullopt};
    if (j.contains("label_units")) out.label_units = sys.parse(j.at("label_units").get<std::string>());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad spec JSON: ") + e.what());
  }
}

SpecFile load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("cannot parse " + path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

Json spec_to_json(const FeatureSpec& spec, const std::optional<UnitVector>& label_units) {
  const auto& sys = spec.system();
  Json j;
  j["base_units"] = sys.names();
  Json aliases = Json::object();
  for (const auto& [name, u] : sys.aliases()) aliases[name] = sys.format(u);
  j["aliases"] = aliases;
  Json feats = Json::array();
  for (const auto& f : spec.features()) {
    feats.push_back({{"name", f.name},
                     {"units", sys.format(f.units)},
                     {"degree_weight", f.degree_weight},
                     {"allow_negative_exponent", f.allow_negative_exponent}});
  }
  j["features"] = feats;
  if (label_units) j["label_units"] = sys.format(*label_units);
  return j;
}

Json monomial_to_json(const Monomial& m, const FeatureSpec& spec) {
  return {{"exps", m.exps},
          {"coeff", m.coeff},
          {"degree", degree(m, spec)},
          {"units", monomial_units(m, spec).exps()},
          {"expr", format_monomial(m, spec)}};
}

Monomial monomial_from_json(const Json& j, const FeatureSpec& spec) {
  Monomial m;
  m.exps = j.at("exps").get<std::vector<std::int32_t>>();
  m.coeff = j.value("coeff", 1.0);
  if (m.exps.size() != spec.size()) throw SpecError("monomial length does not match the feature count");
  return m;
}

Json monomials_to_json(const std::vector<Monomial>& ms, const FeatureSpec& spec) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(monomial_to_json(m, spec));
  return a;
}

Json model_to_json(const RegressionModel& model, const FeatureSpec& spec) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["monomials"] = monomials_to_json(model.monomials, spec);
  j["weights"] = model.weights;
  j["intercept"] = model.intercept;
  j["decoder"] = monomial_to_json(model.decoder, spec);
  j["label_units"] = spec.system().format(model.label_units);
  return j;
}

RegressionModel model_from_json(const Json& j, const FeatureSpec& spec) {
  RegressionModel m;
  for (const auto& mj : j.at("monomials")) m.monomials.push_back(monomial_from_json(mj, spec));
  m.weights = j.at("weights").get<std::vector<double>>();
  if (m.weights.size() != m.monomials.size()) throw SpecError("model weight count differs from monomial count");
  m.intercept = j.value("intercept", 0.0);
  m.decoder = monomial_from_json(j.at("decoder"), spec);
  m.label_units = spec.system().parse(j.at("label_units").get<std::string>());
  return m;
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSpec& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing name header");
  const auto names = split_csv_line(line);
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing units header");
  const auto units = split_csv_line(line);
  if (units.size() != names.size()) throw DataError(path.string() + ": header lines differ in length");

  const auto& sys = spec.system();
  std::vector<long> column_of(spec.size(), -1);
  long label_col = -1;
  UnitVector label_units;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const UnitVector u = sys.parse(units[c]);
    if (names[c] == "label") {
      label_col = static_cast<long>(c);
      label_units = u;
      continue;
    }
    const std::size_t i = spec.index_of(names[c]);
    if (u != spec[i].units) {
      throw UnitMismatch(sys.format(u) + " (column " + names[c] + ")", sys.format(spec[i].units));
    }
    column_of[i] = static_cast<long>(c);
  }
  if (label_col < 0) throw DataError(path.string() + ": no 'label' column");
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (column_of[i] < 0) throw DataError(path.string() + ": missing column for feature " + spec[i].name);
  }

  Dataset d{spec, {}, {}, label_units};
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != names.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(names.size()) +
                      " cells");
    }
    auto num = [&](std::size_t c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cells[c] + "'");
      }
    };
    std::vector<double> row(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) row[i] = num(static_cast<std::size_t>(column_of[i]));
    d.rows.push_back(std::move(row));
    d.labels.push_back(num(static_cast<std::size_t>(label_col)));
  }
  return d;
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& sys = data.spec.system();
  for (const auto& f : data.spec.features()) out << f.name << ',';
  out << "label\n";
  for (const auto& f : data.spec.features()) out << sys.format(f.units) << ',';
  out << sys.format(data.label_units) << '\n';
  for (std::size_t t = 0; t < data.size(); ++t) {
    for (double x : data.rows[t]) out << format_double(x) << ',';
    out << format_double(data.labels[t]) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace ueq
