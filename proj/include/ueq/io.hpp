#pragma once

// File formats: JSON feature specs, JSON monomials and models, and CSV
// datasets with a two-line (names, units) header.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ueq/pi.hpp"
#include "ueq/regress.hpp"

namespace ueq {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct SpecFile {
  FeatureSpec spec;
  std::optional<UnitVector> label_units;
};

/// {"base_units":[...], "aliases":{...}, "features":[{"name","units",
/// "degree_weight","allow_negative_exponent"}], "label_units":"..."}.
/// SI aliases are registered first; file aliases extend or override them.
/// Throws SpecError (or another UnitsError) on malformed input.
SpecFile spec_from_json(const Json& j);
SpecFile load_spec(const std::filesystem::path& path);
Json spec_to_json(const FeatureSpec& spec, const std::optional<UnitVector>& label_units = std::nullopt);

/// {"exps":[...],"coeff":x,"degree":n,"units":[...]}, plus "expr" for people.
Json monomial_to_json(const Monomial& m, const FeatureSpec& spec);
Monomial monomial_from_json(const Json& j, const FeatureSpec& spec);
Json monomials_to_json(const std::vector<Monomial>& ms, const FeatureSpec& spec);

Json model_to_json(const RegressionModel& model, const FeatureSpec& spec);
RegressionModel model_from_json(const Json& j, const FeatureSpec& spec);

/// Line 1: feature names then "label"; line 2: unit expressions. Columns
/// are matched to the feature spec by name and units are checked. Throws DataError
/// on malformed rows, UnitMismatch on unit disagreements.
Dataset load_csv(const std::filesystem::path& path, const FeatureSpec& spec);
void save_csv(const std::filesystem::path& path, const Dataset& data);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace ueq
