#pragma once

// Dimensionless featurizer and dimensional decoder over rational (Laurent)
// monomials of a feature list.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ueq/geometry.hpp"
#include "ueq/intlinalg.hpp"
#include "ueq/units.hpp"

namespace ueq {

struct FeatureDescriptor {
  std::string name;
  UnitVector units;
  int degree_weight = 1;
  bool allow_negative_exponent = true;
};

/// Ordered features over one base-unit system. Rows of the units matrix
/// are the feature unit vectors.
class FeatureSpec {
public:
  FeatureSpec() = default;
  FeatureSpec(BaseUnitSystem system, std::vector<FeatureDescriptor> features);
  static FeatureSpec from_scalars(BaseUnitSystem system, const std::vector<ScalarFeature>& scalars);

  const BaseUnitSystem& system() const noexcept { return system_; }
  const std::vector<FeatureDescriptor>& features() const noexcept { return features_; }
  const FeatureDescriptor& operator[](std::size_t i) const { return features_[i]; }
  std::size_t size() const noexcept { return features_.size(); }

  std::size_t index_of(std::string_view name) const;
  std::vector<UnitVector> units() const;
  IntMatrix units_matrix() const;

private:
  BaseUnitSystem system_;
  std::vector<FeatureDescriptor> features_;
};

/// coeff * prod_i x_i^{exps_i}.
struct Monomial {
  std::vector<std::int32_t> exps;
  double coeff = 1.0;

  static Monomial constant(std::size_t d) { return {std::vector<std::int32_t>(d, 0), 1.0}; }
  bool is_constant() const;

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// max_i weight_i |alpha_i|.
int degree(const Monomial& m, const FeatureSpec& spec);
/// sum_i |alpha_i|.
int total_degree(const Monomial& m);
UnitVector monomial_units(const Monomial& m, const FeatureSpec& spec);

/// Human-readable form such as "m k_s L^2 p_norm^-2", "1" for the constant.
std::string format_monomial(const Monomial& m, const FeatureSpec& spec);
/// Inverse of format_monomial; tokens are feature names. Throws SpecError.
Monomial parse_monomial(std::string_view expr, const FeatureSpec& spec);

/// Lattice basis of the dimensionless exponent vectors: d - rank(U) monomials.
std::vector<Monomial> dimensionless_basis(const FeatureSpec& spec);

struct EnumerationOptions {
  int max_degree = 2;
  bool dimensionless_only = false;
  /// Optional extra budget on sum |alpha_i|.
  std::optional<int> max_total_degree;
  double cap = 1e8;
};

/// Every exponent vector with degree <= max_degree that honors each
/// feature's sign flag, in lexicographic order (first feature most
/// significant, exponents ascending). Throws EnumerationTooLarge.
std::vector<Monomial> enumerate_monomials(const FeatureSpec& spec, const EnumerationOptions& opts);
std::vector<Monomial> enumerate_monomials(const FeatureSpec& spec, int max_degree, bool dimensionless_only);

/// Number of sweep candidates enumerate_monomials would visit.
double enumeration_candidates(const FeatureSpec& spec, int max_degree);

/// Throws PoleAtZero(i) for a zero value under a negative exponent and
/// NonFinite for overflow/NaN.
double evaluate_monomial(const Monomial& m, std::span<const double> x);

/// Identity on dimensionless monomials, nullopt (the zero element) otherwise.
std::optional<Monomial> reynolds_project(const Monomial& m, const FeatureSpec& spec);

/// All monomials with the target units and degree <= max_degree, in
/// enumeration order; empty when alpha^T U = v has no integer solution.
std::vector<Monomial> decoder_solutions(const FeatureSpec& spec, const UnitVector& target,
                                        int max_degree, double cap = 1e8);

/// eta * decoder(x), tagged with the decoder's units.
Quantity apply_decoder(const Monomial& decoder, const FeatureSpec& spec, std::span<const double> x,
                       double eta);

}  // namespace ueq
