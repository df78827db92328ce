#pragma once

// Base-unit systems, unit expressions, unit-typed quantities and the
// rescaling group (R_{>0})^k acting on them.

#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ueq {

/// Integer exponents over the k ordered base units of a system.
/// The zero vector means dimensionless. All arithmetic is overflow-checked.
class UnitVector {
public:
  UnitVector() = default;
  explicit UnitVector(std::size_t k) : exps_(k, 0) {}
  UnitVector(std::initializer_list<std::int32_t> e) : exps_(e) {}
  explicit UnitVector(std::vector<std::int32_t> e) : exps_(std::move(e)) {}

  std::size_t size() const noexcept { return exps_.size(); }
  std::int32_t operator[](std::size_t j) const { return exps_[j]; }
  std::int32_t& operator[](std::size_t j) { return exps_[j]; }
  const std::vector<std::int32_t>& exps() const noexcept { return exps_; }

  bool is_dimensionless() const noexcept;

  UnitVector& operator+=(const UnitVector& o);
  UnitVector& operator-=(const UnitVector& o);
  friend UnitVector operator+(UnitVector a, const UnitVector& b) { return a += b; }
  friend UnitVector operator-(UnitVector a, const UnitVector& b) { return a -= b; }
  UnitVector scaled(std::int64_t gamma) const;

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

private:
  std::vector<std::int32_t> exps_;
};

/// "[1,2,-2,0]", for error messages.
std::string to_string(const UnitVector& u);

/// Ordered base-unit names plus derived-unit aliases. Exponent vectors are
/// always relative to the order given at construction.
class BaseUnitSystem {
public:
  BaseUnitSystem() = default;
  explicit BaseUnitSystem(std::vector<std::string> names);

  /// Registers N, J, Pa, W, V, Hz for whichever of them the system's base
  /// units (kg, m, s, A) can express.
  static BaseUnitSystem with_si_aliases(std::vector<std::string> names);

  void add_alias(const std::string& name, UnitVector units);
  void add_alias(const std::string& name, std::string_view expr);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::map<std::string, UnitVector>& aliases() const noexcept { return aliases_; }

  UnitVector zero() const { return UnitVector(size()); }
  UnitVector base(std::string_view name) const;

  /// Parses `factor (SP factor)*`, `1` or the empty string, where
  /// factor := NAME ("^" INT)?. Throws UnknownUnit / MalformedExponent.
  UnitVector parse(std::string_view expr) const;

  /// Canonical base-unit form, e.g. "kg m^2 s^-2"; "1" when dimensionless.
  std::string format(const UnitVector& u) const;

  friend bool operator==(const BaseUnitSystem&, const BaseUnitSystem&) = default;

private:
  std::vector<std::string> names_;
  std::map<std::string, UnitVector> aliases_;
};

inline UnitVector parse_unit(std::string_view expr, const BaseUnitSystem& system) {
  return system.parse(expr);
}

/// A real value tagged with its units: an element (x, u) of X_u.
struct Quantity {
  double value = 0.0;
  UnitVector units;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

/// Same-units addition; UnitMismatch otherwise.
Quantity q_add(const Quantity& a, const Quantity& b);
Quantity q_sub(const Quantity& a, const Quantity& b);
Quantity q_mul(const Quantity& a, const Quantity& b);
/// Integer power; DivisionByZero for a zero base with negative exponent.
Quantity q_pow(const Quantity& a, std::int32_t gamma);
Quantity q_scale(double alpha, const Quantity& a);

inline Quantity operator+(const Quantity& a, const Quantity& b) { return q_add(a, b); }
inline Quantity operator-(const Quantity& a, const Quantity& b) { return q_sub(a, b); }
inline Quantity operator*(const Quantity& a, const Quantity& b) { return q_mul(a, b); }
inline Quantity operator*(double alpha, const Quantity& a) { return q_scale(alpha, a); }

/// x^n by repeated squaring; negative n inverts. Returns inf for 0^-n.
double ipow(double x, std::int64_t n);

/// Element (g_1..g_k) of the rescaling group; every component > 0.
class GroupElement {
public:
  explicit GroupElement(std::vector<double> g);
  static GroupElement identity(std::size_t k) { return GroupElement(std::vector<double>(k, 1.0)); }

  std::size_t size() const noexcept { return g_.size(); }
  const std::vector<double>& components() const noexcept { return g_; }

  /// prod_j g_j^{-u_j}: the factor a value with units u is multiplied by.
  double factor(const UnitVector& u) const;

  /// Componentwise product (the group law).
  GroupElement compose(const GroupElement& other) const;

private:
  std::vector<double> g_;
};

/// g.x: the numeric value changes, the physical quantity and its units do not.
Quantity rescale(const GroupElement& g, const Quantity& x);

/// Rescales each value by the factor for its own units.
std::vector<double> rescale_values(const GroupElement& g, std::span<const double> values,
                                   std::span<const UnitVector> units);

}  // namespace ueq
