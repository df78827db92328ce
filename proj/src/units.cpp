#include "ueq/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

std::int32_t checked_narrow(std::int64_t v, const char* where) {
  if (v < std::numeric_limits<std::int32_t>::min() ||
      v > std::numeric_limits<std::int32_t>::max()) {
    throw IntegerOverflow(where);
  }
  return static_cast<std::int32_t>(v);
}

void require_same_size(const UnitVector& a, const UnitVector& b) {
  if (a.size() != b.size()) throw UnitMismatch(to_string(a), to_string(b));
}

bool valid_name(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

bool UnitVector::is_dimensionless() const noexcept {
  for (auto e : exps_) {
    if (e != 0) return false;
  }
  return true;
}

UnitVector& UnitVector::operator+=(const UnitVector& o) {
  require_same_size(*this, o);
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    exps_[j] = checked_narrow(std::int64_t{exps_[j]} + o.exps_[j], "unit exponent sum");
  }
  return *this;
}

UnitVector& UnitVector::operator-=(const UnitVector& o) {
  require_same_size(*this, o);
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    exps_[j] = checked_narrow(std::int64_t{exps_[j]} - o.exps_[j], "unit exponent difference");
  }
  return *this;
}

UnitVector UnitVector::scaled(std::int64_t gamma) const {
  UnitVector out(size());
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    std::int64_t p = 0;
    if (__builtin_mul_overflow(std::int64_t{exps_[j]}, gamma, &p)) {
      throw IntegerOverflow("unit exponent scaling");
    }
    out.exps_[j] = checked_narrow(p, "unit exponent scaling");
  }
  return out;
}

std::string to_string(const UnitVector& u) {
  std::string s = "[";
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(u[j]);
  }
  return s + "]";
}

BaseUnitSystem::BaseUnitSystem(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!valid_name(n)) throw SpecError("invalid base unit name '" + n + "'");
    if (!seen.insert(n).second) throw DuplicateName(n);
  }
}

BaseUnitSystem BaseUnitSystem::with_si_aliases(std::vector<std::string> names) {
  BaseUnitSystem sys(std::move(names));
  // (alias, kg, m, s, A)
  struct Si {
    const char* name;
    int kg, m, s, A;
  };
  static constexpr Si table[] = {
      {"N", 1, 1, -2, 0},  {"J", 1, 2, -2, 0}, {"Pa", 1, -1, -2, 0},
      {"W", 1, 2, -3, 0},  {"V", 1, 2, -3, -1}, {"Hz", 0, 0, -1, 0},
  };
  auto idx = [&](const char* base) -> long {
    for (std::size_t j = 0; j < sys.names_.size(); ++j) {
      if (sys.names_[j] == base) return static_cast<long>(j);
    }
    return -1;
  };
  const long ikg = idx("kg"), im = idx("m"), is = idx("s"), iA = idx("A");
  for (const auto& e : table) {
    const std::pair<long, int> parts[] = {{ikg, e.kg}, {im, e.m}, {is, e.s}, {iA, e.A}};
    UnitVector u(sys.size());
    bool expressible = true;
    for (auto [j, p] : parts) {
      if (p == 0) continue;
      if (j < 0) {
        expressible = false;
        break;
      }
      u[static_cast<std::size_t>(j)] = p;
    }
    if (expressible && !sys.aliases_.contains(e.name) && idx(e.name) < 0) {
      sys.aliases_.emplace(e.name, u);
    }
  }
  return sys;
}

void BaseUnitSystem::add_alias(const std::string& name, UnitVector units) {
  if (!valid_name(name)) throw SpecError("invalid alias name '" + name + "'");
  if (units.size() != size()) {
    throw SpecError("alias '" + name + "' has " + std::to_string(units.size()) +
                    " exponents, system has " + std::to_string(size()));
  }
  for (const auto& n : names_) {
    if (n == name) throw DuplicateName(name);
  }
  aliases_[name] = std::move(units);
}

void BaseUnitSystem::add_alias(const std::string& name, std::string_view expr) {
  add_alias(name, parse(expr));
}

UnitVector BaseUnitSystem::base(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) {
      UnitVector u(size());
      u[j] = 1;
      return u;
    }
  }
  if (auto it = aliases_.find(std::string(name)); it != aliases_.end()) return it->second;
  throw UnknownUnit(std::string(name));
}

UnitVector BaseUnitSystem::parse(std::string_view expr) const {
  UnitVector total = zero();
  std::istringstream in{std::string(expr)};
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  if (tokens.empty() || (tokens.size() == 1 && tokens[0] == "1")) return total;

  for (const auto& tok : tokens) {
    std::string_view name = tok;
    std::int64_t power = 1;
    if (auto caret = tok.find('^'); caret != std::string::npos) {
      name = std::string_view(tok).substr(0, caret);
      std::string_view digits = std::string_view(tok).substr(caret + 1);
      const char* first = digits.data();
      const char* last = digits.data() + digits.size();
      // from_chars accepts a leading '-' but not '+', matching INT = -?[0-9]+.
      auto [ptr, ec] = std::from_chars(first, last, power);
      if (digits.empty() || ec != std::errc{} || ptr != last) throw MalformedExponent(tok);
    }
    if (!valid_name(name)) throw UnknownUnit(std::string(name));
    total += base(name).scaled(power);
  }
  return total;
}

std::string BaseUnitSystem::format(const UnitVector& u) const {
  if (u.size() != size()) throw UnitMismatch(to_string(u), to_string(zero()));
  std::string out;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] == 0) continue;
    if (!out.empty()) out += ' ';
    out += names_[j];
    if (u[j] != 1) out += '^' + std::to_string(u[j]);
  }
  return out.empty() ? "1" : out;
}

Quantity q_add(const Quantity& a, const Quantity& b) {
  if (a.units != b.units) throw UnitMismatch(to_string(a.units), to_string(b.units));
  return {a.value + b.value, a.units};
}

Quantity q_sub(const Quantity& a, const Quantity& b) {
  if (a.units != b.units) throw UnitMismatch(to_string(a.units), to_string(b.units));
  return {a.value - b.value, a.units};
}

Quantity q_mul(const Quantity& a, const Quantity& b) { return {a.value * b.value, a.units + b.units}; }

Quantity q_pow(const Quantity& a, std::int32_t gamma) {
  if (gamma < 0 && a.value == 0.0) throw DivisionByZero();
  return {ipow(a.value, gamma), a.units.scaled(gamma)};
}

Quantity q_scale(double alpha, const Quantity& a) { return {alpha * a.value, a.units}; }

double ipow(double x, std::int64_t n) {
  const bool invert = n < 0;
  // Unsigned magnitude so that INT64_MIN does not overflow on negation.
  std::uint64_t e = invert ? ~static_cast<std::uint64_t>(n) + 1 : static_cast<std::uint64_t>(n);
  double result = 1.0;
  double base = x;
  while (e) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e) base *= base;
  }
  return invert ? 1.0 / result : result;
}

GroupElement::GroupElement(std::vector<double> g) : g_(std::move(g)) {
  for (double v : g_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error("group element components must be finite and > 0");
    }
  }
}

double GroupElement::factor(const UnitVector& u) const {
  if (u.size() != g_.size()) {
    throw UnitMismatch(to_string(u), "group of size " + std::to_string(g_.size()));
  }
  double f = 1.0;
  for (std::size_t j = 0; j < g_.size(); ++j) {
    if (u[j] != 0) f *= ipow(g_[j], -std::int64_t{u[j]});
  }
  return f;
}

GroupElement GroupElement::compose(const GroupElement& other) const {
  if (other.size() != size()) throw Error("group elements of different rank");
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = g_[j] * other.g_[j];
  return GroupElement(std::move(out));
}

Quantity rescale(const GroupElement& g, const Quantity& x) { return {g.factor(x.units) * x.value, x.units}; }

std::vector<double> rescale_values(const GroupElement& g, std::span<const double> values,
                                   std::span<const UnitVector> units) {
  if (values.size() != units.size()) throw Error("rescale_values: length mismatch");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = g.factor(units[i]) * values[i];
  return out;
}

}  // namespace ueq
