#include "ueq/pi.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

struct ExponentRange {
  int lo = 0, hi = 0;
};

std::vector<ExponentRange> exponent_ranges(const FeatureSpec& spec, int max_degree) {
  if (max_degree < 0) throw Error("max_degree must be >= 0");
  std::vector<ExponentRange> r;
  r.reserve(spec.size());
  for (const auto& f : spec.features()) {
    const int hi = max_degree / f.degree_weight;
    r.push_back({f.allow_negative_exponent ? -hi : 0, hi});
  }
  return r;
}

// Odometer sweep over the per-feature ranges. Visits exponent vectors whose
// accumulated units equal `target` (or every vector when target is null).
template <typename Visit>
void sweep(const FeatureSpec& spec, const std::vector<ExponentRange>& ranges, const UnitVector* target,
           std::optional<int> max_total, Visit&& visit) {
  const std::size_t d = spec.size();
  const std::size_t k = spec.system().size();
  const auto units = spec.units();
  std::vector<std::int32_t> alpha(d);
  std::vector<std::int64_t> acc(k, 0);
  int total = 0;
  for (std::size_t i = 0; i < d; ++i) {
    alpha[i] = ranges[i].lo;
    total += std::abs(alpha[i]);
    for (std::size_t j = 0; j < k; ++j) acc[j] += std::int64_t{alpha[i]} * units[i][j];
  }
  for (;;) {
    bool keep = !max_total || total <= *max_total;
    if (keep && target) {
      for (std::size_t j = 0; j < k; ++j) {
        if (acc[j] != (*target)[j]) {
          keep = false;
          break;
        }
      }
    }
    if (keep) visit(alpha);

    // Advance: last feature varies fastest.
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (alpha[i] < ranges[i].hi) {
        total += std::abs(alpha[i] + 1) - std::abs(alpha[i]);
        ++alpha[i];
        for (std::size_t j = 0; j < k; ++j) acc[j] += units[i][j];
        break;
      }
      const int span = alpha[i] - ranges[i].lo;
      total += std::abs(ranges[i].lo) - std::abs(alpha[i]);
      alpha[i] = ranges[i].lo;
      for (std::size_t j = 0; j < k; ++j) acc[j] -= std::int64_t{span} * units[i][j];
      if (i == 0) return;
    }
    if (d == 0) return;
  }
}

}  // namespace

FeatureSpec::FeatureSpec(BaseUnitSystem system, std::vector<FeatureDescriptor> features)
    : system_(std::move(system)), features_(std::move(features)) {
  std::set<std::string> names;
  for (const auto& f : features_) {
    if (f.name.empty()) throw SpecError("feature with empty name");
    if (!names.insert(f.name).second) throw DuplicateName(f.name);
    if (f.units.size() != system_.size()) {
      throw SpecError("feature '" + f.name + "' has " + std::to_string(f.units.size()) +
                      " unit exponents, system has " + std::to_string(system_.size()));
    }
    if (f.degree_weight < 1) throw SpecError("feature '" + f.name + "' has degree weight < 1");
  }
}

FeatureSpec FeatureSpec::from_scalars(BaseUnitSystem system, const std::vector<ScalarFeature>& scalars) {
  std::vector<FeatureDescriptor> f;
  f.reserve(scalars.size());
  for (const auto& s : scalars) f.push_back({s.name, s.units, s.degree_weight, s.allow_negative_exponent});
  return FeatureSpec(std::move(system), std::move(f));
}

std::size_t FeatureSpec::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  throw SpecError("no feature named '" + std::string(name) + "'");
}

std::vector<UnitVector> FeatureSpec::units() const {
  std::vector<UnitVector> u;
  u.reserve(features_.size());
  for (const auto& f : features_) u.push_back(f.units);
  return u;
}

IntMatrix FeatureSpec::units_matrix() const {
  IntMatrix U(features_.size(), system_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    for (std::size_t j = 0; j < system_.size(); ++j) U(i, j) = features_[i].units[j];
  }
  return U;
}

bool Monomial::is_constant() const {
  for (auto e : exps) {
    if (e != 0) return false;
  }
  return true;
}

int degree(const Monomial& m, const FeatureSpec& spec) {
  int deg = 0;
  for (std::size_t i = 0; i < m.exps.size(); ++i) {
    deg = std::max(deg, spec[i].degree_weight * std::abs(m.exps[i]));
  }
  return deg;
}

int total_degree(const Monomial& m) {
  int t = 0;
  for (auto e : m.exps) t += std::abs(e);
  return t;
}

UnitVector monomial_units(const Monomial& m, const FeatureSpec& spec) {
  if (m.exps.size() != spec.size()) throw SpecError("monomial length does not match feature count");
  UnitVector u = spec.system().zero();
  for (std::size_t i = 0; i < m.exps.size(); ++i) {
    if (m.exps[i] != 0) u += spec[i].units.scaled(m.exps[i]);
  }
  return u;
}

std::string format_monomial(const Monomial& m, const FeatureSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < m.exps.size(); ++i) {
    if (m.exps[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += spec[i].name;
    if (m.exps[i] != 1) out += '^' + std::to_string(m.exps[i]);
  }
  return out.empty() ? "1" : out;
}

Monomial parse_monomial(std::string_view expr, const FeatureSpec& spec) {
  Monomial m = Monomial::constant(spec.size());
  std::istringstream in{std::string(expr)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty() || (tokens.size() == 1 && tokens[0] == "1")) return m;
  for (const auto& tok : tokens) {
    std::string name = tok;
    long power = 1;
    if (auto caret = tok.find('^'); caret != std::string::npos) {
      name = tok.substr(0, caret);
      const std::string digits = tok.substr(caret + 1);
      char* end = nullptr;
      power = std::strtol(digits.c_str(), &end, 10);
      if (digits.empty() || *end != '\0' || digits[0] == '+') throw MalformedExponent(tok);
    }
    m.exps[spec.index_of(name)] += static_cast<std::int32_t>(power);
  }
  return m;
}

std::vector<Monomial> dimensionless_basis(const FeatureSpec& spec) {
  std::vector<Monomial> out;
  if (spec.size() == 0) return out;
  for (const auto& v : nullspace_basis(spec.units_matrix())) {
    Monomial m;
    m.exps.reserve(v.size());
    for (auto e : v) m.exps.push_back(static_cast<std::int32_t>(e));
    out.push_back(std::move(m));
  }
  return out;
}

double enumeration_candidates(const FeatureSpec& spec, int max_degree) {
  double n = 1.0;
  for (const auto& r : exponent_ranges(spec, max_degree)) n *= static_cast<double>(r.hi - r.lo + 1);
  return n;
}

std::vector<Monomial> enumerate_monomials(const FeatureSpec& spec, const EnumerationOptions& opts) {
  const auto ranges = exponent_ranges(spec, opts.max_degree);
  const double candidates = enumeration_candidates(spec, opts.max_degree);
  if (candidates > opts.cap) throw EnumerationTooLarge(candidates, opts.cap);
  std::vector<Monomial> out;
  const UnitVector zero = spec.system().zero();
  sweep(spec, ranges, opts.dimensionless_only ? &zero : nullptr, opts.max_total_degree,
        [&](const std::vector<std::int32_t>& alpha) { out.push_back({alpha, 1.0}); });
  return out;
}

std::vector<Monomial> enumerate_monomials(const FeatureSpec& spec, int max_degree, bool dimensionless_only) {
  EnumerationOptions opts;
  opts.max_degree = max_degree;
  opts.dimensionless_only = dimensionless_only;
  return enumerate_monomials(spec, opts);
}

double evaluate_monomial(const Monomial& m, std::span<const double> x) {
  if (x.size() != m.exps.size()) throw DataError("monomial evaluated on a row of the wrong length");
  double r = m.coeff;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto e = m.exps[i];
    if (e == 0) continue;
    if (e < 0 && x[i] == 0.0) throw PoleAtZero(i);
    r *= ipow(x[i], e);
  }
  if (!std::isfinite(r)) throw NonFinite();
  return r;
}

std::optional<Monomial> reynolds_project(const Monomial& m, const FeatureSpec& spec) {
  if (monomial_units(m, spec).is_dimensionless()) return m;
  return std::nullopt;
}

std::vector<Monomial> decoder_solutions(const FeatureSpec& spec, const UnitVector& target, int max_degree,
                                        double cap) {
  if (target.size() != spec.system().size()) throw UnitMismatch(to_string(target), "spec units");
  IntVector b(target.exps().begin(), target.exps().end());
  if (!solve_diophantine(spec.units_matrix(), b)) return {};
  const auto ranges = exponent_ranges(spec, max_degree);
  const double candidates = enumeration_candidates(spec, max_degree);
  if (candidates > cap) throw EnumerationTooLarge(candidates, cap);
  std::vector<Monomial> out;
  sweep(spec, ranges, &target, std::nullopt,
        [&](const std::vector<std::int32_t>& alpha) { out.push_back({alpha, 1.0}); });
  return out;
}

Quantity apply_decoder(const Monomial& decoder, const FeatureSpec& spec, std::span<const double> x,
                       double eta) {
  return {eta * evaluate_monomial(decoder, x), monomial_units(decoder, spec)};
}

}  // namespace ueq
