#pragma once

// Coordinate-free scalarization of scalar and 3-vector inputs into the
// norms and pairwise inner products a rotation-invariant model may use.

#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ueq/units.hpp"

namespace ueq {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

struct NamedQuantity {
  std::string name;
  Quantity quantity;
};

/// A physics 3-vector; all components share one unit vector.
struct VectorFeature {
  std::string name;
  Vec3 components{};
  UnitVector units;
};

struct ScalarFeature {
  std::string name;
  double value = 0.0;
  UnitVector units;
  int degree_weight = 1;
  bool allow_negative_exponent = true;
};

struct ScalarizeRules {
  bool include_scalars = true;
  bool include_norms = true;
  bool include_dots = true;
  /// Applies to every dot product not listed in `negative_dots`.
  bool dots_allow_negative = false;
  /// Dot products (by vector-name pair, in input order) that may take
  /// negative exponents regardless of `dots_allow_negative`.
  std::set<std::pair<std::string, std::string>> negative_dots;
};

/// Norm feature name for vector `v`, e.g. "p_norm".
std::string norm_name(const std::string& v);
/// Dot feature name for vectors a, b, e.g. "g_dot_p".
std::string dot_name(const std::string& a, const std::string& b);

/// Raw scalars (input order), then |v| per vector, then a.b for every
/// distinct unordered pair in lexicographic index order. Norms and raw
/// scalars have weight 1, dot products weight 2. Throws DuplicateName.
std::vector<ScalarFeature> scalarize(const std::vector<NamedQuantity>& scalars,
                                     const std::vector<VectorFeature>& vectors,
                                     const ScalarizeRules& rules = {});

/// Applies a proper rotation matrix (row-major) to a vector.
Vec3 rotate(const std::array<double, 9>& rotation, const Vec3& v);

}  // namespace ueq
