#include "ueq/geometry.hpp"

#include <cmath>

#include "ueq/errors.hpp"

namespace ueq {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

std::string norm_name(const std::string& v) { return v + "_norm"; }

std::string dot_name(const std::string& a, const std::string& b) { return a + "_dot_" + b; }

std::vector<ScalarFeature> scalarize(const std::vector<NamedQuantity>& scalars,
                                     const std::vector<VectorFeature>& vectors,
                                     const ScalarizeRules& rules) {
  std::vector<ScalarFeature> out;
  std::set<std::string> names;
  auto push = [&](ScalarFeature f) {
    if (!names.insert(f.name).second) throw DuplicateName(f.name);
    out.push_back(std::move(f));
  };
  // Input names must be unique too, even when a family is switched off.
  {
    std::set<std::string> inputs;
    for (const auto& s : scalars) {
      if (!inputs.insert(s.name).second) throw DuplicateName(s.name);
    }
    for (const auto& v : vectors) {
      if (!inputs.insert(v.name).second) throw DuplicateName(v.name);
    }
  }

  if (rules.include_scalars) {
    for (const auto& s : scalars) push({s.name, s.quantity.value, s.quantity.units, 1, true});
  }
  if (rules.include_norms) {
    for (const auto& v : vectors) push({norm_name(v.name), norm(v.components), v.units, 1, true});
  }
  if (rules.include_dots) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      for (std::size_t j = i + 1; j < vectors.size(); ++j) {
        const auto& a = vectors[i];
        const auto& b = vectors[j];
        const bool negative =
            rules.dots_allow_negative || rules.negative_dots.contains({a.name, b.name});
        push({dot_name(a.name, b.name), dot(a.components, b.components), a.units + b.units, 2,
              negative});
      }
    }
  }
  return out;
}

Vec3 rotate(const std::array<double, 9>& r, const Vec3& v) {
  return {r[0] * v[0] + r[1] * v[1] + r[2] * v[2], r[3] * v[0] + r[4] * v[1] + r[5] * v[2],
          r[6] * v[0] + r[7] * v[1] + r[8] * v[2]};
}

}  // namespace ueq
