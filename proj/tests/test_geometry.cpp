#include <gtest/gtest.h>

#include <cmath>

#include "ueq/errors.hpp"
#include "ueq/geometry.hpp"
#include "ueq/rng.hpp"
#include "ueq/units.hpp"

using namespace ueq;

namespace {

const BaseUnitSystem kSys = BaseUnitSystem::with_si_aliases({"kg", "m", "s"});

Vec3 random_vec(Rng& rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

// Rodrigues rotation about a unit axis.
std::array<double, 9> rotation(Vec3 axis, double angle) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  const double x = axis[0] / n, y = axis[1] / n, z = axis[2] / n;
  const double c = std::cos(angle), s = std::sin(angle), t = 1 - c;
  return {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
          t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
          t * x * z - s * y, t * y * z + s * x, t * z * z + c};
}

struct PendulumInputs {
  std::vector<NamedQuantity> scalars;
  std::vector<VectorFeature> vectors;
};

PendulumInputs pendulum_inputs(Rng& rng) {
  PendulumInputs in;
  in.scalars = {{"m", {rng.uniform(1, 2), kSys.parse("kg")}},
                {"k_s", {rng.uniform(1, 2), kSys.parse("kg s^-2")}},
                {"L", {rng.uniform(1, 2), kSys.parse("m")}}};
  in.vectors = {{"g", random_vec(rng), kSys.parse("m s^-2")},
                {"p", random_vec(rng), kSys.parse("kg m s^-1")},
                {"q", random_vec(rng), kSys.parse("m")}};
  return in;
}

}  // namespace

TEST(Scalarize, PendulumOrderNamesAndUnits) {
  Rng rng(1);
  const auto in = pendulum_inputs(rng);
  const auto f = scalarize(in.scalars, in.vectors);
  ASSERT_EQ(f.size(), 9u);
  const std::vector<std::string> names{"m", "k_s", "L", "g_norm", "p_norm", "q_norm", "g_dot_p", "g_dot_q", "p_dot_q"};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(f[i].name, names[i]);
  EXPECT_EQ(f[3].units, in.vectors[0].units);
  EXPECT_EQ(f[6].units, in.vectors[0].units + in.vectors[1].units);
  EXPECT_EQ(f[8].units, kSys.parse("kg m^2 s^-1"));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(f[i].degree_weight, 1);
    EXPECT_TRUE(f[i].allow_negative_exponent);
  }
  for (std::size_t i = 6; i < 9; ++i) {
    EXPECT_EQ(f[i].degree_weight, 2);
    EXPECT_FALSE(f[i].allow_negative_exponent);
  }
  const auto& q = in.vectors[2].components;
  EXPECT_DOUBLE_EQ(f[5].value, std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]));
}

TEST(Scalarize, ScalarsOnlyAndSingleVector) {
  const auto two = scalarize({{"a", {1.0, kSys.parse("m")}}, {"b", {2.0, kSys.parse("s")}}}, {});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].name, "b");
  EXPECT_EQ(two[1].degree_weight, 1);

  const auto one = scalarize({}, {{"v", {3.0, 4.0, 0.0}, kSys.parse("m s^-1")}});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].name, "v_norm");
  EXPECT_DOUBLE_EQ(one[0].value, 5.0);
  EXPECT_EQ(one[0].units, kSys.parse("m s^-1"));
}

TEST(Scalarize, RulesControlDotSigns) {
  Rng rng(2);
  const auto in = pendulum_inputs(rng);
  ScalarizeRules rules;
  rules.negative_dots = {{"g", "q"}};
  const auto f = scalarize(in.scalars, in.vectors, rules);
  EXPECT_FALSE(f[6].allow_negative_exponent);
  EXPECT_TRUE(f[7].allow_negative_exponent);
  rules.dots_allow_negative = true;
  EXPECT_TRUE(scalarize(in.scalars, in.vectors, rules)[8].allow_negative_exponent);
  rules = {};
  rules.include_dots = false;
  rules.include_norms = false;
  EXPECT_EQ(scalarize(in.scalars, in.vectors, rules).size(), 3u);
}

TEST(Scalarize, DuplicateNamesAreRejected) {
  EXPECT_THROW(scalarize({{"x", {1.0, kSys.zero()}}, {"x", {2.0, kSys.zero()}}}, {}), DuplicateName);
  // A scalar named like a derived norm collides too.
  EXPECT_THROW(scalarize({{"v_norm", {1.0, kSys.zero()}}}, {{"v", {1.0, 0.0, 0.0}, kSys.zero()}}), DuplicateName);
}

TEST(Scalarize, RotationInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto in = pendulum_inputs(rng);
    const auto before = scalarize(in.scalars, in.vectors);
    const auto R = rotation(random_vec(rng), rng.uniform(0, 6.283185307179586));
    for (auto& v : in.vectors) v.components = rotate(R, v.components);
    const auto after = scalarize(in.scalars, in.vectors);
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_NEAR(after[i].value, before[i].value, 1e-12 * std::max(1.0, std::abs(before[i].value)));
    }
  }
}

TEST(Scalarize, RescaleEquivariance) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto in = pendulum_inputs(rng);
    const auto before = scalarize(in.scalars, in.vectors);
    const GroupElement g({rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10)});
    for (auto& s : in.scalars) s.quantity = rescale(g, s.quantity);
    for (auto& v : in.vectors) {
      for (auto& c : v.components) c *= g.factor(v.units);
    }
    const auto after = scalarize(in.scalars, in.vectors);
    for (std::size_t i = 0; i < before.size(); ++i) {
      const double expected = g.factor(before[i].units) * before[i].value;
      EXPECT_NEAR(after[i].value, expected, 1e-12 * std::abs(expected));
    }
  }
}
