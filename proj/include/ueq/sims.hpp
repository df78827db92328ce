#pragma once

// Data generators and fixtures for the worked experiments: the springy
// pendulum, the Rietkerk vegetation model, black-body radiation and the
// springy double pendulum.

#include <cstdint>
#include <string>
#include <vector>

#include "ueq/geometry.hpp"
#include "ueq/pi.hpp"
#include "ueq/regress.hpp"
#include "ueq/rng.hpp"

namespace ueq {

// ---------------------------------------------------------------- pendulum

/// (kg, m, s) with the SI aliases.
BaseUnitSystem mechanics_system();

struct PendulumSample {
  double m = 1, k_s = 1, L = 1;
  Vec3 g{}, p{}, q{};
  double H = 0;
};

/// |p|^2 / (2m) + k_s (|q| - L)^2 / 2 - m g.q. Throws NonPositiveMass.
double hamiltonian(double m, double k_s, double L, const Vec3& g, const Vec3& p, const Vec3& q);

struct SamplerConfig {
  double m_lo = 1.0, m_hi = 2.0;
  double k_s_lo = 1.0, k_s_hi = 2.0;
  double L_lo = 1.0, L_hi = 2.0;
  double mag_lo = 0.5, mag_hi = 1.5;  // |g|, |p|, |q|
};

std::vector<PendulumSample> sample_pendulum(std::size_t n, std::uint64_t seed, const SamplerConfig& cfg = {});

std::vector<NamedQuantity> pendulum_scalars(const PendulumSample& s);
std::vector<VectorFeature> pendulum_vectors(const PendulumSample& s);
/// Dots are non-negative-power except g.q, which may appear inverted.
ScalarizeRules pendulum_rules();
/// m, k_s, L, g_norm, p_norm, q_norm, g_dot_p, g_dot_q, p_dot_q.
FeatureSpec pendulum_spec();
UnitVector energy_units(const BaseUnitSystem& mechanics);

Dataset pendulum_dataset(const std::vector<PendulumSample>& samples);
Dataset sample_pendulum_dataset(std::size_t n, std::uint64_t seed, const SamplerConfig& cfg = {});

/// "k_s L^2".
Monomial pendulum_decoder(const FeatureSpec& spec);

struct WeightedMonomial {
  Monomial monomial;
  double weight;
};
/// H / (k_s L^2) expanded into its five monomials and coefficients.
std::vector<WeightedMonomial> pendulum_hamiltonian_terms(const FeatureSpec& spec);

// ---------------------------------------------------------------- Rietkerk

/// (l, g, d, m): litres, grams, days, metres kept as four base units.
BaseUnitSystem rietkerk_system();

struct RietkerkParams {
  double R = 0.375, alpha = 0.2, k_2 = 5, W_0 = 0.1, D_u = 100, g_m = 0.05, k_1 = 5, delta_w = 0.2,
         D_w = 0.1, c = 20, delta_v = 0.25, D_v = 0.1;
  // Integration parameters.
  double T = 200, delta_t = 0.005, L = 200, delta_l = 2;

  static constexpr std::size_t kCount = 16;
  static const std::vector<std::string>& names();
  static const std::vector<std::string>& unit_expressions();
  std::vector<double> values() const;
  /// Replaces the 12 model parameters by Unif(0.5x, 1.5x) draws.
  RietkerkParams perturbed(Rng& rng) const;
};

FeatureSpec rietkerk_spec();
UnitVector vegetation_units(const BaseUnitSystem& sys);

/// The twelve dimensionless features listed alongside the parameter table.
std::vector<Monomial> rietkerk_reference_basis(const FeatureSpec& spec);

struct RietkerkState {
  std::size_t n = 0;  // grid is n x n
  double delta_l = 2;
  double t = 0;
  std::vector<double> u, w, v;  // row-major
};

struct RietkerkInit {
  double water_max = 5.0;       // u0, w0 ~ Unif(0, water_max)
  double vegetation_max = 50.0; // v0 ~ Unif(0, vegetation_max) on seeded cells
  double seed_fraction = 0.1;
};

RietkerkState random_initial_state(std::size_t n, double delta_l, std::uint64_t seed, const RietkerkInit& cfg = {});

struct IntegrateOptions {
  double extinction_threshold = 1e-3;  // g m^-2, mean vegetation
  double negativity_tolerance = 1e-9;
  bool stop_on_extinction = true;
};

struct RietkerkRun {
  RietkerkState state;
  long steps = 0;
  bool extinct = false;
  long extinction_step = -1;
};

/// Explicit Euler with a periodic 5-point Laplacian for round(T / delta_t)
/// steps. Throws NumericalBlowup on non-finite or strongly negative fields.
RietkerkRun integrate_rietkerk(const RietkerkParams& params, const RietkerkState& init,
                               const IntegrateOptions& opts = {});

/// One explicit Euler step in place.
void rietkerk_step(const RietkerkParams& params, RietkerkState& s);

Quantity mean_vegetation(const RietkerkState& state);

struct GridScale {
  std::size_t cells = 100;
  double T = 200;
  double delta_l = 2;

  static GridScale desk() { return {50, 50, 2}; }
  static GridScale paper() { return {100, 200, 2}; }
};

struct RietkerkExperiment {
  Dataset train, test;
  std::size_t attempted = 0;
  std::size_t extinct = 0;
};

/// Samples parameter rows, integrates each from a random start and keeps
/// surviving runs in run-index order: first n_train, then n_test.
RietkerkExperiment rietkerk_experiment(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                                       const GridScale& scale, unsigned threads = 1,
                                       const RietkerkInit& init = {});

// ---------------------------------------------------------------- Planck

/// (kg, m, s, K).
BaseUnitSystem thermal_system();
/// lambda, T, c, k_B.
FeatureSpec planck_spec();
UnitVector intensity_units(const BaseUnitSystem& thermal);
/// Planck's law in SI units, for generating labels.
double planck_intensity(double lambda, double temperature);

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPlanck = 6.62607015e-34;

// ------------------------------------------------------- double pendulum

struct UnitFixture {
  std::string label;
  Monomial monomial;
  /// Stands in for a square-root feature by its square.
  bool squared = false;
};

struct DoublePendulumFixtures {
  FeatureSpec spec;
  std::vector<UnitFixture> dimensionless;
  std::vector<UnitFixture> energy;
};

/// Throws SpecError if any fixture's units disagree with its family.
DoublePendulumFixtures double_pendulum_feature_fixtures();

}  // namespace ueq
