#include "ueq/sims.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ueq/errors.hpp"
#include "ueq/rng.hpp"

namespace ueq {

// ---------------------------------------------------------------- pendulum

BaseUnitSystem mechanics_system() { return BaseUnitSystem::with_si_aliases({"kg", "m", "s"}); }

UnitVector energy_units(const BaseUnitSystem& mechanics) { return mechanics.parse("kg m^2 s^-2"); }

double hamiltonian(double m, double k_s, double L, const Vec3& g, const Vec3& p, const Vec3& q) {
  if (!(m > 0.0)) throw NonPositiveMass();
  const double stretch = norm(q) - L;
  return 0.5 * dot(p, p) / m + 0.5 * k_s * stretch * stretch - m * dot(g, q);
}

namespace {

Vec3 isotropic(Rng& rng, double magnitude) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return {magnitude * v[0] / n, magnitude * v[1] / n, magnitude * v[2] / n};
  }
}

}  // namespace

std::vector<PendulumSample> sample_pendulum(std::size_t n, std::uint64_t seed, const SamplerConfig& cfg) {
  Rng rng(seed);
  std::vector<PendulumSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PendulumSample s;
    s.m = rng.uniform(cfg.m_lo, cfg.m_hi);
    s.k_s = rng.uniform(cfg.k_s_lo, cfg.k_s_hi);
    s.L = rng.uniform(cfg.L_lo, cfg.L_hi);
    s.g = isotropic(rng, rng.uniform(cfg.mag_lo, cfg.mag_hi));
    s.p = isotropic(rng, rng.uniform(cfg.mag_lo, cfg.mag_hi));
    s.q = isotropic(rng, rng.uniform(cfg.mag_lo, cfg.mag_hi));
    s.H = hamiltonian(s.m, s.k_s, s.L, s.g, s.p, s.q);
    out.push_back(s);
  }
  return out;
}

std::vector<NamedQuantity> pendulum_scalars(const PendulumSample& s) {
  const auto sys = mechanics_system();
  return {{"m", {s.m, sys.parse("kg")}},
          {"k_s", {s.k_s, sys.parse("kg s^-2")}},
          {"L", {s.L, sys.parse("m")}}};
}

std::vector<VectorFeature> pendulum_vectors(const PendulumSample& s) {
  const auto sys = mechanics_system();
  return {{"g", s.g, sys.parse("m s^-2")}, {"p", s.p, sys.parse("kg m s^-1")}, {"q", s.q, sys.parse("m")}};
}

ScalarizeRules pendulum_rules() {
  ScalarizeRules r;
  r.negative_dots = {{"g", "q"}};
  return r;
}

FeatureSpec pendulum_spec() {
  const PendulumSample unit{};
  return FeatureSpec::from_scalars(mechanics_system(),
                                   scalarize(pendulum_scalars(unit), pendulum_vectors(unit), pendulum_rules()));
}

Dataset pendulum_dataset(const std::vector<PendulumSample>& samples) {
  Dataset d;
  d.spec = pendulum_spec();
  d.label_units = energy_units(d.spec.system());
  d.rows.reserve(samples.size());
  d.labels.reserve(samples.size());
  const auto rules = pendulum_rules();
  for (const auto& s : samples) {
    const auto feats = scalarize(pendulum_scalars(s), pendulum_vectors(s), rules);
    std::vector<double> row;
    row.reserve(feats.size());
    for (const auto& f : feats) row.push_back(f.value);
    d.rows.push_back(std::move(row));
    d.labels.push_back(s.H);
  }
  return d;
}

Dataset sample_pendulum_dataset(std::size_t n, std::uint64_t seed, const SamplerConfig& cfg) {
  return pendulum_dataset(sample_pendulum(n, seed, cfg));
}

Monomial pendulum_decoder(const FeatureSpec& spec) { return parse_monomial("k_s L^2", spec); }

std::vector<WeightedMonomial> pendulum_hamiltonian_terms(const FeatureSpec& spec) {
  return {{parse_monomial("m^-1 k_s^-1 L^-2 p_norm^2", spec), 0.5},
          {parse_monomial("L^-2 q_norm^2", spec), 0.5},
          {parse_monomial("L^-1 q_norm", spec), -1.0},
          {Monomial::constant(spec.size()), 0.5},
          {parse_monomial("m k_s^-1 L^-2 g_dot_q", spec), -1.0}};
}

// ---------------------------------------------------------------- Rietkerk

BaseUnitSystem rietkerk_system() { return BaseUnitSystem({"l", "g", "d", "m"}); }

UnitVector vegetation_units(const BaseUnitSystem& sys) { return sys.parse("g m^-2"); }

const std::vector<std::string>& RietkerkParams::names() {
  static const std::vector<std::string> n = {"R",   "alpha",   "k_2", "W_0",     "D_u", "g_m",
                                             "k_1", "delta_w", "D_w", "c",       "delta_v", "D_v",
                                             "T",   "delta_t", "L",   "delta_l"};
  return n;
}

const std::vector<std::string>& RietkerkParams::unit_expressions() {
  static const std::vector<std::string> u = {
      "l d^-1 m^-2", "d^-1",     "g m^-2", "1",    "d^-1 m^2", "l g^-1 d^-1", "l m^-2", "d^-1",
      "d^-1 m^2",    "l^-1 g",   "d^-1",   "d^-1 m^2", "d",    "d",           "m",      "m"};
  return u;
}

std::vector<double> RietkerkParams::values() const {
  return {R, alpha, k_2, W_0, D_u, g_m, k_1, delta_w, D_w, c, delta_v, D_v, T, delta_t, L, delta_l};
}

RietkerkParams RietkerkParams::perturbed(Rng& rng) const {
  RietkerkParams p = *this;
  for (double* x : {&p.R, &p.alpha, &p.k_2, &p.W_0, &p.D_u, &p.g_m, &p.k_1, &p.delta_w, &p.D_w, &p.c,
                    &p.delta_v, &p.D_v}) {
    *x *= rng.uniform(0.5, 1.5);
  }
  return p;
}

FeatureSpec rietkerk_spec() {
  const auto sys = rietkerk_system();
  std::vector<FeatureDescriptor> f;
  for (std::size_t i = 0; i < RietkerkParams::kCount; ++i) {
    f.push_back({RietkerkParams::names()[i], sys.parse(RietkerkParams::unit_expressions()[i]), 1, true});
  }
  return FeatureSpec(sys, std::move(f));
}

std::vector<Monomial> rietkerk_reference_basis(const FeatureSpec& spec) {
  static const char* exprs[] = {"c alpha^-1 g_m",    "R^-1 alpha k_1",    "R^-1 c^-1 alpha k_2",
                                "alpha^-1 delta_w",  "alpha^-1 delta_v",  "W_0",
                                "alpha^-1 D_v L^-2", "alpha^-1 D_u L^-2", "alpha T",
                                "alpha delta_t",     "alpha^-1 D_w L^-2", "L^-1 delta_l"};
  std::vector<Monomial> out;
  for (const char* e : exprs) out.push_back(parse_monomial(e, spec));
  return out;
}

RietkerkState random_initial_state(std::size_t n, double delta_l, std::uint64_t seed, const RietkerkInit& cfg) {
  Rng rng(seed);
  RietkerkState s;
  s.n = n;
  s.delta_l = delta_l;
  s.u.resize(n * n);
  s.w.resize(n * n);
  s.v.resize(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    s.u[i] = rng.uniform(0.0, cfg.water_max);
    s.w[i] = rng.uniform(0.0, cfg.water_max);
    const bool seeded = rng.uniform() < cfg.seed_fraction;
    const double veg = rng.uniform(0.0, cfg.vegetation_max);
    s.v[i] = seeded ? veg : 0.0;
  }
  return s;
}

namespace {

struct Neighbours {
  std::vector<std::size_t> prev, next;
  explicit Neighbours(std::size_t n) : prev(n), next(n) {
    for (std::size_t i = 0; i < n; ++i) {
      prev[i] = (i + n - 1) % n;
      next[i] = (i + 1) % n;
    }
  }
};

// Returns mean vegetation after the step; throws on blowup.
double euler_step(const RietkerkParams& p, RietkerkState& s, const Neighbours& nb, std::vector<double>& u2,
                  std::vector<double>& w2, std::vector<double>& v2, double tol, long step) {
  const std::size_t n = s.n;
  const double inv_h2 = 1.0 / (p.delta_l * p.delta_l);
  const double dt = p.delta_t;
  double veg_sum = 0.0;
  bool bad = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t up = nb.prev[i] * n, down = nb.next[i] * n, row = i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t c = row + j;
      const std::size_t l = row + nb.prev[j], r = row + nb.next[j];
      const double u = s.u[c], w = s.w[c], v = s.v[c];
      const double lap_u = (s.u[up + j] + s.u[down + j] + s.u[l] + s.u[r] - 4.0 * u) * inv_h2;
      const double lap_w = (s.w[up + j] + s.w[down + j] + s.w[l] + s.w[r] - 4.0 * w) * inv_h2;
      const double lap_v = (s.v[up + j] + s.v[down + j] + s.v[l] + s.v[r] - 4.0 * v) * inv_h2;
      const double infiltration = p.alpha * (v + p.k_2 * p.W_0) / (v + p.k_2) * u;
      const double uptake = p.g_m * v * w / (p.k_1 + w);
      const double nu = u + dt * (p.R - infiltration + p.D_u * lap_u);
      const double nw = w + dt * (infiltration - uptake - p.delta_w * w + p.D_w * lap_w);
      const double nv = v + dt * (p.c * uptake - p.delta_v * v + p.D_v * lap_v);
      // Written so that NaN fails the test.
      if (!(nu >= -tol && nw >= -tol && nv >= -tol) || !std::isfinite(nu + nw + nv)) bad = true;
      u2[c] = nu;
      w2[c] = nw;
      v2[c] = nv;
      veg_sum += nv;
    }
  }
  if (bad) throw NumericalBlowup(step);
  s.u.swap(u2);
  s.w.swap(w2);
  s.v.swap(v2);
  s.t += dt;
  return veg_sum / static_cast<double>(n * n);
}

}  // namespace

void rietkerk_step(const RietkerkParams& params, RietkerkState& s) {
  const Neighbours nb(s.n);
  std::vector<double> u2(s.u.size()), w2(s.w.size()), v2(s.v.size());
  euler_step(params, s, nb, u2, w2, v2, std::numeric_limits<double>::infinity(), 0);
}

RietkerkRun integrate_rietkerk(const RietkerkParams& params, const RietkerkState& init, const IntegrateOptions& opts) {
  if (init.n == 0 || init.u.size() != init.n * init.n || init.w.size() != init.u.size() ||
      init.v.size() != init.u.size()) {
    throw DataError("malformed Rietkerk state");
  }
  if (!(params.delta_t > 0.0) || !(params.delta_l > 0.0)) throw DataError("integration steps must be positive");
  RietkerkRun run;
  run.state = init;
  run.state.delta_l = params.delta_l;
  const long steps = std::lround(params.T / params.delta_t);
  const Neighbours nb(init.n);
  std::vector<double> u2(init.u.size()), w2(init.u.size()), v2(init.u.size());
  for (long k = 0; k < steps; ++k) {
    const double mean_v = euler_step(params, run.state, nb, u2, w2, v2, opts.negativity_tolerance, k);
    run.steps = k + 1;
    if (!run.extinct && mean_v < opts.extinction_threshold) {
      run.extinct = true;
      run.extinction_step = k;
      if (opts.stop_on_extinction) break;
    }
  }
  return run;
}

Quantity mean_vegetation(const RietkerkState& state) {
  double s = 0.0;
  for (double x : state.v) s += x;
  const double mean = state.v.empty() ? 0.0 : s / static_cast<double>(state.v.size());
  return {mean, vegetation_units(rietkerk_system())};
}

RietkerkExperiment rietkerk_experiment(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                                       const GridScale& scale, unsigned threads, const RietkerkInit& init) {
  RietkerkParams base;
  base.T = scale.T;
  base.delta_l = scale.delta_l;
  base.L = static_cast<double>(scale.cells) * scale.delta_l;

  struct Outcome {
    std::vector<double> row;
    double label = 0;
    bool extinct = false;
  };
  auto run_one = [&](std::size_t index) {
    Rng rng(derive_seed(seed, index));
    const RietkerkParams p = base.perturbed(rng);
    const RietkerkState s0 = random_initial_state(scale.cells, scale.delta_l, rng.next(), init);
    const RietkerkRun run = integrate_rietkerk(p, s0);
    return Outcome{p.values(), mean_vegetation(run.state).value, run.extinct};
  };

  const std::size_t wanted = n_train + n_test;
  const std::size_t max_attempts = 20 * wanted + 20;
  std::vector<Outcome> survivors;
  RietkerkExperiment ex;
  threads = std::max(1u, threads);

  while (survivors.size() < wanted) {
    if (ex.attempted >= max_attempts) throw InsufficientSurvivors(survivors.size(), wanted);
    const std::size_t batch = std::min(max_attempts - ex.attempted,
                                       std::max<std::size_t>(threads, (wanted - survivors.size()) * 3 / 2 + 1));
    std::vector<Outcome> results(batch);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < batch;) {
        try {
          results[i] = run_one(ex.attempted + i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, batch); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    for (auto& r : results) {
      ++ex.attempted;
      if (r.extinct) {
        ++ex.extinct;
        continue;
      }
      if (survivors.size() < wanted) survivors.push_back(std::move(r));
    }
  }

  auto make = [&](std::size_t from, std::size_t to) {
    Dataset d;
    d.spec = rietkerk_spec();
    d.label_units = vegetation_units(d.spec.system());
    for (std::size_t i = from; i < to; ++i) {
      d.rows.push_back(survivors[i].row);
      d.labels.push_back(survivors[i].label);
    }
    return d;
  };
  ex.train = make(0, n_train);
  ex.test = make(n_train, wanted);
  return ex;
}

// ---------------------------------------------------------------- Planck

BaseUnitSystem thermal_system() { return BaseUnitSystem::with_si_aliases({"kg", "m", "s", "K"}); }

UnitVector intensity_units(const BaseUnitSystem& thermal) { return thermal.parse("kg m^-1 s^-3"); }

FeatureSpec planck_spec() {
  const auto sys = thermal_system();
  return FeatureSpec(sys, {{"lambda", sys.parse("m"), 1, true},
                           {"T", sys.parse("K"), 1, true},
                           {"c", sys.parse("m s^-1"), 1, true},
                           {"k_B", sys.parse("kg m^2 s^-2 K^-1"), 1, true}});
}

double planck_intensity(double lambda, double temperature) {
  const double x = kPlanck * kSpeedOfLight / (lambda * kBoltzmann * temperature);
  return 2.0 * kPlanck * kSpeedOfLight * kSpeedOfLight / std::pow(lambda, 5) / std::expm1(x);
}

// ------------------------------------------------------- double pendulum

DoublePendulumFixtures double_pendulum_feature_fixtures() {
  const auto sys = mechanics_system();
  const UnitVector kg = sys.parse("kg"), m = sys.parse("m");
  std::vector<NamedQuantity> scalars = {
      {"m_1", {0, kg}}, {"m_2", {0, kg}}, {"k_s1", {0, sys.parse("kg s^-2")}}, {"k_s2", {0, sys.parse("kg s^-2")}},
      {"L_1", {0, m}},  {"L_2", {0, m}}};
  const UnitVector momentum = sys.parse("kg m s^-1");
  std::vector<VectorFeature> vectors = {{"g", {}, sys.parse("m s^-2")},
                                        {"p_1", {}, momentum},
                                        {"p_2", {}, momentum},
                                        {"q_1", {}, m},
                                        {"q_2", {}, m},
                                        {"q_21", {}, m}};  // q_2 - q_1
  ScalarizeRules rules;
  rules.dots_allow_negative = true;
  DoublePendulumFixtures fx;
  fx.spec = FeatureSpec::from_scalars(sys, scalarize(scalars, vectors, rules));

  auto add = [&](std::vector<UnitFixture>& family, const std::string& expr, const UnitVector& want, bool squared) {
    Monomial mono = parse_monomial(expr, fx.spec);
    if (monomial_units(mono, fx.spec) != want) {
      throw SpecError("fixture '" + expr + "' has units " + sys.format(monomial_units(mono, fx.spec)) +
                      ", expected " + sys.format(want));
    }
    family.push_back({expr, std::move(mono), squared});
  };

  const UnitVector none = sys.zero();
  for (const char* e : {"m_1 m_2^-1", "k_s1 k_s2^-1", "L_1 L_2^-1", "m_2 m_1^-1", "k_s2 k_s1^-1", "L_2 L_1^-1"}) {
    add(fx.dimensionless, e, none, false);
  }
  const std::vector<std::string> V = {"g", "p_1", "p_2", "q_1", "q_21"};
  for (std::size_t a = 0; a < V.size(); ++a) {
    for (std::size_t b = a + 1; b < V.size(); ++b) {
      add(fx.dimensionless,
          dot_name(V[a], V[b]) + " " + norm_name(V[a]) + "^-1 " + norm_name(V[b]) + "^-1", none, false);
    }
  }
  for (const std::string i : {"1", "2"}) {
    const std::string mi = "m_" + i, ki = "k_s" + i, Li = "L_" + i;
    add(fx.dimensionless, mi + " g_norm " + ki + "^-1 " + Li + "^-1", none, false);
    add(fx.dimensionless, ki + " " + Li + " " + mi + "^-1 g_norm^-1", none, false);
    add(fx.dimensionless, "q_" + i + "_norm " + Li + "^-1", none, false);
    add(fx.dimensionless, "q_" + i + "_norm^2 " + Li + "^-2", none, false);
    // |p_i| / (sqrt(m_i k_si) L_i) has a half-integer exponent; keep its square.
    add(fx.dimensionless, "p_" + i + "_norm^2 " + mi + "^-1 " + ki + "^-1 " + Li + "^-2", none, true);
    add(fx.dimensionless, "p_" + i + "_norm^2 " + mi + "^-1 " + ki + "^-1 " + Li + "^-2", none, false);
  }

  const UnitVector energy = energy_units(sys);
  const std::vector<std::pair<std::string, std::string>> pairs = {{"1", "1"}, {"1", "2"}, {"2", "2"}};
  for (const std::string r : {"1", "2"}) {
    for (const auto& [i, j] : pairs) add(fx.energy, "k_s" + r + " L_" + i + " L_" + j, energy, false);
  }
  for (const std::string i : {"1", "2"}) {
    for (const std::string j : {"1", "2"}) add(fx.energy, "m_" + i + " L_" + j + " g_norm", energy, false);
  }
  for (const std::string i : {"1", "2"}) {
    for (const std::string j : {"1", "2"}) add(fx.energy, "m_" + i + " g_dot_q_" + j, energy, false);
  }
  auto inner = [](const std::string& v, const std::string& i, const std::string& j) {
    return i == j ? v + "_" + i + "_norm^2" : dot_name(v + "_" + i, v + "_" + j);
  };
  for (const std::string r : {"1", "2"}) {
    for (const auto& [i, j] : pairs) add(fx.energy, inner("p", i, j) + " m_" + r + "^-1", energy, false);
  }
  for (const std::string r : {"1", "2"}) {
    for (const auto& [i, j] : pairs) add(fx.energy, "k_s" + r + " " + inner("q", i, j), energy, false);
  }
  return fx;
}

}  // namespace ueq
