#include "teamteach/belief.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace teamteach::belief {

using nlohmann::json;

namespace {

constexpr double kWeightFloor = 1e-12;
constexpr double kMaxMass = 1.0 - 1e-9;

// Per-constraint evaluation state so updates solve the concentration once.
struct PdfProfile {
  Vec3 unit_normal;
  double uniform_density;  // consistent-side value, m / 2pi
  double concentration;

  double density(const Vec3& x) const {
    const double d = dot(unit_normal, x);
    if (d >= 0.0) return uniform_density;
    return uniform_density * std::exp(concentration * d);
  }
};

PdfProfile make_profile(const bec::HalfSpaceConstraint& c,
                        const LikelihoodParams& lp) {
  PdfProfile p;
  p.unit_normal = normalized(c.normal);
  if (lp.consistent_mass <= 0.0 || lp.consistent_mass >= 1.0)
    throw std::invalid_argument("consistent_mass must lie in (0, 1)");
  if (lp.consistent_mass > 0.5) {
    const double m = std::min(lp.consistent_mass, kMaxMass);
    p.uniform_density = m / (2.0 * M_PI);
    p.concentration = solve_concentration(m);
  } else {
    // Degenerate split: keep the requested falloff, normalize by scale. The
    // boundary is discontinuous here; unreachable under study configs.
    if (lp.kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
    p.uniform_density = lp.consistent_mass / (2.0 * M_PI);
    p.concentration = lp.kappa;
  }
  return p;
}

void normalize_weights(std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) throw std::runtime_error("cannot normalize zero weights");
  for (double& v : w) v /= total;
}

}  // namespace

double solve_concentration(double consistent_mass) {
  if (!(consistent_mass > 0.5 && consistent_mass < 1.0))
    throw std::invalid_argument("mass split requires consistent_mass in (1/2, 1)");
  const double target = (1.0 - consistent_mass) / consistent_mass;
  // f(k) = (1 - e^-k)/k is strictly decreasing from 1 to 0; bisect.
  double lo = 1e-9, hi = 1.0;
  auto f = [](double k) { return (1.0 - std::exp(-k)) / k; };
  while (f(hi) > target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double constraint_likelihood(const Vec3& x, const bec::HalfSpaceConstraint& c,
                             const LikelihoodParams& lp) {
  if (!is_unit(x, 1e-6)) throw std::invalid_argument("x must be a unit vector");
  return make_profile(c, lp).density(x);
}

double Belief::effective_sample_size() const {
  double sum = 0.0, sq = 0.0;
  for (double w : weights) {
    sum += w;
    sq += w * w;
  }
  return sq > 0.0 ? sum * sum / sq : 0.0;
}

Belief init_uniform_with_prior(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("belief needs at least 2 particles");
  Belief b;
  b.rng = RandomStream(seed);
  b.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 v = random_unit_vector(b.rng);
    if (v.z > 0.0) v.z = -v.z;
    while (v.z == 0.0) v = random_unit_vector(b.rng);  // measure-zero edge
    b.particles.push_back(v);
  }
  b.weights.assign(n, 1.0 / static_cast<double>(n));
  return b;
}

void resample(Belief& b, double eta) {
  const std::size_t n = b.size();
  if (n == 0) return;
  if (b.effective_sample_size() >= static_cast<double>(n) / 2.0) return;

  // systematic resampling
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += b.weights[i];
    cumulative[i] = total;
  }
  const double stride = total / static_cast<double>(n);
  double u = b.rng.uniform() * stride;
  std::vector<Vec3> resampled;
  resampled.reserve(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (j + 1 < n && cumulative[j] < u) ++j;
    resampled.push_back(b.particles[j]);
    u += stride;
  }

  for (Vec3& p : resampled) {
    if (eta > 0.0) {
      p.x += eta * b.rng.normal();
      p.y += eta * b.rng.normal();
      p.z += eta * b.rng.normal();
    }
    const double len = norm(p);
    p = len > 1e-12 ? p * (1.0 / len) : random_unit_vector(b.rng);
  }
  b.particles = std::move(resampled);
  b.weights.assign(n, 1.0 / static_cast<double>(n));
}

void perturb(Belief& b, double stddev) {
  if (stddev <= 0.0) return;
  for (Vec3& p : b.particles) {
    p.x += stddev * b.rng.normal();
    p.y += stddev * b.rng.normal();
    p.z += stddev * b.rng.normal();
    const double len = norm(p);
    p = len > 1e-12 ? p * (1.0 / len) : random_unit_vector(b.rng);
  }
}

void apply_multipliers(Belief& b, const std::vector<double>& multipliers,
                       const bec::ConstraintSet& applied,
                       const LikelihoodParams& lp, const UpdateOptions& opts) {
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    b.weights[i] *= multipliers[i];
    total += b.weights[i];
  }
  if (total <= 0.0 || !std::isfinite(total)) {
    // Degenerate posterior: restart from the prior and replay the evidence
    // with a density floor.
    Belief fresh = init_uniform_with_prior(b.size(), b.rng.bits());
    b.particles = std::move(fresh.particles);
    b.weights = std::move(fresh.weights);
    for (std::size_t i = 0; i < b.size(); ++i) {
      double product = 1.0;
      for (const auto& c : applied.constraints)
        product *= std::max(constraint_likelihood(b.particles[i], c, lp),
                            kWeightFloor);
      b.weights[i] *= product;
    }
  }
  normalize_weights(b.weights);
  if (opts.allow_resample) resample(b, opts.eta);
}

void update(Belief& b, const bec::ConstraintSet& cs, const LikelihoodParams& lp,
            const UpdateOptions& opts) {
  std::vector<double> mult(b.size(), 1.0);
  if (!cs.empty()) {
    std::vector<PdfProfile> profiles;
    profiles.reserve(cs.size());
    for (const auto& c : cs.constraints) profiles.push_back(make_profile(c, lp));
    for (std::size_t i = 0; i < b.size(); ++i) {
      double product = 1.0;
      for (const auto& p : profiles) product *= p.density(b.particles[i]);
      mult[i] = product;
    }
  }
  apply_multipliers(b, mult, cs, lp, opts);
}

Belief simulate_update(const Belief& b, const bec::ConstraintSet& cs,
                       const LikelihoodParams& lp) {
  Belief out = b;
  update(out, cs, lp, UpdateOptions{.eta = 0.0, .allow_resample = false});
  return out;
}

mdp::WeightVector sample_weight(const Belief& b, RandomStream& rng) {
  if (b.size() == 0) throw std::invalid_argument("empty belief");
  const std::size_t i = rng.categorical(b.weights);
  return mdp::WeightVector(b.particles[i]);
}

double p_bec(const Belief& b, const bec::ConstraintSet& cs) {
  double total = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    total += b.weights[i];
    if (cs.satisfied_by(b.particles[i])) inside += b.weights[i];
  }
  return total > 0.0 ? inside / total : 0.0;
}

std::string belief_to_json(const Belief& b) {
  json j;
  json particles = json::array();
  for (const Vec3& p : b.particles)
    particles.push_back(json::array({p.x, p.y, p.z}));
  j["particles"] = particles;
  j["weights"] = b.weights;
  return j.dump();
}

Belief belief_from_json(const std::string& text) {
  const json j = json::parse(text);
  Belief b;
  for (const auto& p : j.at("particles"))
    b.particles.push_back(Vec3{p.at(0).get<double>(), p.at(1).get<double>(),
                               p.at(2).get<double>()});
  b.weights = j.at("weights").get<std::vector<double>>();
  if (b.particles.size() != b.weights.size())
    throw std::invalid_argument("particle/weight length mismatch");
  return b;
}

}  // namespace teamteach::belief
