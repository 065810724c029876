#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teamteach/bec.hpp"
#include "teamteach/geometry.hpp"
#include "teamteach/mdp.hpp"
#include "teamteach/rng.hpp"

namespace teamteach::belief {

// Two-piece constraint likelihood on the unit sphere: uniform over the
// consistent hemisphere with total mass `consistent_mass`, and a von
// Mises-Fisher falloff on the inconsistent side. The vMF concentration is
// solved from the mass split so the density is continuous at the constraint
// great circle and integrates to one; `kappa` is only used as the falloff
// when the split is degenerate (consistent_mass <= 1/2, where no continuous
// decreasing profile can carry the requested mass).
struct LikelihoodParams {
  double consistent_mass = 0.76;
  double kappa = 4.0;
};

// Concentration k solving (1 - e^-k)/k = (1 - m)/m for m in (1/2, 1).
double solve_concentration(double consistent_mass);

// Density at unit vector x under the constraint pdf; integrates to 1 over
// the sphere. Throws std::invalid_argument for non-unit x.
double constraint_likelihood(const Vec3& x, const bec::HalfSpaceConstraint& c,
                             const LikelihoodParams& lp);

// Weighted particle set on the unit sphere with its own random stream.
struct Belief {
  std::vector<Vec3> particles;
  std::vector<double> weights;
  RandomStream rng;

  std::size_t size() const { return particles.size(); }
  double effective_sample_size() const;
};

struct UpdateOptions {
  double eta = 0.02;            // resampling jitter stddev
  bool allow_resample = true;   // disable for side-effect-free scoring
};

// n particles uniform on the hemisphere with negative third (step-weight)
// component, equal weights. Throws std::invalid_argument for n < 2.
Belief init_uniform_with_prior(std::size_t n, std::uint64_t seed);

// Bayes step: multiply each particle weight by the product of constraint
// likelihoods, renormalize, then resample if degenerate. An all-zero
// posterior falls back to reinitialization from the prior with a density
// floor; it never halts a session.
void update(Belief& b, const bec::ConstraintSet& cs, const LikelihoodParams& lp,
            const UpdateOptions& opts = {});

// Pure scoring variant: returns the reweighted belief without resampling or
// touching any random stream.
Belief simulate_update(const Belief& b, const bec::ConstraintSet& cs,
                       const LikelihoodParams& lp);

// Shared tail of every update: renormalize `multiplied` weights and resample
// if degenerate. Exposed so team updates follow the identical path.
void apply_multipliers(Belief& b, const std::vector<double>& multipliers,
                       const bec::ConstraintSet& applied, const LikelihoodParams& lp,
                       const UpdateOptions& opts);

// Systematic resampling when ESS < n/2, followed by isotropic Gaussian
// jitter (stddev eta) and re-projection to the sphere.
void resample(Belief& b, double eta);

// Unconditional jitter + re-projection; the teacher's estimation noise after
// test updates.
void perturb(Belief& b, double stddev);

mdp::WeightVector sample_weight(const Belief& b, RandomStream& rng);
inline mdp::WeightVector sample_weight(const Belief& b, std::uint64_t seed) {
  RandomStream rng(seed);
  return sample_weight(b, rng);
}

// Sum of normalized particle weights satisfying every constraint.
double p_bec(const Belief& b, const bec::ConstraintSet& cs);

std::string belief_to_json(const Belief& b);
Belief belief_from_json(const std::string& text);

}  // namespace teamteach::belief
