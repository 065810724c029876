#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teamteach/geometry.hpp"
#include "teamteach/mdp.hpp"

namespace teamteach::bec {

enum class ConstraintSource : int { Demo = 0, Counterfactual = 1, TestResponse = 2, Feedback = 3 };

const char* to_string(ConstraintSource s);

// Half-space on reward weights: satisfied iff normal . w >= 0 (closed side).
// The normal need not be unit; positive scaling leaves the satisfied set
// unchanged.
struct HalfSpaceConstraint {
  Vec3 normal;
  ConstraintSource source = ConstraintSource::Demo;

  bool satisfied_by(const Vec3& w) const { return dot(normal, w) >= 0.0; }
};

struct ConstraintSet {
  std::vector<HalfSpaceConstraint> constraints;

  bool empty() const { return constraints.empty(); }
  std::size_t size() const { return constraints.size(); }
  void add(const HalfSpaceConstraint& c) { constraints.push_back(c); }
  void extend(const ConstraintSet& other) {
    constraints.insert(constraints.end(), other.constraints.begin(),
                       other.constraints.end());
  }
  bool satisfied_by(const Vec3& w) const {
    for (const auto& c : constraints)
      if (!c.satisfied_by(w)) return false;
    return true;
  }
  std::vector<Vec3> normals() const {
    std::vector<Vec3> ns;
    ns.reserve(constraints.size());
    for (const auto& c : constraints) ns.push_back(c.normal);
    return ns;
  }
};

// Eq-1 extraction: one constraint per (s, a) along the demo and each
// alternative action, normal = mu(s, a) - mu(s, b). Zero normals dropped.
ConstraintSet constraints_from_demo(const mdp::GridEnvironment& env,
                                    const mdp::Trajectory& demo,
                                    const mdp::Policy& pol,
                                    ConstraintSource source = ConstraintSource::Demo);

// Single constraint from a preferred/alternative trajectory pair,
// normal = features(optimal) - features(alternative). nullopt when the pair
// is uninformative (feature-identical trajectories).
std::optional<HalfSpaceConstraint> constraints_from_pair(
    const mdp::Trajectory& optimal, const mdp::Trajectory& alternative,
    ConstraintSource source = ConstraintSource::Counterfactual);

// Drops positive-scalar duplicates, then constraints whose satisfied region
// contains the sampled intersection of the others. Conflicting sets (empty
// sampled intersection) are only deduplicated.
ConstraintSet minimize(const ConstraintSet& cs, const SphereSample& sample);

struct AreaEstimate {
  double fraction = 0.0;
  double std_error = 0.0;
};

// Monte Carlo fraction of the unit sphere satisfying every constraint.
AreaEstimate spherical_area(const ConstraintSet& cs, const SphereSample& sample);
AreaEstimate spherical_area(const ConstraintSet& cs, std::size_t n_samples,
                            std::uint64_t seed);

// True iff no sample point satisfies the whole set.
bool region_empty(const ConstraintSet& cs, const SphereSample& sample);

// Fraction of sample points satisfying `lhs` that also satisfy `rhs`;
// returns 1 when no point satisfies lhs.
double implication_fraction(const ConstraintSet& lhs, const ConstraintSet& rhs,
                            const SphereSample& sample);

std::string constraint_to_json(const HalfSpaceConstraint& c);
std::string constraint_set_to_json(const ConstraintSet& cs);
ConstraintSet constraint_set_from_json(const std::string& text);

}  // namespace teamteach::bec
