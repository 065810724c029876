#pragma once

#include <vector>

#include "teamteach/bec.hpp"
#include "teamteach/belief.hpp"

namespace teamteach::team {

// One constraint set per team member for the current test set. Empty sets
// mean the member produced no informative constraints.
struct TeamEvidence {
  std::vector<bec::ConstraintSet> per_member;

  std::size_t members() const { return per_member.size(); }
  bec::ConstraintSet merged() const {
    bec::ConstraintSet all;
    for (const auto& cs : per_member) all.extend(cs);
    return all;
  }
};

struct ConflictResolution {
  TeamEvidence evidence;             // surviving members' sets
  std::vector<std::size_t> dropped;  // original member indices removed
};

// If the members' combined constraint region is empty (no sample point
// satisfies all of it), greedily drop the member whose removal leaves the
// largest intersection, until non-empty. Members whose own set is
// self-conflicting are dropped first. Ties retain the lower member index.
ConflictResolution resolve_conflicts(const TeamEvidence& ev,
                                     const SphereSample& sample);

enum class TeamUpdateStatus { Updated, NoEvidence };

// Common team belief: weights multiplied by the product of every surviving
// member's constraint likelihoods. Conflicts are resolved first; if nothing
// survives the belief is left unchanged.
TeamUpdateStatus common_update(belief::Belief& b, const TeamEvidence& ev,
                               const belief::LikelihoodParams& lp,
                               const SphereSample& sample,
                               const belief::UpdateOptions& opts = {});

// Joint team belief: per particle, the maximum over members of that member's
// likelihood product. Max-form aggregation cannot conflict, so no resolution
// step is applied.
void joint_update(belief::Belief& b, const TeamEvidence& ev,
                  const belief::LikelihoodParams& lp,
                  const belief::UpdateOptions& opts = {});

}  // namespace teamteach::team
