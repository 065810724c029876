#include "teamteach/team.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "teamteach/parallel.hpp"

namespace teamteach::team {

namespace {

bec::ConstraintSet merge_members(const TeamEvidence& ev,
                                 const std::vector<bool>& active) {
  bec::ConstraintSet all;
  for (std::size_t i = 0; i < ev.members(); ++i)
    if (active[i]) all.extend(ev.per_member[i]);
  return all;
}

// per-particle product of one member's constraint likelihoods
std::vector<double> member_products(const belief::Belief& b,
                                    const bec::ConstraintSet& cs,
                                    const belief::LikelihoodParams& lp) {
  std::vector<double> prod(b.size(), 1.0);
  for (const auto& c : cs.constraints) {
    for (std::size_t i = 0; i < b.size(); ++i)
      prod[i] *= belief::constraint_likelihood(b.particles[i], c, lp);
  }
  return prod;
}

}  // namespace

ConflictResolution resolve_conflicts(const TeamEvidence& ev,
                                     const SphereSample& sample) {
  const std::size_t m = ev.members();
  std::vector<bool> active(m, true);
  ConflictResolution out;

  // self-conflicting members go first
  for (std::size_t i = 0; i < m; ++i) {
    if (!ev.per_member[i].empty() && bec::region_empty(ev.per_member[i], sample)) {
      active[i] = false;
      out.dropped.push_back(i);
      std::cerr << "[team] warning: member " << i
                << " produced a self-conflicting constraint set; dropped\n";
    }
  }

  auto active_count = [&] {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  };

  while (active_count() > 1 && bec::region_empty(merge_members(ev, active), sample)) {
    // drop the member whose removal leaves the largest intersection;
    // on ties keep the lower index (drop the higher one)
    std::size_t best_drop = m;
    std::size_t best_area = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!active[i]) continue;
      std::vector<bool> trial = active;
      trial[i] = false;
      const std::size_t area =
          par::count_satisfying(sample, merge_members(ev, trial).normals());
      if (best_drop == m || area > best_area ||
          (area == best_area && i > best_drop)) {
        best_drop = i;
        best_area = area;
      }
    }
    active[best_drop] = false;
    out.dropped.push_back(best_drop);
  }

  for (std::size_t i = 0; i < m; ++i)
    if (active[i]) out.evidence.per_member.push_back(ev.per_member[i]);
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

TeamUpdateStatus common_update(belief::Belief& b, const TeamEvidence& ev,
                               const belief::LikelihoodParams& lp,
                               const SphereSample& sample,
                               const belief::UpdateOptions& opts) {
  const ConflictResolution res = resolve_conflicts(ev, sample);
  const bec::ConstraintSet all = res.evidence.merged();
  if (all.empty()) return TeamUpdateStatus::NoEvidence;
  belief::update(b, all, lp, opts);
  return TeamUpdateStatus::Updated;
}

void joint_update(belief::Belief& b, const TeamEvidence& ev,
                  const belief::LikelihoodParams& lp,
                  const belief::UpdateOptions& opts) {
  if (ev.members() == 0) return;
  std::vector<double> mult(b.size(),
                           -std::numeric_limits<double>::infinity());
  bec::ConstraintSet all = ev.merged();
  for (const auto& member_cs : ev.per_member) {
    const std::vector<double> prod = member_products(b, member_cs, lp);
    for (std::size_t i = 0; i < b.size(); ++i)
      mult[i] = std::max(mult[i], prod[i]);
  }
  belief::apply_multipliers(b, mult, all, lp, opts);
}

}  // namespace teamteach::team
