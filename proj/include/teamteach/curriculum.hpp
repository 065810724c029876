#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "teamteach/bec.hpp"
#include "teamteach/belief.hpp"
#include "teamteach/mdp.hpp"

namespace teamteach::curriculum {

// A KC is vacuous for the configured ground truth (e.g. zero rubble weight).
struct CurriculumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The pool offers nothing that can teach or test the current KC.
struct CurriculumExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One facet of the reward function taught as a unit.
struct KnowledgeComponent {
  int id = 0;
  bec::ConstraintSet target_constraints;
  std::string description;
};

struct DemoPlan {
  std::vector<int> env_indices;            // into the env pool
  std::vector<mdp::Trajectory> demos;      // ground-truth-optimal rollouts
  bec::ConstraintSet conveyed;             // minimized union of pair constraints
  double area = 1.0;                       // spherical area of `conveyed`
  double gain = 0.0;                       // knowledge gain on the KC targets
};

struct TestEnv {
  int pool_index = -1;
  mdp::GridEnvironment env;
  mdp::Trajectory optimal;
  bec::ConstraintSet discriminating;  // optimal-vs-second-best at the start
};

struct EnvPoolParams {
  int count = 64;
  int min_size = 5;
  int max_size = 7;
  double max_rubble_density = 0.3;
  double charger_fraction = 0.5;
};

std::vector<mdp::GridEnvironment> make_env_pool(const EnvPoolParams& params,
                                                double gamma, int horizon,
                                                std::uint64_t seed);

// Session-scoped cache of counterfactual policies keyed by (env, weight).
class PolicyCache {
 public:
  const mdp::Policy& policy(const std::vector<mdp::GridEnvironment>& pool,
                            int env_index, const mdp::WeightVector& w);

 private:
  using Key = std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t>;
  std::map<Key, mdp::Policy> cache_;
};

// A pool environment pre-scored as a test for one KC. `examines_kc` means the
// discriminating constraint follows from the curriculum up to that KC but not
// from the preceding KCs alone; `readiness` is the fraction of the taught
// region in which the environment's whole demo BEC holds (a learner inside the
// taught band answers correctly); `bec_area` is the size of that BEC region,
// the test's difficulty for anyone outside the band.
struct TestCandidate {
  TestEnv test;
  double readiness = 0.0;
  double bec_area = 1.0;
  bool examines_kc = false;
};

// Immutable per-study data: the pool with its ground-truth policies, demos
// and full demo BEC sets, the curriculum, test candidates per KC, and the
// shared sphere samples.
struct StudyAssets {
  std::vector<mdp::GridEnvironment> pool;
  mdp::WeightVector w_star{Vec3{-3.0, 3.5, -1.0}};
  std::vector<mdp::Policy> star_policies;
  std::vector<mdp::Trajectory> star_demos;
  std::vector<bec::ConstraintSet> star_bec;  // minimized BEC of each demo
  std::vector<KnowledgeComponent> kcs;
  bec::ConstraintSet full_targets;  // union of every KC's targets, minimized
  bec::ConstraintSet prior;         // the negative-step-weight hemisphere
  SphereSample region_sample;       // area / minimize / conflict tests
  SphereSample scoring_sample;      // cheaper per-candidate checks
  std::vector<std::vector<TestCandidate>> test_candidates;  // [kc], sorted

  StudyAssets(const EnvPoolParams& pool_params, const mdp::WeightVector& w,
              double gamma, int horizon, std::uint64_t pool_seed,
              std::uint64_t sample_seed, std::size_t region_samples = 100000,
              std::size_t scoring_samples = 20000);
};

// The three-KC curriculum: rubble-vs-step bounds, recharge-vs-step bounds,
// then rubble-vs-battery trade-offs. Targets are extracted from fixed
// hand-built environment pairs solved under the ground truth; a facet that
// the configured weights make vacuous raises CurriculumError naming the KC.
std::vector<KnowledgeComponent> default_kcs(const mdp::WeightVector& w_star,
                                            double gamma, int horizon);

// Weighted draw of n_cf particles without replacement (with replacement once
// the distinct particles run out).
std::vector<mdp::WeightVector> sample_counterfactual_weights(
    const belief::Belief& b, std::size_t n_cf, RandomStream& rng);

// Counterfactual-driven demo selection: each candidate environment is scored
// by the knowledge gain its demo-vs-counterfactual constraints would produce
// on the KC targets under the teacher's nominal likelihood. Candidates whose
// constraints imply the full KC target set are preferred; ties break toward
// smaller conveyed area, then pool order.
DemoPlan select_demos(const StudyAssets& assets, PolicyCache& cf_cache,
                      const KnowledgeComponent& kc, const belief::Belief& b,
                      const belief::LikelihoodParams& teacher_lp,
                      std::size_t n_demos, std::size_t n_cf, RandomStream& rng);

// Test environments whose optimal-vs-second-best constraint examines the
// current KC: implied by the curriculum taught so far, but not by the
// preceding KCs alone. Demo environments of the period are excluded, as are
// environments already used for this KC (until the pool is exhausted).
std::vector<TestEnv> select_tests(const StudyAssets& assets, int kc_index,
                                  const std::set<int>& excluded,
                                  const std::set<int>& used_for_kc,
                                  std::size_t n_tests);

}  // namespace teamteach::curriculum
