#pragma once

#include <cstdint>
#include <string>

#include "teamteach/belief.hpp"
#include "teamteach/curriculum.hpp"

namespace teamteach::learner {

enum class LearnerKind : int { Novice = 0, Proficient = 1 };

const char* to_string(LearnerKind k);

// Learning-ability parameters per learner category. The deltas are the
// scales of half-normal feedback increments; with deterministic_increments
// the increment equals the scale exactly.
struct LearnerProfile {
  LearnerKind kind = LearnerKind::Novice;
  double beta0_mean = 0.703;
  double beta0_std = 0.034;
  double delta_beta_correct_std = 0.033;
  double delta_beta_incorrect_std = 0.056;

  static LearnerProfile novice();
  static LearnerProfile proficient();
};

enum class FeedbackKind { Confirmatory, Corrective };

// Simulated human learner: a self-belief particle filter plus the beta
// learning-ability state. Only demos and feedback mutate the belief; tests
// alone never do.
struct Learner {
  belief::Belief self_belief;
  double beta = 0.0;
  double beta0 = 0.0;
  LearnerProfile profile;
  RandomStream rng;
  double kappa = 4.0;
  double eta = 0.02;
  bool deterministic_increments = false;

  belief::LikelihoodParams likelihood() const {
    return belief::LikelihoodParams{beta, kappa};
  }
};

Learner make_learner(const LearnerProfile& profile, std::size_t n_particles,
                     std::uint64_t seed);

// Self-belief update from the demo plan's conveyed constraints at the
// learner's current beta; resampling noise eta only (no teacher estimation
// noise on the learner side).
void observe_demos(Learner& l, const bec::ConstraintSet& conveyed);

struct TestResponse {
  mdp::Trajectory trajectory;
  bool correct = false;
  mdp::WeightVector sampled_weight{Vec3{0, 0, -1}};
};

// Samples a reward weight from the self-belief and answers with that
// weight's optimal trajectory. Behaviorally equivalent answers (equal
// discounted features) count as correct.
TestResponse respond_to_test(Learner& l, const curriculum::TestEnv& t);

// Belief update plus the beta feedback dynamics: confirmatory reinforces
// with the test's discriminating set, corrective additionally teaches the
// correct-vs-response pairwise constraint. Throws std::invalid_argument when
// the kind contradicts the response's correctness.
void receive_feedback(Learner& l, const curriculum::TestEnv& t,
                      const TestResponse& response, FeedbackKind kind);

// Concepts are independent: beta returns to beta0 at each KC boundary.
void reset_beta_for_new_kc(Learner& l);

}  // namespace teamteach::learner
