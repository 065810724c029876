#include "teamteach/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace teamteach::learner {

namespace {

constexpr double kBetaLo = 0.05;
constexpr double kBetaHi = 0.95;

double clamp_beta(double b) { return std::clamp(b, kBetaLo, kBetaHi); }

}  // namespace

const char* to_string(LearnerKind k) {
  return k == LearnerKind::Novice ? "novice" : "proficient";
}

LearnerProfile LearnerProfile::novice() { return LearnerProfile{}; }

LearnerProfile LearnerProfile::proficient() {
  LearnerProfile p;
  p.kind = LearnerKind::Proficient;
  p.beta0_mean = 0.809;
  p.beta0_std = 0.025;
  p.delta_beta_correct_std = 0.022;
  p.delta_beta_incorrect_std = 0.052;
  return p;
}

Learner make_learner(const LearnerProfile& profile, std::size_t n_particles,
                     std::uint64_t seed) {
  if (!(profile.beta0_mean > 0.0 && profile.beta0_mean < 1.0))
    throw std::invalid_argument("beta0 mean must lie in (0, 1)");
  if (profile.beta0_std < 0.0 || profile.delta_beta_correct_std < 0.0 ||
      profile.delta_beta_incorrect_std < 0.0)
    throw std::invalid_argument("profile stddevs must be non-negative");
  Learner l;
  l.profile = profile;
  l.rng = RandomStream(derive_seed(seed, 0x1ea61));
  l.self_belief =
      belief::init_uniform_with_prior(n_particles, derive_seed(seed, 0xbe11ef));
  l.beta0 = clamp_beta(l.rng.normal(profile.beta0_mean, profile.beta0_std));
  l.beta = l.beta0;
  return l;
}

void observe_demos(Learner& l, const bec::ConstraintSet& conveyed) {
  if (conveyed.empty()) return;
  belief::update(l.self_belief, conveyed, l.likelihood(),
                 belief::UpdateOptions{.eta = l.eta, .allow_resample = true});
}

TestResponse respond_to_test(Learner& l, const curriculum::TestEnv& t) {
  TestResponse r;
  r.sampled_weight = belief::sample_weight(l.self_belief, l.rng);
  const mdp::Policy pol = mdp::solve_policy(t.env, r.sampled_weight);
  r.trajectory = mdp::rollout(t.env, pol);
  r.correct = r.trajectory.features.approx_equal(t.optimal.features);
  return r;
}

void receive_feedback(Learner& l, const curriculum::TestEnv& t,
                      const TestResponse& response, FeedbackKind kind) {
  const bool expect_confirm = response.correct;
  if ((kind == FeedbackKind::Confirmatory) != expect_confirm)
    throw std::invalid_argument("feedback kind contradicts response correctness");

  bec::ConstraintSet cs;
  for (const auto& c : t.discriminating.constraints)
    cs.add(bec::HalfSpaceConstraint{c.normal, bec::ConstraintSource::Feedback});
  if (kind == FeedbackKind::Corrective) {
    const auto pair = bec::constraints_from_pair(t.optimal, response.trajectory,
                                                 bec::ConstraintSource::Feedback);
    if (pair) cs.add(*pair);
  }
  belief::update(l.self_belief, cs, l.likelihood(),
                 belief::UpdateOptions{.eta = l.eta, .allow_resample = true});

  const double sigma = kind == FeedbackKind::Confirmatory
                           ? l.profile.delta_beta_correct_std
                           : l.profile.delta_beta_incorrect_std;
  const double delta =
      l.deterministic_increments ? sigma : std::abs(l.rng.normal(0.0, sigma));
  l.beta = clamp_beta(l.beta + delta);
}

void reset_beta_for_new_kc(Learner& l) { l.beta = l.beta0; }

}  // namespace teamteach::learner
