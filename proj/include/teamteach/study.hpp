#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "teamteach/config.hpp"
#include "teamteach/curriculum.hpp"
#include "teamteach/learner.hpp"
#include "teamteach/team.hpp"

namespace teamteach::study {

struct BeliefSnapshots {
  std::vector<std::string> learners;  // belief JSON per member
  std::vector<std::string> teachers;
  std::string common;
  std::string joint;
};

struct PeriodTrace {
  int period = 0;  // 1-based
  int kc = 0;
  std::vector<int> demo_envs;
  double demo_area = 1.0;
  double demo_gain = 0.0;
  std::vector<int> test_envs;
  std::vector<std::vector<bool>> correct;  // [member][test]
  std::vector<double> betas;               // post-feedback
  std::vector<double> learner_pbec;        // vs the full target set
  std::vector<double> teacher_pbec;
  double common_pbec = 0.0;
  double joint_pbec = 0.0;
  std::vector<std::size_t> conflict_dropped;
  bool advanced = false;
  std::vector<BeliefSnapshots> snapshots;  // at most one entry
};

struct SessionRecord {
  Strategy strategy = Strategy::Baseline;
  std::string composition;
  int replicate = 0;
  std::uint64_t seed = 0;
  int n_interactions = 0;
  std::vector<double> per_member_knowledge;
  double team_knowledge = 0.0;
  double mean_demo_area = 1.0;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
  std::vector<PeriodTrace> periods;
  std::vector<SessionRecord> solo_sessions;  // baseline only

  std::string to_json() const;
  std::string id() const;  // "<strategy>_<composition>_<replicate>"
};

// Live state of one group teaching session. Teacher-side estimates and
// learner self-beliefs are kept strictly apart: strategy selection sees only
// the former, knowledge metrics only the latter.
struct SessionState {
  std::vector<learner::Learner> learners;
  std::vector<belief::Belief> teacher_beliefs;
  belief::Belief common_belief;
  belief::Belief joint_belief;
  int kc_index = 0;
  int period_count = 0;
  std::vector<std::set<int>> used_test_envs;  // per KC
  RandomStream demo_rng;
  curriculum::PolicyCache cf_cache;
};

SessionState make_session_state(const TeamComposition& comp, std::uint64_t seed,
                                const Config& config,
                                const curriculum::StudyAssets& assets);

// The belief a strategy samples counterfactuals from. Individual low/high use
// the teacher's per-member estimates ranked by p_bec against the full target
// set; ties keep the lowest member index. Not defined for the baseline.
belief::Belief& strategy_belief(SessionState& st,
                                const curriculum::StudyAssets& assets,
                                Strategy strat);

// One demos -> tests -> feedback cycle for the current KC.
PeriodTrace run_interaction_period(SessionState& st, Strategy strat,
                                   const curriculum::StudyAssets& assets,
                                   const Config& config);

SessionRecord run_session(Strategy strat, const TeamComposition& comp,
                          std::uint64_t seed, const Config& config,
                          const curriculum::StudyAssets& assets);

// Per-member p_bec of the learner self-beliefs against `targets`, and the
// team mean.
std::pair<std::vector<double>, double> knowledge_metrics(
    const SessionState& st, const bec::ConstraintSet& targets);

// The full strategy x composition x replicate grid. Deterministic in the
// master seed regardless of thread count; sessions run in parallel.
std::vector<SessionRecord> run_study(const Config& config, int parallel = 0);

std::string study_csv(const std::vector<SessionRecord>& records);
void write_study_outputs(const std::vector<SessionRecord>& records,
                         const std::string& out_dir);

}  // namespace teamteach::study
