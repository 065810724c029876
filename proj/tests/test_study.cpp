#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "oracles.hpp"
#include "teamteach/study.hpp"

namespace tt = teamteach;
using namespace tt::study;
using tt::Config;
using tt::Strategy;
using tt::TeamComposition;
using tt::Vec3;

namespace {

Config small_config() {
  Config cfg;
  cfg.pool.count = 24;
  cfg.n_particles = 200;
  cfg.region_samples = 30000;
  cfg.scoring_samples = 10000;
  cfg.replicates = 2;
  return cfg;
}

const tt::curriculum::StudyAssets& small_assets() {
  static const Config cfg = small_config();
  static const tt::curriculum::StudyAssets a(
      cfg.pool, cfg.ground_truth(), cfg.gamma, cfg.horizon, cfg.pool_seed,
      tt::derive_seed(cfg.master_seed, 0x5a3d1e), cfg.region_samples,
      cfg.scoring_samples);
  return a;
}

void concentrate_at(tt::belief::Belief& b, const Vec3& center) {
  for (auto& p : b.particles)
    p = tt::normalized(Vec3{center.x + 0.005 * b.rng.normal(),
                            center.y + 0.005 * b.rng.normal(),
                            center.z + 0.005 * b.rng.normal()});
}

}  // namespace

TEST_CASE("strategy_belief dispatch and ranking") {
  const Config cfg = small_config();
  const auto& assets = small_assets();
  SessionState st = make_session_state(TeamComposition::parse("NNP"), 5, cfg, assets);

  SUBCASE("common and joint return the team filters") {
    CHECK(&strategy_belief(st, assets, Strategy::Common) == &st.common_belief);
    CHECK(&strategy_belief(st, assets, Strategy::Joint) == &st.joint_belief);
  }
  SUBCASE("ties keep the lowest member index") {
    st.teacher_beliefs[1] = st.teacher_beliefs[0];
    st.teacher_beliefs[2] = st.teacher_beliefs[0];
    CHECK(&strategy_belief(st, assets, Strategy::IndividualLow) ==
          &st.teacher_beliefs[0]);
    CHECK(&strategy_belief(st, assets, Strategy::IndividualHigh) ==
          &st.teacher_beliefs[0]);
  }
  SUBCASE("ranking matches a direct recomputation") {
    concentrate_at(st.teacher_beliefs[2], assets.w_star.w);
    std::vector<double> scores;
    for (const auto& tb : st.teacher_beliefs)
      scores.push_back(tt::belief::p_bec(tb, assets.full_targets));
    const std::size_t lo =
        std::min_element(scores.begin(), scores.end()) - scores.begin();
    const std::size_t hi =
        std::max_element(scores.begin(), scores.end()) - scores.begin();
    CHECK(&strategy_belief(st, assets, Strategy::IndividualLow) ==
          &st.teacher_beliefs[lo]);
    CHECK(&strategy_belief(st, assets, Strategy::IndividualHigh) ==
          &st.teacher_beliefs[hi]);
    CHECK(hi == 2);
  }
  SUBCASE("baseline has no strategy belief") {
    CHECK_THROWS_AS(strategy_belief(st, assets, Strategy::Baseline),
                    std::invalid_argument);
  }
}

TEST_CASE("a team of perfect learners advances every period") {
  const Config cfg = small_config();
  const auto& assets = small_assets();
  SessionState st = make_session_state(TeamComposition::parse("PPP"), 6, cfg, assets);
  for (auto& l : st.learners) concentrate_at(l.self_belief, assets.w_star.w);

  while (st.kc_index < static_cast<int>(assets.kcs.size()) &&
         st.period_count < cfg.period_cap) {
    const PeriodTrace trace = run_interaction_period(st, Strategy::Joint, assets, cfg);
    CHECK(trace.advanced);
  }
  CHECK(st.period_count == static_cast<int>(assets.kcs.size()));
}

TEST_CASE("the period cap marks the session non-converged") {
  Config cfg = small_config();
  cfg.period_cap = 2;  // three KCs cannot fit
  const auto& assets = small_assets();
  const SessionRecord rec =
      run_session(Strategy::Common, TeamComposition::parse("NNN"), 7, cfg, assets);
  CHECK(rec.n_interactions == 2);
  CHECK(!rec.converged);
  CHECK(!rec.aborted);
}

TEST_CASE("interaction period follows the protocol") {
  const Config cfg = small_config();
  const auto& assets = small_assets();
  SessionState st = make_session_state(TeamComposition::parse("NNP"), 8, cfg, assets);
  const PeriodTrace trace = run_interaction_period(st, Strategy::Common, assets, cfg);

  CHECK(trace.period == 1);
  CHECK(trace.kc == 0);
  CHECK(trace.demo_envs.size() == cfg.n_demos);
  CHECK(trace.test_envs.size() == cfg.n_tests);
  for (int demo_env : trace.demo_envs)
    for (int test_env : trace.test_envs) CHECK(demo_env != test_env);
  CHECK(trace.correct.size() == 3);
  CHECK(trace.betas.size() == 3);
  CHECK(trace.learner_pbec.size() == 3);
  CHECK(trace.teacher_pbec.size() == 3);
  // feedback moved beta only for members who stayed on the same KC
  if (!trace.advanced)
    for (std::size_t i = 0; i < 3; ++i) CHECK(trace.betas[i] >= st.learners[i].beta0);
}

TEST_CASE("corrective feedback raises the failing member's p_bec") {
  const Config cfg = small_config();
  const auto& assets = small_assets();
  int observed = 0, increased = 0;
  for (std::uint64_t seed = 0; seed < 30 && observed < 12; ++seed) {
    SessionState st =
        make_session_state(TeamComposition::parse("NNP"), 1000 + seed, cfg, assets);
    // track p_bec against the first test's discriminating set around a period
    const auto tests = tt::curriculum::select_tests(assets, 0, {}, {}, 1);
    const auto& t = tests[0];
    std::vector<double> before;
    for (auto& l : st.learners)
      before.push_back(tt::belief::p_bec(l.self_belief, t.discriminating));
    const PeriodTrace trace = run_interaction_period(st, Strategy::Joint, assets, cfg);
    if (trace.test_envs[0] != t.pool_index) continue;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!trace.correct[i][0]) {
        ++observed;
        if (tt::belief::p_bec(st.learners[i].self_belief, t.discriminating) >
            before[i])
          ++increased;
      }
    }
  }
  REQUIRE(observed > 0);
  CHECK(increased >= observed * 3 / 4);
}

TEST_CASE("baseline sums the solo sessions") {
  Config cfg = small_config();
  const auto& assets = small_assets();
  const SessionRecord rec =
      run_session(Strategy::Baseline, TeamComposition::parse("NNP"), 9, cfg, assets);
  REQUIRE(rec.solo_sessions.size() == 3);
  int total = 0;
  for (const auto& solo : rec.solo_sessions) total += solo.n_interactions;
  CHECK(rec.n_interactions == total);
  CHECK(rec.per_member_knowledge.size() == 3);
  const double mean =
      std::accumulate(rec.per_member_knowledge.begin(),
                      rec.per_member_knowledge.end(), 0.0) /
      3.0;
  CHECK(rec.team_knowledge == doctest::Approx(mean));
}

TEST_CASE("proficient teams learn at least as fast on average") {
  Config cfg = small_config();
  const auto& assets = small_assets();
  double nnn = 0, ppp = 0;
  const int reps = 15;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t seed = tt::derive_seed(4242, r);
    nnn += run_session(Strategy::Joint, TeamComposition::parse("NNN"), seed, cfg, assets)
               .n_interactions;
    ppp += run_session(Strategy::Joint, TeamComposition::parse("PPP"), seed, cfg, assets)
               .n_interactions;
  }
  CHECK(ppp <= nnn);
}

TEST_CASE("knowledge metrics") {
  const Config cfg = small_config();
  const auto& assets = small_assets();

  SUBCASE("single member team equals the member value") {
    TeamComposition solo;
    solo.members = {tt::learner::LearnerKind::Proficient};
    SessionState st = make_session_state(solo, 10, cfg, assets);
    const auto [per_member, team] = knowledge_metrics(st, assets.full_targets);
    REQUIRE(per_member.size() == 1);
    CHECK(team == doctest::Approx(per_member[0]));
  }
  SUBCASE("matches independent recomputation from the serialized snapshot") {
    SessionState st = make_session_state(TeamComposition::parse("NNP"), 11, cfg, assets);
    run_interaction_period(st, Strategy::Common, assets, cfg);
    const auto [per_member, team] = knowledge_metrics(st, assets.full_targets);
    for (std::size_t i = 0; i < st.learners.size(); ++i) {
      const double oracle = oracles::p_bec_from_json(
          tt::belief::belief_to_json(st.learners[i].self_belief),
          assets.full_targets);
      CHECK(per_member[i] == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(per_member[i] >= 0.0);
      CHECK(per_member[i] <= 1.0);
    }
  }
}

TEST_CASE("run_study emits the full grid deterministically") {
  Config cfg = small_config();
  cfg.strategies = {Strategy::Baseline, Strategy::Joint};
  cfg.compositions = {TeamComposition::parse("NNP"), TeamComposition::parse("PPP")};
  cfg.replicates = 2;

  const auto records = run_study(cfg, 2);
  REQUIRE(records.size() == 8);
  for (const auto& r : records) {
    CHECK(r.n_interactions >= 1);
    CHECK(r.team_knowledge >= 0.0);
    CHECK(r.team_knowledge <= 1.0);
    CHECK(!r.aborted);
  }
  const std::string csv = study_csv(records);
  CHECK(csv.find("strategy,composition,replicate,n_interactions,team_knowledge,"
                 "member_knowledge_1,member_knowledge_2,member_knowledge_3,"
                 "mean_demo_area,converged") == 0);

  const auto again = run_study(cfg, 1);  // different thread count
  CHECK(study_csv(again) == csv);
}

TEST_CASE("session records round-trip core fields through JSON") {
  Config cfg = small_config();
  const auto& assets = small_assets();
  const SessionRecord rec =
      run_session(Strategy::Joint, TeamComposition::parse("NPP"), 12, cfg, assets);
  const std::string text = rec.to_json();
  for (const char* field :
       {"\"strategy\"", "\"composition\"", "\"n_interactions\"",
        "\"per_member_knowledge\"", "\"team_knowledge\"", "\"periods\"",
        "\"demo_area\"", "\"betas\"", "\"advanced\""})
    CHECK(text.find(field) != std::string::npos);
  CHECK(rec.id() == "joint_NPP_00");
}
