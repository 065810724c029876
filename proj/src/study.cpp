#include "teamteach/study.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace teamteach::study {

using nlohmann::json;

namespace {

// stream tags for per-session substreams
constexpr std::uint64_t kLearnerTag = 100;
constexpr std::uint64_t kTeacherTag = 200;
constexpr std::uint64_t kCommonTag = 300;
constexpr std::uint64_t kJointTag = 301;
constexpr std::uint64_t kDemoTag = 400;
constexpr std::uint64_t kPriorTag = 500;
constexpr std::uint64_t kSoloTag = 700;

belief::UpdateOptions teacher_opts(const Config& config) {
  return belief::UpdateOptions{.eta = config.eta, .allow_resample = true};
}

BeliefSnapshots take_snapshots(const SessionState& st) {
  BeliefSnapshots snap;
  for (const auto& l : st.learners)
    snap.learners.push_back(belief::belief_to_json(l.self_belief));
  for (const auto& b : st.teacher_beliefs)
    snap.teachers.push_back(belief::belief_to_json(b));
  snap.common = belief::belief_to_json(st.common_belief);
  snap.joint = belief::belief_to_json(st.joint_belief);
  return snap;
}

}  // namespace

SessionState make_session_state(const TeamComposition& comp, std::uint64_t seed,
                                const Config& config,
                                const curriculum::StudyAssets& assets) {
  SessionState st;
  const std::size_t m = comp.members.size();
  // Every filter in the session starts from one realization of the shared
  // prior: the teacher's initial estimate of a learner IS that learner's
  // initial self-belief. Each filter keeps its own noise stream afterwards.
  const belief::Belief prior_cloud = belief::init_uniform_with_prior(
      config.n_particles, derive_seed(seed, kPriorTag));
  auto with_stream = [&](std::uint64_t tag) {
    belief::Belief b = prior_cloud;
    b.rng = RandomStream(derive_seed(seed, tag));
    return b;
  };
  for (std::size_t i = 0; i < m; ++i) {
    learner::Learner l = learner::make_learner(
        config.profile(comp.members[i]), config.n_particles,
        derive_seed(seed, kLearnerTag + i));
    l.self_belief = with_stream(kLearnerTag + 50 + i);
    l.kappa = config.kappa;
    l.eta = config.eta;
    l.deterministic_increments = config.deterministic_increments;
    st.learners.push_back(std::move(l));
    st.teacher_beliefs.push_back(with_stream(kTeacherTag + i));
  }
  st.common_belief = with_stream(kCommonTag);
  st.joint_belief = with_stream(kJointTag);
  st.kc_index = 0;
  st.period_count = 0;
  st.used_test_envs.assign(assets.kcs.size(), {});
  st.demo_rng = RandomStream(derive_seed(seed, kDemoTag));
  return st;
}

belief::Belief& strategy_belief(SessionState& st,
                                const curriculum::StudyAssets& assets,
                                Strategy strat) {
  switch (strat) {
    case Strategy::Common:
      return st.common_belief;
    case Strategy::Joint:
      return st.joint_belief;
    case Strategy::IndividualLow:
    case Strategy::IndividualHigh: {
      std::size_t pick = 0;
      double pick_pbec =
          belief::p_bec(st.teacher_beliefs[0], assets.full_targets);
      for (std::size_t i = 1; i < st.teacher_beliefs.size(); ++i) {
        const double v = belief::p_bec(st.teacher_beliefs[i], assets.full_targets);
        const bool better = strat == Strategy::IndividualLow ? v < pick_pbec
                                                             : v > pick_pbec;
        if (better) {  // strict: ties keep the lowest member index
          pick = i;
          pick_pbec = v;
        }
      }
      return st.teacher_beliefs[pick];
    }
    case Strategy::Baseline:
      break;
  }
  throw std::invalid_argument("baseline has no strategy belief");
}

std::pair<std::vector<double>, double> knowledge_metrics(
    const SessionState& st, const bec::ConstraintSet& targets) {
  std::vector<double> per_member;
  per_member.reserve(st.learners.size());
  double total = 0.0;
  for (const auto& l : st.learners) {
    per_member.push_back(belief::p_bec(l.self_belief, targets));
    total += per_member.back();
  }
  const double team =
      st.learners.empty() ? 0.0 : total / static_cast<double>(st.learners.size());
  return {per_member, team};
}

PeriodTrace run_interaction_period(SessionState& st, Strategy strat,
                                   const curriculum::StudyAssets& assets,
                                   const Config& config) {
  if (st.kc_index >= static_cast<int>(assets.kcs.size()))
    throw std::logic_error("session already completed all knowledge components");

  PeriodTrace trace;
  trace.kc = st.kc_index;
  const curriculum::KnowledgeComponent& kc = assets.kcs[st.kc_index];
  const belief::LikelihoodParams teacher_lp{config.teacher_mass, config.kappa};

  // 1. demos from the strategy-selected belief's counterfactuals
  belief::Belief& sampling_belief =
      strat == Strategy::Baseline
          ? st.teacher_beliefs[0]  // solo sessions sample the lone member
          : strategy_belief(st, assets, strat);
  const curriculum::DemoPlan plan = curriculum::select_demos(
      assets, st.cf_cache, kc, sampling_belief, teacher_lp, config.n_demos,
      config.n_cf, st.demo_rng);
  trace.demo_envs = plan.env_indices;
  trace.demo_area = plan.area;
  trace.demo_gain = plan.gain;

  // 2. everyone sees the same demos; the teacher books the expected gain
  //    once per belief, team beliefs included
  for (auto& l : st.learners) learner::observe_demos(l, plan.conveyed);
  if (!plan.conveyed.empty()) {
    for (auto& tb : st.teacher_beliefs)
      belief::update(tb, plan.conveyed, teacher_lp, teacher_opts(config));
    belief::update(st.common_belief, plan.conveyed, teacher_lp, teacher_opts(config));
    belief::update(st.joint_belief, plan.conveyed, teacher_lp, teacher_opts(config));
  }

  // 3. tests for the current KC, never reusing this period's demo envs
  const std::set<int> demo_envs(plan.env_indices.begin(), plan.env_indices.end());
  const std::vector<curriculum::TestEnv> tests = curriculum::select_tests(
      assets, st.kc_index, demo_envs, st.used_test_envs[st.kc_index],
      config.n_tests);
  for (const auto& t : tests) {
    trace.test_envs.push_back(t.pool_index);
    st.used_test_envs[st.kc_index].insert(t.pool_index);
  }

  // 4. responses; the teacher reads each response as evidence about that
  //    member (correct -> the discriminating set, incorrect -> the constraint
  //    the response itself supports)
  const std::size_t m = st.learners.size();
  std::vector<std::vector<learner::TestResponse>> responses(m);
  team::TeamEvidence evidence;
  evidence.per_member.resize(m);
  trace.correct.assign(m, {});
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& t : tests) {
      learner::TestResponse r = learner::respond_to_test(st.learners[i], t);
      trace.correct[i].push_back(r.correct);
      if (r.correct) {
        for (const auto& c : t.discriminating.constraints)
          evidence.per_member[i].add(
              bec::HalfSpaceConstraint{c.normal, bec::ConstraintSource::TestResponse});
      } else {
        const auto revealed = bec::constraints_from_pair(
            r.trajectory, t.optimal, bec::ConstraintSource::TestResponse);
        if (revealed) evidence.per_member[i].add(*revealed);
      }
      responses[i].push_back(std::move(r));
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (!evidence.per_member[i].empty())
      belief::update(st.teacher_beliefs[i], evidence.per_member[i], teacher_lp,
                     teacher_opts(config));
    belief::perturb(st.teacher_beliefs[i], config.nu);
  }
  const team::ConflictResolution resolved =
      team::resolve_conflicts(evidence, assets.region_sample);
  trace.conflict_dropped = resolved.dropped;
  team::common_update(st.common_belief, resolved.evidence, teacher_lp,
                      assets.region_sample, teacher_opts(config));
  team::joint_update(st.joint_belief, evidence, teacher_lp, teacher_opts(config));
  belief::perturb(st.common_belief, config.nu);
  belief::perturb(st.joint_belief, config.nu);

  // 5. feedback
  bool all_correct = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const auto kind = responses[i][t].correct
                            ? learner::FeedbackKind::Confirmatory
                            : learner::FeedbackKind::Corrective;
      learner::receive_feedback(st.learners[i], tests[t], responses[i][t], kind);
      all_correct = all_correct && responses[i][t].correct;
    }
  }

  // 6. bookkeeping and KC advancement
  st.period_count += 1;
  trace.period = st.period_count;
  trace.advanced = all_correct;
  if (all_correct) {
    st.kc_index += 1;
    for (auto& l : st.learners) learner::reset_beta_for_new_kc(l);
  }

  for (const auto& l : st.learners) {
    trace.betas.push_back(l.beta);
    trace.learner_pbec.push_back(belief::p_bec(l.self_belief, assets.full_targets));
  }
  for (const auto& tb : st.teacher_beliefs)
    trace.teacher_pbec.push_back(belief::p_bec(tb, assets.full_targets));
  trace.common_pbec = belief::p_bec(st.common_belief, assets.full_targets);
  trace.joint_pbec = belief::p_bec(st.joint_belief, assets.full_targets);
  if (config.snapshots == SnapshotCadence::Period)
    trace.snapshots.push_back(take_snapshots(st));
  return trace;
}

namespace {

SessionRecord run_group_session(Strategy strat, const TeamComposition& comp,
                                std::uint64_t seed, const Config& config,
                                const curriculum::StudyAssets& assets) {
  SessionRecord rec;
  rec.strategy = strat;
  rec.composition = comp.name();
  rec.seed = seed;
  SessionState st = make_session_state(comp, seed, config, assets);
  try {
    while (st.kc_index < static_cast<int>(assets.kcs.size()) &&
           st.period_count < config.period_cap) {
      rec.periods.push_back(run_interaction_period(st, strat, assets, config));
    }
  } catch (const curriculum::CurriculumExhausted& e) {
    rec.aborted = true;
    rec.abort_reason = e.what();
  }
  rec.n_interactions = st.period_count;
  rec.converged =
      !rec.aborted && st.kc_index == static_cast<int>(assets.kcs.size());
  auto [per_member, team] = knowledge_metrics(st, assets.full_targets);
  rec.per_member_knowledge = std::move(per_member);
  rec.team_knowledge = team;
  if (!rec.periods.empty()) {
    double area = 0.0;
    for (const auto& p : rec.periods) area += p.demo_area;
    rec.mean_demo_area = area / static_cast<double>(rec.periods.size());
  }
  if (config.snapshots == SnapshotCadence::Final && !rec.periods.empty())
    rec.periods.back().snapshots.push_back(take_snapshots(st));
  return rec;
}

}  // namespace

SessionRecord run_session(Strategy strat, const TeamComposition& comp,
                          std::uint64_t seed, const Config& config,
                          const curriculum::StudyAssets& assets) {
  if (strat != Strategy::Baseline)
    return run_group_session(strat, comp, seed, config, assets);

  // Baseline: each member taught alone, interaction counts summed.
  SessionRecord rec;
  rec.strategy = strat;
  rec.composition = comp.name();
  rec.seed = seed;
  rec.n_interactions = 0;
  rec.converged = true;
  double area_sum = 0.0;
  std::size_t area_periods = 0;
  for (std::size_t i = 0; i < comp.members.size(); ++i) {
    TeamComposition solo;
    solo.members = {comp.members[i]};
    SessionRecord sub = run_group_session(Strategy::IndividualLow, solo,
                                          derive_seed(seed, kSoloTag + i),
                                          config, assets);
    rec.n_interactions += sub.n_interactions;
    rec.per_member_knowledge.push_back(sub.per_member_knowledge.empty()
                                           ? 0.0
                                           : sub.per_member_knowledge[0]);
    rec.converged = rec.converged && sub.converged;
    rec.aborted = rec.aborted || sub.aborted;
    if (sub.aborted && rec.abort_reason.empty()) rec.abort_reason = sub.abort_reason;
    for (const auto& p : sub.periods) {
      area_sum += p.demo_area;
      ++area_periods;
    }
    rec.solo_sessions.push_back(std::move(sub));
  }
  rec.team_knowledge =
      rec.per_member_knowledge.empty()
          ? 0.0
          : std::accumulate(rec.per_member_knowledge.begin(),
                            rec.per_member_knowledge.end(), 0.0) /
                static_cast<double>(rec.per_member_knowledge.size());
  if (area_periods > 0)
    rec.mean_demo_area = area_sum / static_cast<double>(area_periods);
  return rec;
}

namespace {

}  // namespace

std::vector<SessionRecord> run_study(const Config& config, int parallel) {
  const curriculum::StudyAssets assets(
      config.pool, config.ground_truth(), config.gamma, config.horizon,
      config.pool_seed, derive_seed(config.master_seed, 0x5a3d1e),
      config.region_samples, config.scoring_samples);

  struct Cell {
    Strategy strategy;
    TeamComposition comp;
    int replicate;
    std::uint64_t seed;
  };
  // Only the replicate index feeds the session seed: replicate r faces the
  // same session randomness in every cell, so strategy and composition
  // contrasts are paired comparisons rather than comparisons across
  // independent noise. Adding or removing a cell never perturbs any other
  // cell's stream.
  std::vector<Cell> grid;
  for (Strategy s : config.strategies)
    for (const TeamComposition& c : config.compositions)
      for (int r = 0; r < config.replicates; ++r)
        grid.push_back(Cell{s, c, r,
                            derive_seed(config.master_seed,
                                        static_cast<std::uint64_t>(r))});

  std::vector<SessionRecord> records(grid.size());
#ifdef _OPENMP
  if (parallel > 0) omp_set_num_threads(parallel);
#else
  (void)parallel;
#endif
  const std::int64_t n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const Cell& cell = grid[i];
    try {
      records[i] = run_session(cell.strategy, cell.comp, cell.seed, config, assets);
    } catch (const std::exception& e) {
      SessionRecord rec;
      rec.strategy = cell.strategy;
      rec.composition = cell.comp.name();
      rec.seed = cell.seed;
      rec.aborted = true;
      rec.abort_reason = e.what();
      records[i] = std::move(rec);
#pragma omp critical
      std::cerr << "[study] session " << to_string(cell.strategy) << "/"
                << cell.comp.name() << "/" << cell.replicate
                << " aborted: " << e.what() << "\n";
    }
    records[i].replicate = cell.replicate;
  }
  return records;
}

std::string SessionRecord::id() const {
  std::ostringstream ss;
  ss << to_string(strategy) << "_" << composition << "_";
  if (replicate < 10) ss << '0';
  ss << replicate;
  return ss.str();
}

namespace {

json trace_to_json(const PeriodTrace& p) {
  json j;
  j["period"] = p.period;
  j["kc"] = p.kc;
  j["demo_envs"] = p.demo_envs;
  j["demo_area"] = p.demo_area;
  j["demo_gain"] = p.demo_gain;
  j["test_envs"] = p.test_envs;
  json correct = json::array();
  for (const auto& member : p.correct) {
    json row = json::array();
    for (bool b : member) row.push_back(b);
    correct.push_back(row);
  }
  j["correct"] = correct;
  j["betas"] = p.betas;
  j["learner_pbec"] = p.learner_pbec;
  j["teacher_pbec"] = p.teacher_pbec;
  j["common_pbec"] = p.common_pbec;
  j["joint_pbec"] = p.joint_pbec;
  j["conflict_dropped"] = p.conflict_dropped;
  j["advanced"] = p.advanced;
  if (!p.snapshots.empty()) {
    const BeliefSnapshots& s = p.snapshots.front();
    json snap;
    json learners = json::array();
    for (const auto& b : s.learners) learners.push_back(json::parse(b));
    json teachers = json::array();
    for (const auto& b : s.teachers) teachers.push_back(json::parse(b));
    snap["learners"] = learners;
    snap["teachers"] = teachers;
    snap["common"] = json::parse(s.common);
    snap["joint"] = json::parse(s.joint);
    j["beliefs"] = snap;
  }
  return j;
}

json record_to_json(const SessionRecord& r) {
  json j;
  j["strategy"] = to_string(r.strategy);
  j["composition"] = r.composition;
  j["replicate"] = r.replicate;
  j["seed"] = r.seed;
  j["n_interactions"] = r.n_interactions;
  j["per_member_knowledge"] = r.per_member_knowledge;
  j["team_knowledge"] = r.team_knowledge;
  j["mean_demo_area"] = r.mean_demo_area;
  j["converged"] = r.converged;
  j["aborted"] = r.aborted;
  if (r.aborted) j["abort_reason"] = r.abort_reason;
  json periods = json::array();
  for (const auto& p : r.periods) periods.push_back(trace_to_json(p));
  j["periods"] = periods;
  if (!r.solo_sessions.empty()) {
    json solos = json::array();
    for (const auto& s : r.solo_sessions) solos.push_back(json::parse(s.to_json()));
    j["solo_sessions"] = solos;
  }
  return j;
}

void append_float(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

}  // namespace

std::string SessionRecord::to_json() const { return record_to_json(*this).dump(); }

std::string study_csv(const std::vector<SessionRecord>& records) {
  std::string out =
      "strategy,composition,replicate,n_interactions,team_knowledge,"
      "member_knowledge_1,member_knowledge_2,member_knowledge_3,"
      "mean_demo_area,converged\n";
  for (const auto& r : records) {
    out += to_string(r.strategy);
    out += ',';
    out += r.composition;
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += std::to_string(r.n_interactions);
    out += ',';
    append_float(out, r.team_knowledge);
    for (std::size_t i = 0; i < 3; ++i) {
      out += ',';
      append_float(out,
                   i < r.per_member_knowledge.size() ? r.per_member_knowledge[i] : 0.0);
    }
    out += ',';
    append_float(out, r.mean_demo_area);
    out += ',';
    out += r.converged ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_study_outputs(const std::vector<SessionRecord>& records,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "sessions");
  {
    std::ofstream csv(fs::path(out_dir) / "study.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write study.csv in " + out_dir);
    csv << study_csv(records);
  }
  for (const auto& r : records) {
    const fs::path path = fs::path(out_dir) / "sessions" / (r.id() + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << r.to_json();
  }
}

}  // namespace teamteach::study
