#include "teamteach/curriculum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "teamteach/parallel.hpp"

namespace teamteach::curriculum {

using mdp::Cell;
using mdp::GridEnvironment;
using mdp::Policy;
using mdp::Trajectory;
using mdp::WeightVector;

std::vector<GridEnvironment> make_env_pool(const EnvPoolParams& params,
                                           double gamma, int horizon,
                                           std::uint64_t seed) {
  std::vector<GridEnvironment> pool;
  pool.reserve(params.count);
  RandomStream rng(derive_seed(seed, 0xe471));
  while (static_cast<int>(pool.size()) < params.count) {
    GridEnvironment env;
    env.gamma = gamma;
    env.horizon = horizon;
    const int span = params.max_size - params.min_size + 1;
    env.width = params.min_size + static_cast<int>(rng.integer(span));
    env.height = params.min_size + static_cast<int>(rng.integer(span));
    auto random_cell = [&] {
      return Cell{static_cast<int>(rng.integer(env.width)),
                  static_cast<int>(rng.integer(env.height))};
    };
    // long tasks discriminate: keep start and goal well apart
    env.start = random_cell();
    do {
      env.goal = random_cell();
    } while (std::abs(env.goal.x - env.start.x) +
                 std::abs(env.goal.y - env.start.y) <
             4);

    const double density =
        params.max_rubble_density * (0.2 + 0.8 * rng.uniform());
    for (int y = 0; y < env.height; ++y)
      for (int x = 0; x < env.width; ++x)
        if (rng.uniform() < density) env.rubble.insert(Cell{x, y});

    if (rng.uniform() < params.charger_fraction) {
      Cell c = random_cell();
      if (c != env.start && c != env.goal) env.charger = c;
    }
    env.validate();
    pool.push_back(std::move(env));
  }
  return pool;
}

const Policy& PolicyCache::policy(const std::vector<GridEnvironment>& pool,
                                  int env_index, const WeightVector& w) {
  const Key key{env_index, std::bit_cast<std::uint64_t>(w.w.x),
                std::bit_cast<std::uint64_t>(w.w.y),
                std::bit_cast<std::uint64_t>(w.w.z)};
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(key, mdp::solve_policy(pool[env_index], w)).first;
  return it->second;
}

namespace {

// A canonical environment pair: the ground-truth demo contrasted with the
// rollout of a probe weight chosen to flip the facet under test.
struct FacetPair {
  GridEnvironment env;
  WeightVector probe;
};

bec::HalfSpaceConstraint facet_constraint(const FacetPair& fp,
                                          const WeightVector& w_star,
                                          const std::string& kc_name) {
  const Policy star = mdp::solve_policy(fp.env, w_star);
  const Policy probe = mdp::solve_policy(fp.env, fp.probe);
  const Trajectory demo = mdp::rollout(fp.env, star);
  const Trajectory alt = mdp::rollout(fp.env, probe);
  const auto c = bec::constraints_from_pair(demo, alt, bec::ConstraintSource::Demo);
  if (!c)
    throw CurriculumError("knowledge component '" + kc_name +
                          "' is vacuous for the configured ground-truth weights");
  if (dot(c->normal, w_star.w) < -1e-9)
    throw CurriculumError("knowledge component '" + kc_name +
                          "' produced a constraint violating the ground truth");
  return *c;
}

GridEnvironment base_env(int width, int height, Cell start, Cell goal,
                         double gamma, int horizon) {
  GridEnvironment env;
  env.width = width;
  env.height = height;
  env.start = start;
  env.goal = goal;
  env.gamma = gamma;
  env.horizon = horizon;
  return env;
}

}  // namespace

std::vector<KnowledgeComponent> default_kcs(const WeightVector& w_star,
                                            double gamma, int horizon) {
  std::vector<KnowledgeComponent> kcs;

  // KC1: bounds on the rubble cost relative to the step cost. One pair where
  // a two-step detour beats crossing rubble, one where a six-step detour
  // does not.
  {
    FacetPair avoid{base_env(3, 2, {0, 0}, {2, 0}, gamma, horizon),
                    WeightVector(-0.3, 0.0, -1.0)};
    avoid.env.rubble = {Cell{1, 0}};
    FacetPair cross{base_env(3, 4, {0, 0}, {2, 0}, gamma, horizon),
                    WeightVector(-7.0, 0.0, -1.0)};
    cross.env.rubble = {Cell{1, 0}, Cell{1, 1}, Cell{1, 2}};
    KnowledgeComponent kc;
    kc.id = 0;
    kc.description = "rubble cost vs step cost";
    kc.target_constraints.add(facet_constraint(avoid, w_star, kc.description));
    kc.target_constraints.add(facet_constraint(cross, w_star, kc.description));
    kcs.push_back(std::move(kc));
  }

  // KC2: bounds on the recharge reward relative to the step cost. A two-step
  // detour to the charger is worth it; an eight-step detour is not.
  {
    FacetPair take{base_env(3, 2, {0, 0}, {2, 0}, gamma, horizon),
                   WeightVector(0.0, 0.05, -1.0)};
    take.env.charger = Cell{1, 1};
    FacetPair skip{base_env(5, 5, {0, 0}, {4, 0}, gamma, horizon),
                   WeightVector(0.0, 1.0, -0.1)};
    skip.env.charger = Cell{0, 4};
    KnowledgeComponent kc;
    kc.id = 1;
    kc.description = "recharge reward vs step cost";
    kc.target_constraints.add(facet_constraint(take, w_star, kc.description));
    kc.target_constraints.add(facet_constraint(skip, w_star, kc.description));
    kcs.push_back(std::move(kc));
  }

  // KC3: rubble vs battery trade-offs. Crossing rubble on the direct path is
  // worth a recharge; paying rubble plus extra steps for one is not.
  {
    FacetPair worth{base_env(3, 2, {0, 0}, {2, 0}, gamma, horizon),
                    WeightVector(-1.0, 0.05, -0.1)};
    worth.env.charger = Cell{1, 0};
    worth.env.rubble = {Cell{1, 0}};
    FacetPair not_worth{base_env(3, 2, {0, 0}, {2, 0}, gamma, horizon),
                        WeightVector(-0.1, 1.0, -0.1)};
    not_worth.env.charger = Cell{1, 1};
    not_worth.env.rubble = {Cell{1, 1}};
    KnowledgeComponent kc;
    kc.id = 2;
    kc.description = "rubble cost vs recharge reward";
    kc.target_constraints.add(facet_constraint(worth, w_star, kc.description));
    kc.target_constraints.add(facet_constraint(not_worth, w_star, kc.description));
    kcs.push_back(std::move(kc));
  }

  return kcs;
}

namespace {

// Second-best-first trajectory: take the runner-up action at the start, then
// follow the optimal policy.
std::optional<Trajectory> second_best_trajectory(const GridEnvironment& env,
                                                 const Policy& pol) {
  const mdp::State start = mdp::initial_state(env);
  const auto second = mdp::second_best_action(pol, start);
  if (!second) return std::nullopt;
  Trajectory alt;
  const mdp::State nx = mdp::step(env, start, *second);
  alt.steps.push_back(mdp::Transition{start, *second, nx});
  const mdp::FeatureVector f = mdp::transition_features(env, start, nx);
  alt.features.rubble += f.rubble;
  alt.features.recharge += f.recharge;
  alt.features.steps += f.steps;
  const Trajectory tail = mdp::rollout(env, pol, nx);
  double discount = env.gamma;
  for (const auto& tr : tail.steps) {
    alt.steps.push_back(tr);
    const mdp::FeatureVector g = mdp::transition_features(env, tr.state, tr.next);
    alt.features.rubble += discount * g.rubble;
    alt.features.recharge += discount * g.recharge;
    alt.features.steps += discount * g.steps;
    discount *= env.gamma;
  }
  return alt;
}

}  // namespace

StudyAssets::StudyAssets(const EnvPoolParams& pool_params,
                         const WeightVector& w, double gamma, int horizon,
                         std::uint64_t pool_seed, std::uint64_t sample_seed,
                         std::size_t region_samples, std::size_t scoring_samples)
    : w_star(w),
      region_sample(region_samples, derive_seed(sample_seed, 0xa3ea)),
      scoring_sample(scoring_samples, derive_seed(sample_seed, 0x5c03)) {
  kcs = default_kcs(w_star, gamma, horizon);
  bec::ConstraintSet all;
  for (const KnowledgeComponent& kc : kcs) all.extend(kc.target_constraints);
  full_targets = bec::minimize(all, region_sample);
  prior.add(bec::HalfSpaceConstraint{Vec3{0.0, 0.0, -1.0},
                                     bec::ConstraintSource::Demo});

  // Generate a larger raw batch, then screen it down: each KC reserves the
  // environments whose demo BEC is tight around the band taught so far
  // (discriminating tests), and the rest fill out demo variety.
  EnvPoolParams raw_params = pool_params;
  raw_params.count = pool_params.count * 6;
  std::vector<GridEnvironment> raw =
      make_env_pool(raw_params, gamma, horizon, pool_seed);
  std::vector<mdp::Policy> raw_policies(raw.size());
  std::vector<Trajectory> raw_demos(raw.size());
  std::vector<bec::ConstraintSet> raw_bec(raw.size());
  std::vector<double> raw_area(raw.size(), 1.0);
  const std::int64_t n_raw = static_cast<std::int64_t>(raw.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t e = 0; e < n_raw; ++e) {
    raw_policies[e] = mdp::solve_policy(raw[e], w_star);
    raw_demos[e] = mdp::rollout(raw[e], raw_policies[e]);
    raw_bec[e] = bec::minimize(
        bec::constraints_from_demo(raw[e], raw_demos[e], raw_policies[e]),
        scoring_sample);
    raw_area[e] = bec::spherical_area(raw_bec[e], scoring_sample).fraction;
  }

  std::vector<bool> taken(raw.size(), false);
  std::vector<std::size_t> chosen;
  const std::size_t reserve_per_kc =
      std::max<std::size_t>(4, pool_params.count / 8);
  for (std::size_t k = 0; k < kcs.size(); ++k) {
    bec::ConstraintSet cumulative = prior;
    for (std::size_t j = 0; j <= k; ++j)
      cumulative.extend(kcs[j].target_constraints);
    std::vector<std::pair<double, std::size_t>> ready;
    for (std::size_t e = 0; e < raw.size(); ++e) {
      if (taken[e] || raw_bec[e].empty()) continue;
      if (bec::implication_fraction(cumulative, raw_bec[e], scoring_sample) >= 0.98)
        ready.emplace_back(raw_area[e], e);
    }
    std::sort(ready.begin(), ready.end());
    for (std::size_t i = 0; i < std::min(reserve_per_kc, ready.size()); ++i) {
      taken[ready[i].second] = true;
      chosen.push_back(ready[i].second);
    }
  }
  for (std::size_t e = 0;
       e < raw.size() && chosen.size() < static_cast<std::size_t>(pool_params.count);
       ++e) {
    if (!taken[e]) {
      taken[e] = true;
      chosen.push_back(e);
    }
  }
  std::sort(chosen.begin(), chosen.end());  // keep generation order

  pool.reserve(chosen.size());
  star_policies.reserve(chosen.size());
  star_demos.reserve(chosen.size());
  star_bec.reserve(chosen.size());
  for (std::size_t e : chosen) {
    pool.push_back(std::move(raw[e]));
    star_policies.push_back(std::move(raw_policies[e]));
    star_demos.push_back(std::move(raw_demos[e]));
    star_bec.push_back(std::move(raw_bec[e]));
  }

  // score every pool environment as a test for every KC, once
  test_candidates.resize(kcs.size());
  for (std::size_t k = 0; k < kcs.size(); ++k) {
    bec::ConstraintSet cumulative = prior;
    for (std::size_t j = 0; j <= k; ++j)
      cumulative.extend(kcs[j].target_constraints);
    bec::ConstraintSet preceding = prior;
    for (std::size_t j = 0; j < k; ++j)
      preceding.extend(kcs[j].target_constraints);

    for (std::size_t e = 0; e < pool.size(); ++e) {
      const auto alt = second_best_trajectory(pool[e], star_policies[e]);
      if (!alt) continue;
      const auto d2 = bec::constraints_from_pair(
          star_demos[e], *alt, bec::ConstraintSource::TestResponse);
      if (!d2) continue;
      TestCandidate tc;
      tc.test.pool_index = static_cast<int>(e);
      tc.test.env = pool[e];
      tc.test.optimal = star_demos[e];
      tc.test.discriminating.add(*d2);
      const double cum_implies = bec::implication_fraction(
          cumulative, tc.test.discriminating, scoring_sample);
      const double prev_implies = bec::implication_fraction(
          preceding, tc.test.discriminating, scoring_sample);
      tc.examines_kc = cum_implies >= 0.99 && prev_implies <= 0.95;
      tc.readiness =
          bec::implication_fraction(cumulative, star_bec[e], scoring_sample);
      tc.bec_area = bec::spherical_area(star_bec[e], scoring_sample).fraction;
      test_candidates[k].push_back(std::move(tc));
    }
    // Hard but fair first: a ready test (its BEC holds throughout the taught
    // band) whose BEC region is tight separates learners who hold the KC from
    // those who do not.
    std::sort(test_candidates[k].begin(), test_candidates[k].end(),
              [](const TestCandidate& a, const TestCandidate& b) {
                const bool a_ready = a.readiness >= 0.98;
                const bool b_ready = b.readiness >= 0.98;
                if (a_ready != b_ready) return a_ready;
                if (a.bec_area != b.bec_area) return a.bec_area < b.bec_area;
                if (a.examines_kc != b.examines_kc) return a.examines_kc;
                if (a.readiness != b.readiness) return a.readiness > b.readiness;
                return a.test.pool_index < b.test.pool_index;
              });
  }
}

std::vector<WeightVector> sample_counterfactual_weights(
    const belief::Belief& b, std::size_t n_cf, RandomStream& rng) {
  if (n_cf < 1) throw std::invalid_argument("need at least one counterfactual");
  std::vector<WeightVector> out;
  out.reserve(n_cf);
  std::vector<double> weights = b.weights;
  std::vector<std::size_t> alive(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) alive[i] = i;

  while (out.size() < n_cf) {
    if (alive.empty()) {
      // distinct particles exhausted: fall back to with-replacement
      out.push_back(belief::sample_weight(b, rng));
      continue;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < alive.size(); ++k) total += weights[k];
    std::size_t pick = alive.size() - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t k = 0; k < alive.size(); ++k) {
        u -= weights[k];
        if (u < 0.0) {
          pick = k;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.integer(alive.size()));
    }
    out.push_back(WeightVector(b.particles[alive[pick]]));
    alive.erase(alive.begin() + pick);
    weights.erase(weights.begin() + pick);
  }
  return out;
}

namespace {

// Noise floor of the counterfactual comparison: the normalized constraint
// must hold at the ground truth by at least this cosine margin.
constexpr double kCounterfactualMargin = 0.05;

struct Candidate {
  int env_index = -1;
  bec::ConstraintSet conveyed;  // deduplicated pair constraints
  double gain = 0.0;
  double area = 1.0;
  bool implies_targets = false;
};

}  // namespace

DemoPlan select_demos(const StudyAssets& assets, PolicyCache& cf_cache,
                      const KnowledgeComponent& kc, const belief::Belief& b,
                      const belief::LikelihoodParams& teacher_lp,
                      std::size_t n_demos, std::size_t n_cf, RandomStream& rng) {
  if (assets.pool.empty())
    throw CurriculumExhausted("empty environment pool");

  const std::vector<WeightVector> cf_weights =
      sample_counterfactual_weights(b, n_cf, rng);
  const double base_pbec = belief::p_bec(b, kc.target_constraints);

  std::vector<Candidate> candidates(assets.pool.size());
  for (std::size_t e = 0; e < assets.pool.size(); ++e) {
    Candidate& cand = candidates[e];
    cand.env_index = static_cast<int>(e);
    const Trajectory& demo = assets.star_demos[e];
    for (const WeightVector& cf : cf_weights) {
      const Policy& pol = cf_cache.policy(assets.pool, static_cast<int>(e), cf);
      const Trajectory alt = mdp::rollout(assets.pool[e], pol);
      const auto c = bec::constraints_from_pair(
          demo, alt, bec::ConstraintSource::Counterfactual);
      if (!c) continue;
      const Vec3 u = normalized(c->normal);
      // Constraints that split the ground truth by a near-tie margin come
      // from counterfactuals the learner could not distinguish from the demo
      // either; they refine nothing the curriculum teaches.
      if (dot(u, assets.w_star.w) < kCounterfactualMargin) continue;
      // dedupe identical directions cheaply; full minimize waits for the plan
      bool dup = false;
      for (const auto& kept : cand.conveyed.constraints)
        if (norm(normalized(kept.normal) - u) < 1e-9) {
          dup = true;
          break;
        }
      if (!dup) cand.conveyed.add(*c);
    }
    if (cand.conveyed.empty()) continue;
    const belief::Belief posterior =
        belief::simulate_update(b, cand.conveyed, teacher_lp);
    cand.gain = belief::p_bec(posterior, kc.target_constraints) - base_pbec;
    cand.area = bec::spherical_area(cand.conveyed, assets.scoring_sample).fraction;
    cand.implies_targets =
        bec::implication_fraction(cand.conveyed, kc.target_constraints,
                                  assets.scoring_sample) >= 0.99;
  }

  // Candidates that imply the full KC target set are the eligible tier; the
  // rest are a fallback so a near-certain belief still gets a period (the
  // zero-gain edge). The tiers never mix within one plan: a thin wedge that
  // fails to cover the KC would otherwise masquerade as a highly informative
  // demo set.
  std::vector<const Candidate*> informative;
  for (const Candidate& c : candidates)
    if (!c.conveyed.empty() && c.implies_targets) informative.push_back(&c);
  if (informative.empty())
    for (const Candidate& c : candidates)
      if (!c.conveyed.empty()) informative.push_back(&c);

  DemoPlan plan;
  if (informative.empty()) {
    // Nothing distinguishes the belief from the ground truth (the zero-gain
    // edge): show the first environments anyway; they convey no constraints.
    for (std::size_t e = 0; e < std::min<std::size_t>(n_demos, assets.pool.size()); ++e) {
      plan.env_indices.push_back(static_cast<int>(e));
      plan.demos.push_back(assets.star_demos[e]);
    }
    return plan;
  }

  std::sort(informative.begin(), informative.end(),
            [](const Candidate* a, const Candidate* b) {
              if (a->gain != b->gain) return a->gain > b->gain;
              if (a->area != b->area) return a->area < b->area;
              return a->env_index < b->env_index;
            });

  bec::ConstraintSet combined;
  for (std::size_t k = 0; k < std::min<std::size_t>(n_demos, informative.size()); ++k) {
    const Candidate* c = informative[k];
    plan.env_indices.push_back(c->env_index);
    plan.demos.push_back(assets.star_demos[c->env_index]);
    combined.extend(c->conveyed);
  }
  plan.conveyed = bec::minimize(combined, assets.region_sample);
  plan.area = bec::spherical_area(plan.conveyed, assets.region_sample).fraction;
  plan.gain = belief::p_bec(belief::simulate_update(b, plan.conveyed, teacher_lp),
                            kc.target_constraints) -
              base_pbec;
  return plan;
}

std::vector<TestEnv> select_tests(const StudyAssets& assets, int kc_index,
                                  const std::set<int>& excluded,
                                  const std::set<int>& used_for_kc,
                                  std::size_t n_tests) {
  if (kc_index < 0 || kc_index >= static_cast<int>(assets.test_candidates.size()))
    throw std::invalid_argument("kc_index out of range");
  const std::vector<TestCandidate>& table = assets.test_candidates[kc_index];

  auto collect = [&](bool respect_used) {
    std::vector<TestEnv> out;
    for (const TestCandidate& tc : table) {
      if (out.size() >= n_tests) break;
      if (excluded.count(tc.test.pool_index)) continue;
      if (respect_used && used_for_kc.count(tc.test.pool_index)) continue;
      out.push_back(tc.test);
    }
    return out;
  };

  std::vector<TestEnv> out = collect(true);
  if (out.empty()) out = collect(false);  // pool exhausted for this KC: allow repeats
  if (out.empty())
    throw CurriculumExhausted("no test environment discriminates KC " +
                              std::to_string(kc_index));
  return out;
}

}  // namespace teamteach::curriculum
