#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "teamteach/config.hpp"
#include "teamteach/curriculum.hpp"

namespace tt = teamteach;
using namespace tt::curriculum;
using tt::Vec3;
using tt::mdp::WeightVector;

namespace {

const WeightVector kWStar(-3.0, 3.5, -1.0);

const StudyAssets& assets() {
  static const StudyAssets a(EnvPoolParams{}, kWStar, 0.95, 25, /*pool_seed=*/7,
                             /*sample_seed=*/99, 50000, 10000);
  return a;
}

tt::belief::Belief spread_belief(double spread, std::uint64_t seed) {
  tt::belief::Belief b = tt::belief::init_uniform_with_prior(500, seed);
  for (auto& p : b.particles)
    p = tt::normalized(Vec3{kWStar.w.x + spread * b.rng.normal(),
                            kWStar.w.y + spread * b.rng.normal(),
                            kWStar.w.z + spread * b.rng.normal()});
  return b;
}

}  // namespace

TEST_CASE("default curriculum has the three facets in order") {
  const auto kcs = default_kcs(kWStar, 0.95, 25);
  REQUIRE(kcs.size() == 3);
  CHECK(kcs[0].description.find("rubble") != std::string::npos);
  CHECK(kcs[0].description.find("step") != std::string::npos);
  CHECK(kcs[1].description.find("recharge") != std::string::npos);
  CHECK(kcs[2].description.find("rubble") != std::string::npos);
  CHECK(kcs[2].description.find("recharge") != std::string::npos);
  for (const auto& kc : kcs) {
    CHECK(!kc.target_constraints.empty());
    CHECK(kc.target_constraints.satisfied_by(kWStar.w));
  }
}

TEST_CASE("cumulative target regions shrink strictly") {
  const auto& a = assets();
  tt::bec::ConstraintSet cum = a.kcs[0].target_constraints;
  const double a1 = tt::bec::spherical_area(cum, a.region_sample).fraction;
  cum.extend(a.kcs[1].target_constraints);
  const double a2 = tt::bec::spherical_area(cum, a.region_sample).fraction;
  cum.extend(a.kcs[2].target_constraints);
  const double a3 = tt::bec::spherical_area(cum, a.region_sample).fraction;
  CHECK(a1 > a2);
  CHECK(a2 > a3);
  CHECK(a3 > 0.0);
}

TEST_CASE("vacuous facet raises a curriculum error naming the component") {
  try {
    default_kcs(WeightVector(0.0, 3.5, -1.0), 0.95, 25);
    FAIL("expected CurriculumError");
  } catch (const CurriculumError& e) {
    CHECK(std::string(e.what()).find("rubble cost vs step cost") !=
          std::string::npos);
  }
}

TEST_CASE("counterfactual sampling") {
  SUBCASE("default count draws distinct particles") {
    tt::belief::Belief b = tt::belief::init_uniform_with_prior(500, 31);
    tt::RandomStream rng(1);
    const auto ws = sample_counterfactual_weights(b, 8, rng);
    CHECK(ws.size() == 8);
    for (std::size_t i = 0; i < ws.size(); ++i)
      for (std::size_t j = i + 1; j < ws.size(); ++j)
        CHECK(!(ws[i].w == ws[j].w));
  }
  SUBCASE("single-particle belief falls back to replacement") {
    tt::belief::Belief b;
    b.particles = {tt::normalized(Vec3{-0.2, 0.5, -0.8})};
    b.weights = {1.0};
    tt::RandomStream rng(2);
    const auto ws = sample_counterfactual_weights(b, 3, rng);
    REQUIRE(ws.size() == 3);
    for (const auto& w : ws) CHECK(w.w == b.particles[0]);
  }
  SUBCASE("draws concentrate where the mass is") {
    tt::belief::Belief b = tt::belief::init_uniform_with_prior(200, 32);
    // put 90% of the mass on the first 20 particles
    for (std::size_t i = 0; i < b.size(); ++i) b.weights[i] = i < 20 ? 0.045 : 0.1 / 180;
    tt::RandomStream rng(3);
    int heavy = 0, total = 0;
    for (int rep = 0; rep < 300; ++rep) {
      const auto ws = sample_counterfactual_weights(b, 4, rng);
      for (const auto& w : ws) {
        ++total;
        for (std::size_t i = 0; i < 20; ++i)
          if (w.w == b.particles[i]) {
            ++heavy;
            break;
          }
      }
    }
    CHECK(static_cast<double>(heavy) / total > 0.6);
  }
}

TEST_CASE("select_demos") {
  const auto& a = assets();
  const tt::belief::LikelihoodParams lp{0.76, 4.0};

  SUBCASE("near-certain belief still returns a plan") {
    tt::belief::Belief b = spread_belief(0.005, 41);
    PolicyCache cache;
    tt::RandomStream rng(4);
    const DemoPlan plan = select_demos(a, cache, a.kcs[0], b, lp, 2, 8, rng);
    CHECK(!plan.env_indices.empty());
    CHECK(std::abs(plan.gain) < 0.2);  // nothing much left to gain
  }
  SUBCASE("conveyed constraints always admit the ground truth") {
    PolicyCache cache;
    tt::RandomStream rng(5);
    for (int kc = 0; kc < 3; ++kc) {
      tt::belief::Belief b = tt::belief::init_uniform_with_prior(500, 50 + kc);
      const DemoPlan plan = select_demos(a, cache, a.kcs[kc], b, lp, 2, 8, rng);
      CHECK(plan.conveyed.satisfied_by(kWStar.w));
      CHECK(plan.env_indices.size() == 2);
      CHECK(plan.gain >= -1e-9);
    }
  }
  SUBCASE("broader beliefs convey tighter constraint regions on average") {
    double broad_total = 0.0, narrow_total = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
      PolicyCache cache;
      tt::RandomStream rng(100 + seed);
      tt::belief::Belief broad = spread_belief(0.6, 200 + seed);
      tt::belief::Belief narrow = spread_belief(0.15, 200 + seed);
      tt::RandomStream rng2 = rng;
      broad_total +=
          select_demos(a, cache, a.kcs[0], broad, lp, 2, 8, rng).area;
      narrow_total +=
          select_demos(a, cache, a.kcs[0], narrow, lp, 2, 8, rng2).area;
    }
    CHECK(broad_total / 20.0 <= narrow_total / 20.0);
  }
}

TEST_CASE("select_tests") {
  const auto& a = assets();

  SUBCASE("one test by default, never a demo environment") {
    const std::set<int> demos = {a.test_candidates[0][0].test.pool_index};
    const auto tests = select_tests(a, 0, demos, {}, 1);
    REQUIRE(tests.size() == 1);
    CHECK(!demos.count(tests[0].pool_index));
    CHECK(!tests[0].discriminating.empty());
  }
  SUBCASE("selected test discriminates the current facet") {
    const auto tests = select_tests(a, 0, {}, {}, 1);
    REQUIRE(tests.size() == 1);
    const TestEnv& t = tests[0];
    // the ground truth answers correctly
    CHECK(t.discriminating.satisfied_by(kWStar.w));
    // a weight violating the KC0 band answers differently
    const WeightVector wrong(-0.05, 0.0, -1.0);  // rubble nearly free
    const auto pol = tt::mdp::solve_policy(t.env, wrong);
    const auto response = tt::mdp::rollout(t.env, pol);
    CHECK(!response.features.approx_equal(t.optimal.features));
  }
  SUBCASE("used environments are avoided until the pool is exhausted") {
    std::set<int> used;
    for (int round = 0; round < 4; ++round) {
      const auto tests = select_tests(a, 1, {}, used, 1);
      REQUIRE(tests.size() == 1);
      CHECK(!used.count(tests[0].pool_index));
      used.insert(tests[0].pool_index);
    }
  }
  SUBCASE("deterministic") {
    const auto t1 = select_tests(a, 2, {}, {}, 2);
    const auto t2 = select_tests(a, 2, {}, {}, 2);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i)
      CHECK(t1[i].pool_index == t2[i].pool_index);
  }
}

TEST_CASE("environment pool is seeded and valid") {
  const EnvPoolParams params;
  const auto pool = make_env_pool(params, 0.95, 25, 7);
  const auto again = make_env_pool(params, 0.95, 25, 7);
  REQUIRE(static_cast<int>(pool.size()) == params.count);
  int with_charger = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(pool[i].width >= params.min_size);
    CHECK(pool[i].width <= params.max_size);
    CHECK_NOTHROW(pool[i].validate());
    CHECK(pool[i].to_json() == again[i].to_json());
    if (pool[i].charger) ++with_charger;
  }
  CHECK(with_charger > 8);  // roughly half carry a charger
  const auto other = make_env_pool(params, 0.95, 25, 8);
  CHECK(other[0].to_json() != pool[0].to_json());
}
