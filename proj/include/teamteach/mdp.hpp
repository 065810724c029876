#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "teamteach/geometry.hpp"

namespace teamteach::mdp {

// Discounted feature accumulation over [traversed rubble, battery recharged,
// action taken]. Raw per-transition features are binary; accumulated values
// carry the discount.
struct FeatureVector {
  double rubble = 0.0;
  double recharge = 0.0;
  double steps = 0.0;

  Vec3 as_vec() const { return {rubble, recharge, steps}; }
  FeatureVector operator-(const FeatureVector& o) const {
    return {rubble - o.rubble, recharge - o.recharge, steps - o.steps};
  }
  bool approx_equal(const FeatureVector& o, double tol = 1e-9) const {
    return std::abs(rubble - o.rubble) <= tol &&
           std::abs(recharge - o.recharge) <= tol &&
           std::abs(steps - o.steps) <= tol;
  }
};

// Unit reward-weight vector in feature order [rubble, recharge, steps].
struct WeightVector {
  Vec3 w;

  explicit WeightVector(const Vec3& v) : w(normalized(v)) {}
  WeightVector(double rubble, double recharge, double steps)
      : WeightVector(Vec3{rubble, recharge, steps}) {}

  double reward(const FeatureVector& f) const { return dot(w, f.as_vec()); }
  bool operator==(const WeightVector& o) const = default;
};

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kNumActions = 4;
inline constexpr Action kActions[kNumActions] = {Action::Up, Action::Down,
                                                 Action::Left, Action::Right};

// One member of the item-delivery domain. Rubble is traversable at cost;
// impassable cells are supported but unused by the default study.
struct GridEnvironment {
  int width = 0;
  int height = 0;
  Cell start{};
  Cell goal{};
  std::set<Cell> rubble;
  std::optional<Cell> charger;
  std::set<Cell> impassable;
  double gamma = 0.95;
  int horizon = 25;

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  void validate() const;

  std::string to_json() const;
  static GridEnvironment from_json(const std::string& text);
};

// MDP state: the cell plus a once-per-episode "already recharged" bit.
struct State {
  Cell cell{};
  bool charged = false;
  auto operator<=>(const State&) const = default;
};

struct Transition {
  State state;
  Action action{};
  State next;
};

struct Trajectory {
  std::vector<Transition> steps;
  FeatureVector features;

  bool empty() const { return steps.empty(); }
};

// Deterministic greedy policy with its converged q-values. States are indexed
// as (cell, charged-bit); index helpers live on the policy so rollouts and
// constraint extraction share them.
struct Policy {
  int width = 0;
  int height = 0;
  std::vector<Action> action_for;  // indexed by state_index
  std::vector<double> q_values;    // indexed by state_index * 4 + action

  int state_index(const State& s) const {
    return (s.charged ? width * height : 0) + s.cell.y * width + s.cell.x;
  }
  Action action(const State& s) const { return action_for[state_index(s)]; }
  double q(const State& s, Action a) const {
    return q_values[state_index(s) * kNumActions + static_cast<int>(a)];
  }
};

State initial_state(const GridEnvironment& env);
bool is_terminal(const GridEnvironment& env, const State& s);

// Deterministic successor; off-grid and impassable moves self-loop.
State step(const GridEnvironment& env, const State& s, Action a);

// Raw binary features of one transition, before discounting.
FeatureVector transition_features(const GridEnvironment& env, const State& s,
                                  const State& next);

// Infinite-horizon value iteration; ties broken toward the lowest action
// index. Threshold is deliberately tight because BEC constraints are
// differences of feature expectations.
Policy solve_policy(const GridEnvironment& env, const WeightVector& w,
                    double threshold = 1e-10, int max_iterations = 10000);

// mu_pi(s, a): discounted feature counts of taking `a` in `s` then following
// `pol`, truncated at the horizon or the goal.
FeatureVector feature_expectations(const GridEnvironment& env,
                                   const Policy& pol, const State& s,
                                   Action a);

Trajectory rollout(const GridEnvironment& env, const Policy& pol,
                   const State& s0);
inline Trajectory rollout(const GridEnvironment& env, const Policy& pol) {
  return rollout(env, pol, initial_state(env));
}

// Lowest-index action with strictly smaller q than the best at `s`; empty if
// every action ties the optimum.
std::optional<Action> second_best_action(const Policy& pol, const State& s,
                                         double tol = 1e-9);

std::string trajectory_to_json(const Trajectory& t);

}  // namespace teamteach::mdp
