#include "teamteach/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace teamteach::mdp {

using nlohmann::json;

void GridEnvironment::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("empty grid");
  if (!(start != goal)) throw std::invalid_argument("start equals goal");
  if (!in_bounds(start) || !in_bounds(goal))
    throw std::invalid_argument("start/goal out of bounds");
  for (const Cell& c : rubble)
    if (!in_bounds(c)) throw std::invalid_argument("rubble out of bounds");
  if (charger && !in_bounds(*charger))
    throw std::invalid_argument("charger out of bounds");
  for (const Cell& c : impassable)
    if (!in_bounds(c)) throw std::invalid_argument("impassable out of bounds");
  if (impassable.count(start) || impassable.count(goal))
    throw std::invalid_argument("start/goal impassable");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma out of range");
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
}

State initial_state(const GridEnvironment& env) {
  // starting on the charger counts as having visited it already
  return State{env.start, env.charger && *env.charger == env.start};
}

bool is_terminal(const GridEnvironment& env, const State& s) {
  return s.cell == env.goal;
}

State step(const GridEnvironment& env, const State& s, Action a) {
  Cell next = s.cell;
  switch (a) {
    case Action::Up: next.y -= 1; break;
    case Action::Down: next.y += 1; break;
    case Action::Left: next.x -= 1; break;
    case Action::Right: next.x += 1; break;
  }
  if (!env.in_bounds(next) || env.impassable.count(next)) next = s.cell;
  const bool charged = s.charged || (env.charger && next == *env.charger);
  return State{next, charged};
}

FeatureVector transition_features(const GridEnvironment& env, const State& s,
                                  const State& next) {
  FeatureVector f;
  f.rubble = env.rubble.count(next.cell) ? 1.0 : 0.0;
  f.recharge = (env.charger && next.cell == *env.charger && !s.charged) ? 1.0 : 0.0;
  f.steps = 1.0;
  return f;
}

namespace {

int num_states(const GridEnvironment& env) { return env.width * env.height * 2; }

State state_from_index(const GridEnvironment& env, int idx) {
  const int cells = env.width * env.height;
  const bool charged = idx >= cells;
  const int c = idx % cells;
  return State{Cell{c % env.width, c / env.width}, charged};
}

}  // namespace

Policy solve_policy(const GridEnvironment& env, const WeightVector& w,
                    double threshold, int max_iterations) {
  env.validate();
  const int n = num_states(env);
  Policy pol;
  pol.width = env.width;
  pol.height = env.height;
  pol.action_for.assign(n, Action::Up);
  pol.q_values.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);

  // precompute transitions and one-step rewards
  std::vector<int> succ(static_cast<std::size_t>(n) * kNumActions);
  std::vector<double> rew(static_cast<std::size_t>(n) * kNumActions);
  for (int i = 0; i < n; ++i) {
    const State s = state_from_index(env, i);
    for (int a = 0; a < kNumActions; ++a) {
      const State nx = step(env, s, kActions[a]);
      succ[i * kNumActions + a] = pol.state_index(nx);
      rew[i * kNumActions + a] = w.reward(transition_features(env, s, nx));
    }
  }

  std::vector<char> terminal(n);
  for (int i = 0; i < n; ++i)
    terminal[i] = is_terminal(env, state_from_index(env, i)) ? 1 : 0;

  std::vector<double> value(n, 0.0);
  for (int it = 0; it < max_iterations; ++it) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      if (terminal[i]) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        const double q = rew[i * kNumActions + a] + env.gamma * value[succ[i * kNumActions + a]];
        if (q > best) best = q;
      }
      delta = std::max(delta, std::abs(best - value[i]));
      value[i] = best;
    }
    if (delta < threshold) break;
  }

  for (int i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < kNumActions; ++a) {
      const double q = terminal[i]
                           ? 0.0
                           : rew[i * kNumActions + a] +
                                 env.gamma * value[succ[i * kNumActions + a]];
      pol.q_values[static_cast<std::size_t>(i) * kNumActions + a] = q;
      if (q > best) {  // strict: ties keep the lowest action index
        best = q;
        best_a = a;
      }
    }
    pol.action_for[i] = kActions[best_a];
  }
  return pol;
}

Trajectory rollout(const GridEnvironment& env, const Policy& pol,
                   const State& s0) {
  Trajectory t;
  State s = s0;
  double discount = 1.0;
  for (int k = 0; k < env.horizon && !is_terminal(env, s); ++k) {
    const Action a = pol.action(s);
    const State nx = step(env, s, a);
    const FeatureVector f = transition_features(env, s, nx);
    t.features.rubble += discount * f.rubble;
    t.features.recharge += discount * f.recharge;
    t.features.steps += discount * f.steps;
    t.steps.push_back(Transition{s, a, nx});
    discount *= env.gamma;
    s = nx;
  }
  return t;
}

FeatureVector feature_expectations(const GridEnvironment& env,
                                   const Policy& pol, const State& s,
                                   Action a) {
  FeatureVector mu;
  State cur = s;
  Action act = a;
  double discount = 1.0;
  for (int k = 0; k < env.horizon && !is_terminal(env, cur); ++k) {
    const State nx = step(env, cur, act);
    const FeatureVector f = transition_features(env, cur, nx);
    mu.rubble += discount * f.rubble;
    mu.recharge += discount * f.recharge;
    mu.steps += discount * f.steps;
    discount *= env.gamma;
    cur = nx;
    act = pol.action(cur);
  }
  return mu;
}

std::optional<Action> second_best_action(const Policy& pol, const State& s,
                                         double tol) {
  const Action best = pol.action(s);
  const double best_q = pol.q(s, best);
  std::optional<Action> second;
  double second_q = -std::numeric_limits<double>::infinity();
  for (Action a : kActions) {
    if (a == best) continue;
    const double q = pol.q(s, a);
    if (q < best_q - tol && q > second_q) {
      second_q = q;
      second = a;
    }
  }
  return second;
}

namespace {

json cell_to_json(const Cell& c) { return json::array({c.x, c.y}); }
Cell cell_from_json(const json& j) { return Cell{j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

std::string GridEnvironment::to_json() const {
  json j;
  j["width"] = width;
  j["height"] = height;
  j["start"] = cell_to_json(start);
  j["goal"] = cell_to_json(goal);
  json r = json::array();
  for (const Cell& c : rubble) r.push_back(cell_to_json(c));
  j["rubble"] = r;
  j["charger"] = charger ? cell_to_json(*charger) : json(nullptr);
  if (!impassable.empty()) {
    json b = json::array();
    for (const Cell& c : impassable) b.push_back(cell_to_json(c));
    j["impassable"] = b;
  }
  j["gamma"] = gamma;
  j["horizon"] = horizon;
  return j.dump();
}

GridEnvironment GridEnvironment::from_json(const std::string& text) {
  const json j = json::parse(text);
  GridEnvironment env;
  env.width = j.at("width").get<int>();
  env.height = j.at("height").get<int>();
  env.start = cell_from_json(j.at("start"));
  env.goal = cell_from_json(j.at("goal"));
  for (const auto& c : j.at("rubble")) env.rubble.insert(cell_from_json(c));
  if (!j.at("charger").is_null()) env.charger = cell_from_json(j.at("charger"));
  if (j.contains("impassable"))
    for (const auto& c : j.at("impassable")) env.impassable.insert(cell_from_json(c));
  env.gamma = j.at("gamma").get<double>();
  env.horizon = j.at("horizon").get<int>();
  env.validate();
  return env;
}

std::string trajectory_to_json(const Trajectory& t) {
  json j;
  json steps = json::array();
  for (const Transition& tr : t.steps) {
    steps.push_back(json{{"cell", cell_to_json(tr.state.cell)},
                         {"action", static_cast<int>(tr.action)},
                         {"next", cell_to_json(tr.next.cell)}});
  }
  j["steps"] = steps;
  j["features"] = json::array({t.features.rubble, t.features.recharge, t.features.steps});
  return j.dump();
}

}  // namespace teamteach::mdp
