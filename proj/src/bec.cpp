#include "teamteach/bec.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "teamteach/parallel.hpp"

namespace teamteach::bec {

using nlohmann::json;

const char* to_string(ConstraintSource s) {
  switch (s) {
    case ConstraintSource::Demo: return "demo";
    case ConstraintSource::Counterfactual: return "counterfactual";
    case ConstraintSource::TestResponse: return "test_response";
    case ConstraintSource::Feedback: return "feedback";
  }
  return "unknown";
}

namespace {

ConstraintSource source_from_string(const std::string& s) {
  if (s == "demo") return ConstraintSource::Demo;
  if (s == "counterfactual") return ConstraintSource::Counterfactual;
  if (s == "test_response") return ConstraintSource::TestResponse;
  if (s == "feedback") return ConstraintSource::Feedback;
  throw std::invalid_argument("unknown constraint source: " + s);
}

constexpr double kZeroNormal = 1e-12;

bool is_zero(const Vec3& v) { return norm(v) < kZeroNormal; }

}  // namespace

ConstraintSet constraints_from_demo(const mdp::GridEnvironment& env,
                                    const mdp::Trajectory& demo,
                                    const mdp::Policy& pol,
                                    ConstraintSource source) {
  ConstraintSet cs;
  for (const mdp::Transition& tr : demo.steps) {
    const mdp::FeatureVector mu_taken =
        mdp::feature_expectations(env, pol, tr.state, tr.action);
    for (mdp::Action b : mdp::kActions) {
      if (b == tr.action) continue;
      const mdp::FeatureVector mu_alt =
          mdp::feature_expectations(env, pol, tr.state, b);
      const Vec3 normal = (mu_taken - mu_alt).as_vec();
      if (!is_zero(normal)) cs.add(HalfSpaceConstraint{normal, source});
    }
  }
  return cs;
}

std::optional<HalfSpaceConstraint> constraints_from_pair(
    const mdp::Trajectory& optimal, const mdp::Trajectory& alternative,
    ConstraintSource source) {
  const Vec3 normal = (optimal.features - alternative.features).as_vec();
  if (is_zero(normal)) return std::nullopt;
  return HalfSpaceConstraint{normal, source};
}

ConstraintSet minimize(const ConstraintSet& cs, const SphereSample& sample) {
  // positive-scalar duplicates collapse to one representative
  std::vector<HalfSpaceConstraint> unique;
  for (const auto& c : cs.constraints) {
    if (is_zero(c.normal)) continue;
    const Vec3 u = normalized(c.normal);
    bool dup = false;
    for (const auto& kept : unique) {
      if (norm(normalized(kept.normal) - u) < 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(c);
  }
  if (unique.size() <= 1) return ConstraintSet{unique};

  std::vector<Vec3> all;
  for (const auto& c : unique) all.push_back(c.normal);
  if (par::count_satisfying(sample, all) == 0) return ConstraintSet{unique};

  // greedy pass: drop any constraint implied by the rest
  std::vector<bool> kept(unique.size(), true);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    std::vector<Vec3> others;
    for (std::size_t j = 0; j < unique.size(); ++j)
      if (j != i && kept[j]) others.push_back(unique[j].normal);
    std::vector<std::uint8_t> mask;
    par::mask_satisfying(sample, others, mask);
    const Vec3 self[1] = {unique[i].normal};
    if (par::count_violations_within(sample, mask, self) == 0) kept[i] = false;
  }
  ConstraintSet out;
  for (std::size_t i = 0; i < unique.size(); ++i)
    if (kept[i]) out.add(unique[i]);
  return out;
}

AreaEstimate spherical_area(const ConstraintSet& cs, const SphereSample& sample) {
  const std::vector<Vec3> normals = cs.normals();
  const std::size_t hits = par::count_satisfying(sample, normals);
  const double n = static_cast<double>(sample.size());
  const double p = static_cast<double>(hits) / n;
  return AreaEstimate{p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n)};
}

AreaEstimate spherical_area(const ConstraintSet& cs, std::size_t n_samples,
                            std::uint64_t seed) {
  if (n_samples < 10000)
    throw std::invalid_argument("spherical_area needs at least 1e4 samples");
  return spherical_area(cs, SphereSample(n_samples, seed));
}

bool region_empty(const ConstraintSet& cs, const SphereSample& sample) {
  return par::count_satisfying(sample, cs.normals()) == 0;
}

double implication_fraction(const ConstraintSet& lhs, const ConstraintSet& rhs,
                            const SphereSample& sample) {
  std::vector<std::uint8_t> mask;
  par::mask_satisfying(sample, lhs.normals(), mask);
  std::size_t inside = 0;
  for (std::uint8_t m : mask) inside += m;
  if (inside == 0) return 1.0;
  const std::size_t bad = par::count_violations_within(sample, mask, rhs.normals());
  return 1.0 - static_cast<double>(bad) / static_cast<double>(inside);
}

std::string constraint_to_json(const HalfSpaceConstraint& c) {
  json j;
  j["normal"] = json::array({c.normal.x, c.normal.y, c.normal.z});
  j["source"] = to_string(c.source);
  return j.dump();
}

std::string constraint_set_to_json(const ConstraintSet& cs) {
  json arr = json::array();
  for (const auto& c : cs.constraints) {
    arr.push_back(json{{"normal", json::array({c.normal.x, c.normal.y, c.normal.z})},
                       {"source", to_string(c.source)}});
  }
  return arr.dump();
}

ConstraintSet constraint_set_from_json(const std::string& text) {
  const json arr = json::parse(text);
  ConstraintSet cs;
  for (const auto& j : arr) {
    const auto& n = j.at("normal");
    cs.add(HalfSpaceConstraint{
        Vec3{n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()},
        source_from_string(j.at("source").get<std::string>())});
  }
  return cs;
}

}  // namespace teamteach::bec
