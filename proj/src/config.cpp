#include "teamteach/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace teamteach {

using nlohmann::json;

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::IndividualLow: return "individual_low";
    case Strategy::IndividualHigh: return "individual_high";
    case Strategy::Common: return "common";
    case Strategy::Joint: return "joint";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "baseline") return Strategy::Baseline;
  if (s == "individual_low") return Strategy::IndividualLow;
  if (s == "individual_high") return Strategy::IndividualHigh;
  if (s == "common") return Strategy::Common;
  if (s == "joint") return Strategy::Joint;
  throw std::invalid_argument("unknown strategy: " + s);
}

std::string TeamComposition::name() const {
  std::string out;
  for (auto k : members)
    out += (k == learner::LearnerKind::Novice ? 'N' : 'P');
  return out;
}

TeamComposition TeamComposition::parse(const std::string& text) {
  TeamComposition comp;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    if (c == 'N' || c == 'n')
      comp.members.push_back(learner::LearnerKind::Novice);
    else if (c == 'P' || c == 'p')
      comp.members.push_back(learner::LearnerKind::Proficient);
    else
      throw std::invalid_argument("composition must use only N and P: " + text);
  }
  if (comp.members.empty())
    throw std::invalid_argument("empty team composition");
  return comp;
}

namespace {

json profile_to_json(const learner::LearnerProfile& p) {
  return json{{"beta0_mean", p.beta0_mean},
              {"beta0_std", p.beta0_std},
              {"delta_beta_correct_std", p.delta_beta_correct_std},
              {"delta_beta_incorrect_std", p.delta_beta_incorrect_std}};
}

void profile_from_json(const json& j, learner::LearnerProfile& p) {
  if (j.contains("beta0_mean")) p.beta0_mean = j.at("beta0_mean").get<double>();
  if (j.contains("beta0_std")) p.beta0_std = j.at("beta0_std").get<double>();
  if (j.contains("delta_beta_correct_std"))
    p.delta_beta_correct_std = j.at("delta_beta_correct_std").get<double>();
  if (j.contains("delta_beta_incorrect_std"))
    p.delta_beta_incorrect_std = j.at("delta_beta_incorrect_std").get<double>();
}

const char* cadence_name(SnapshotCadence c) {
  switch (c) {
    case SnapshotCadence::None: return "none";
    case SnapshotCadence::Period: return "period";
    case SnapshotCadence::Final: return "final";
  }
  return "none";
}

SnapshotCadence cadence_from(const std::string& s) {
  if (s == "none") return SnapshotCadence::None;
  if (s == "period") return SnapshotCadence::Period;
  if (s == "final") return SnapshotCadence::Final;
  throw std::invalid_argument("unknown snapshot cadence: " + s);
}

}  // namespace

std::string Config::to_json() const {
  json j;
  j["domain"] = json{{"gamma", gamma},
                     {"horizon", horizon},
                     {"w_star", json::array({w_star.x, w_star.y, w_star.z})},
                     {"pool",
                      json{{"count", pool.count},
                           {"min_size", pool.min_size},
                           {"max_size", pool.max_size},
                           {"max_rubble_density", pool.max_rubble_density},
                           {"charger_fraction", pool.charger_fraction}}},
                     {"pool_seed", pool_seed}};
  j["belief"] = json{{"n_particles", n_particles},
                     {"kappa", kappa},
                     {"eta", eta},
                     {"nu", nu},
                     {"teacher_mass", teacher_mass},
                     {"region_samples", region_samples},
                     {"scoring_samples", scoring_samples},
                     {"snapshots", cadence_name(snapshots)}};
  j["learners"] = json{{"novice", profile_to_json(novice)},
                       {"proficient", profile_to_json(proficient)},
                       {"deterministic_increments", deterministic_increments}};
  j["curriculum"] = json{{"n_demos", n_demos}, {"n_tests", n_tests}, {"n_cf", n_cf}};
  json strat = json::array();
  for (Strategy s : strategies) strat.push_back(to_string(s));
  json comps = json::array();
  for (const TeamComposition& c : compositions) comps.push_back(c.name());
  j["study"] = json{{"replicates", replicates},
                    {"period_cap", period_cap},
                    {"master_seed", master_seed},
                    {"strategies", strat},
                    {"compositions", comps}};
  return j.dump(2);
}

Config Config::from_json(const std::string& text) {
  const json j = json::parse(text);
  Config cfg;
  if (j.contains("domain")) {
    const json& d = j.at("domain");
    if (d.contains("gamma")) cfg.gamma = d.at("gamma").get<double>();
    if (d.contains("horizon")) cfg.horizon = d.at("horizon").get<int>();
    if (d.contains("w_star")) {
      const json& w = d.at("w_star");
      cfg.w_star = Vec3{w.at(0).get<double>(), w.at(1).get<double>(),
                        w.at(2).get<double>()};
    }
    if (d.contains("pool")) {
      const json& p = d.at("pool");
      if (p.contains("count")) cfg.pool.count = p.at("count").get<int>();
      if (p.contains("min_size")) cfg.pool.min_size = p.at("min_size").get<int>();
      if (p.contains("max_size")) cfg.pool.max_size = p.at("max_size").get<int>();
      if (p.contains("max_rubble_density"))
        cfg.pool.max_rubble_density = p.at("max_rubble_density").get<double>();
      if (p.contains("charger_fraction"))
        cfg.pool.charger_fraction = p.at("charger_fraction").get<double>();
    }
    if (d.contains("pool_seed")) cfg.pool_seed = d.at("pool_seed").get<std::uint64_t>();
  }
  if (j.contains("belief")) {
    const json& b = j.at("belief");
    if (b.contains("n_particles")) cfg.n_particles = b.at("n_particles").get<std::size_t>();
    if (b.contains("kappa")) cfg.kappa = b.at("kappa").get<double>();
    if (b.contains("eta")) cfg.eta = b.at("eta").get<double>();
    if (b.contains("nu")) cfg.nu = b.at("nu").get<double>();
    if (b.contains("teacher_mass")) cfg.teacher_mass = b.at("teacher_mass").get<double>();
    if (b.contains("region_samples"))
      cfg.region_samples = b.at("region_samples").get<std::size_t>();
    if (b.contains("scoring_samples"))
      cfg.scoring_samples = b.at("scoring_samples").get<std::size_t>();
    if (b.contains("snapshots"))
      cfg.snapshots = cadence_from(b.at("snapshots").get<std::string>());
  }
  if (j.contains("learners")) {
    const json& l = j.at("learners");
    if (l.contains("novice")) profile_from_json(l.at("novice"), cfg.novice);
    if (l.contains("proficient")) profile_from_json(l.at("proficient"), cfg.proficient);
    if (l.contains("deterministic_increments"))
      cfg.deterministic_increments = l.at("deterministic_increments").get<bool>();
  }
  if (j.contains("curriculum")) {
    const json& c = j.at("curriculum");
    if (c.contains("n_demos")) cfg.n_demos = c.at("n_demos").get<std::size_t>();
    if (c.contains("n_tests")) cfg.n_tests = c.at("n_tests").get<std::size_t>();
    if (c.contains("n_cf")) cfg.n_cf = c.at("n_cf").get<std::size_t>();
  }
  if (j.contains("study")) {
    const json& s = j.at("study");
    if (s.contains("replicates")) cfg.replicates = s.at("replicates").get<int>();
    if (s.contains("period_cap")) cfg.period_cap = s.at("period_cap").get<int>();
    if (s.contains("master_seed"))
      cfg.master_seed = s.at("master_seed").get<std::uint64_t>();
    if (s.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& v : s.at("strategies"))
        cfg.strategies.push_back(strategy_from_string(v.get<std::string>()));
    }
    if (s.contains("compositions")) {
      cfg.compositions.clear();
      for (const auto& v : s.at("compositions"))
        cfg.compositions.push_back(TeamComposition::parse(v.get<std::string>()));
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace teamteach
