#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"
#include "sgp/distribution.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/planner.hpp"
#include "sgp/scene_io.hpp"
#include "sgp/world.hpp"

namespace sgp {

// A feasible planning request. The witness path (already shortcut) proves
// feasibility and supplies the waypoints to label.
struct PlanningProblem {
  std::string id;
  World world;
  JointConfig start;
  JointConfig goal;
  std::vector<JointConfig> witness;
};

// One training row: a waypoint of a problem plus repeated-run plan-cost
// samples in both directions and the empirically fitted parameters for the
// start-side samples. The problem context is embedded so a dataset file is
// self-contained.
struct WaypointRecord {
  std::string problem_id;
  World world;
  JointConfig start;
  JointConfig goal;
  JointConfig waypoint;
  std::vector<std::int64_t> from_start_costs;
  std::vector<std::int64_t> from_goal_costs;
  DistParams theta_normal;
  DistParams theta_lognormal;
};

// Nearest-rank percentile: sorted[ceil(p*N)] (1-based). Deterministic and
// exact on integer samples.
inline double percentile_nearest_rank(std::span<const std::int64_t> samples, double p) {
  if (samples.empty()) throw InvalidArgumentError("percentile: empty sample set");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgumentError("percentile: p must be in (0,1]");
  std::vector<std::int64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size()) - 1e-12));
  return static_cast<double>(sorted[std::max<std::size_t>(rank, 1) - 1]);
}

struct DatasetParams {
  int runs = 30;               // cost samples per waypoint per direction
  int shortcut_iterations = 100;
  int sample_retry_cap = 2000; // rejection cap for one collision-free config
  int witness_retry_cap = 20;  // attempts per problem before giving up
};

namespace detail {

inline JointConfig sample_free_config(const RobotModel& model, const World& world,
                                      Rng& rng, int retry_cap, const std::string& world_id) {
  JointConfig q(model.dof());
  for (int attempt = 0; attempt < retry_cap; ++attempt) {
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] = rng.uniform(model.joint_lo[i], model.joint_hi[i]);
    if (!config_in_collision(model, world, q)) return q;
  }
  throw GenerationError("could not sample a collision-free config in world '" + world_id +
                        "' after " + std::to_string(retry_cap) + " tries");
}

inline std::vector<double> to_doubles(std::span<const std::int64_t> v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace detail

// ============================================================================
// Problem generation
// ============================================================================

// Draws feasible problems across the given worlds: collision-free start and
// goal by rejection sampling, feasibility proven by a witness plan (discarded
// and retried on planner failure). Deterministic given seed.
inline std::vector<PlanningProblem> generate_problems(
    const RobotModel& model, const std::vector<std::pair<std::string, World>>& worlds,
    std::size_t count, std::uint64_t seed, const PlannerParams& planner_params,
    const DatasetParams& dataset_params = {}) {
  if (worlds.empty()) throw InvalidArgumentError("generate_problems: no worlds");
  if (count == 0) throw InvalidArgumentError("generate_problems: count must be > 0");
  std::vector<PlanningProblem> problems;
  problems.reserve(count);
  const JointBounds bounds = JointBounds::full(model);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& [world_id, world] = worlds[k % worlds.size()];
    PlanningProblem problem;
    bool done = false;
    for (int attempt = 0; attempt < dataset_params.witness_retry_cap && !done; ++attempt) {
      Rng rng(derive_seed(seed, k, static_cast<std::uint64_t>(attempt), 0x5a));
      const JointConfig start = detail::sample_free_config(
          model, world, rng, dataset_params.sample_retry_cap, world_id);
      const JointConfig goal = detail::sample_free_config(
          model, world, rng, dataset_params.sample_retry_cap, world_id);
      PlannerParams params = planner_params;
      params.seed = derive_seed(seed, k, static_cast<std::uint64_t>(attempt), 0x77);
      const PlanResult witness = rrt_connect(model, world, start, goal, bounds, params);
      if (!witness.success) continue;
      problem.id = "p" + std::to_string(k);
      problem.world = world;
      problem.start = start;
      problem.goal = goal;
      problem.witness =
          shortcut(model, world, witness.path, dataset_params.shortcut_iterations,
                   derive_seed(seed, k, static_cast<std::uint64_t>(attempt), 0x9c),
                   params.resolution);
      done = true;
    }
    if (!done)
      throw GenerationError("no feasible problem found in world '" + world_id + "' after " +
                            std::to_string(dataset_params.witness_retry_cap) + " attempts");
    problems.push_back(std::move(problem));
  }
  return problems;
}

// ============================================================================
// Waypoint labeling
// ============================================================================

// Labels every witness vertex with N independent seeded plan costs from the
// start side and from the goal side, then fits both distribution families to
// the start-side samples. A waypoint whose runs all fail on either side is
// dropped with a warning.
inline std::vector<WaypointRecord> label_waypoints(const RobotModel& model,
                                                   const PlanningProblem& problem,
                                                   int runs,
                                                   const PlannerParams& planner_params,
                                                   std::uint64_t seed) {
  if (runs < 2) throw InvalidArgumentError("label_waypoints: need runs >= 2");
  if (problem.witness.empty())
    throw InvalidArgumentError("label_waypoints: problem has no witness path");
  const JointBounds bounds = JointBounds::full(model);
  std::vector<WaypointRecord> records;
  for (std::size_t wi = 0; wi < problem.witness.size(); ++wi) {
    const JointConfig& waypoint = problem.witness[wi];
    WaypointRecord rec;
    rec.problem_id = problem.id;
    rec.world = problem.world;
    rec.start = problem.start;
    rec.goal = problem.goal;
    rec.waypoint = waypoint;
    bool start_side_ok = false, goal_side_ok = false;
    for (int direction = 0; direction < 2; ++direction) {
      const JointConfig& from = direction == 0 ? problem.start : problem.goal;
      auto& costs = direction == 0 ? rec.from_start_costs : rec.from_goal_costs;
      bool& any_ok = direction == 0 ? start_side_ok : goal_side_ok;
      for (int run = 0; run < runs; ++run) {
        PlannerParams params = planner_params;
        params.seed = derive_seed(seed, wi, static_cast<std::uint64_t>(direction),
                                  static_cast<std::uint64_t>(run));
        const PlanResult res = rrt_connect(model, problem.world, from, waypoint, bounds, params);
        costs.push_back(res.cost_checks);  // failed runs keep their spent cost
        any_ok = any_ok || res.success;
      }
    }
    if (!start_side_ok || !goal_side_ok) {
      std::cerr << "warning: dropping waypoint " << wi << " of " << problem.id
                << " (all labeling runs failed)\n";
      continue;
    }
    const auto samples = detail::to_doubles(rec.from_start_costs);
    rec.theta_normal = fit_empirical(samples, DistFamily::normal);
    rec.theta_lognormal = fit_empirical(samples, DistFamily::lognormal);
    records.push_back(std::move(rec));
  }
  return records;
}

// ============================================================================
// Training-set filter
// ============================================================================

// Keeps records whose start-side cost distribution fits the budget: by default
// the empirical 95th percentile must be within budget_checks; `strict_max`
// switches to the all-samples reading.
inline std::vector<WaypointRecord> filter_training_set(
    const std::vector<WaypointRecord>& records, double budget_checks,
    bool strict_max = false) {
  if (!(budget_checks >= 0.0))
    throw InvalidArgumentError("filter_training_set: budget must be >= 0");
  std::vector<WaypointRecord> kept;
  for (const auto& rec : records) {
    if (rec.from_start_costs.empty()) continue;
    double stat;
    if (strict_max) {
      stat = static_cast<double>(
          *std::max_element(rec.from_start_costs.begin(), rec.from_start_costs.end()));
    } else {
      stat = percentile_nearest_rank(rec.from_start_costs, 0.95);
    }
    if (stat <= budget_checks) kept.push_back(rec);
  }
  return kept;
}

// ============================================================================
// Persistence: JSON lines, one record per line, exact round-trip
// ============================================================================

inline nlohmann::json problem_to_json(const PlanningProblem& problem) {
  nlohmann::json j;
  j["id"] = problem.id;
  j["world"] = world_to_json(problem.world);
  j["start"] = problem.start;
  j["goal"] = problem.goal;
  j["witness"] = problem.witness;
  return j;
}

inline PlanningProblem problem_from_json(const nlohmann::json& j) {
  PlanningProblem p;
  p.id = j.at("id").get<std::string>();
  p.world = world_from_json(j.at("world"));
  p.start = j.at("start").get<JointConfig>();
  p.goal = j.at("goal").get<JointConfig>();
  p.witness = j.at("witness").get<std::vector<JointConfig>>();
  return p;
}

inline void save_problems(std::span<const PlanningProblem> problems,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& p : problems) out << problem_to_json(p).dump() << "\n";
}

inline std::vector<PlanningProblem> load_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<PlanningProblem> problems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      problems.push_back(problem_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed problem record: ") + e.what(), line_no);
    }
  }
  return problems;
}

inline nlohmann::json record_to_json(const WaypointRecord& rec) {
  nlohmann::json j;
  j["problem_id"] = rec.problem_id;
  j["world"] = world_to_json(rec.world);
  j["start"] = rec.start;
  j["goal"] = rec.goal;
  j["waypoint"] = rec.waypoint;
  j["from_start_costs"] = rec.from_start_costs;
  j["from_goal_costs"] = rec.from_goal_costs;
  j["theta_normal"] = {{"mu", rec.theta_normal.mu}, {"sigma", rec.theta_normal.sigma}};
  j["theta_lognormal"] = {{"mu", rec.theta_lognormal.mu}, {"sigma", rec.theta_lognormal.sigma}};
  return j;
}

inline WaypointRecord record_from_json(const nlohmann::json& j) {
  WaypointRecord rec;
  rec.problem_id = j.at("problem_id").get<std::string>();
  rec.world = world_from_json(j.at("world"));
  rec.start = j.at("start").get<JointConfig>();
  rec.goal = j.at("goal").get<JointConfig>();
  rec.waypoint = j.at("waypoint").get<JointConfig>();
  rec.from_start_costs = j.at("from_start_costs").get<std::vector<std::int64_t>>();
  rec.from_goal_costs = j.at("from_goal_costs").get<std::vector<std::int64_t>>();
  rec.theta_normal = {DistFamily::normal, j.at("theta_normal").at("mu").get<double>(),
                      j.at("theta_normal").at("sigma").get<double>()};
  rec.theta_lognormal = {DistFamily::lognormal, j.at("theta_lognormal").at("mu").get<double>(),
                         j.at("theta_lognormal").at("sigma").get<double>()};
  return rec;
}

inline void save_dataset(std::span<const WaypointRecord> records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
}

inline std::vector<WaypointRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<WaypointRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed dataset record: ") + e.what(), line_no);
    }
  }
  return records;
}

}  // namespace sgp
