#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/cvae.hpp"
#include "sgp/dataset.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/planner.hpp"
#include "sgp/selection.hpp"
#include "sgp/time_estimator.hpp"
#include "sgp/world.hpp"

namespace sgp {

// ============================================================================
// Evaluation variants
// ============================================================================

enum class SelectPolicy { baseline, random, best_effort, goal_oriented };

// A named ablation arm: selection policy, estimator family, range shaping.
struct EvalVariant {
  SelectPolicy policy = SelectPolicy::baseline;
  DistFamily family = DistFamily::lognormal;
  bool shaping = true;

  bool needs_estimator() const {
    return policy == SelectPolicy::best_effort || policy == SelectPolicy::goal_oriented;
  }
  bool needs_generator() const { return policy != SelectPolicy::baseline; }

  std::string name() const {
    switch (policy) {
      case SelectPolicy::baseline:
        return "Baseline";
      case SelectPolicy::random:
        return shaping ? "Random" : "Random-NS";
      case SelectPolicy::best_effort:
      case SelectPolicy::goal_oriented: {
        std::string s = policy == SelectPolicy::best_effort ? "B" : "G";
        s += family == DistFamily::normal ? "-N" : "-L";
        if (shaping) s += "-S";
        return s;
      }
    }
    throw ContractError("EvalVariant: bad policy");
  }
};

inline EvalVariant variant_from_name(const std::string& name) {
  if (name == "Baseline") return {SelectPolicy::baseline, DistFamily::lognormal, false};
  if (name == "Random") return {SelectPolicy::random, DistFamily::lognormal, true};
  if (name == "Random-NS") return {SelectPolicy::random, DistFamily::lognormal, false};
  if (name.size() >= 3 && (name[0] == 'B' || name[0] == 'G') && name[1] == '-' &&
      (name[2] == 'N' || name[2] == 'L')) {
    EvalVariant v;
    v.policy = name[0] == 'B' ? SelectPolicy::best_effort : SelectPolicy::goal_oriented;
    v.family = name[2] == 'N' ? DistFamily::normal : DistFamily::lognormal;
    if (name.size() == 3) {
      v.shaping = false;
      return v;
    }
    if (name.size() == 5 && name.substr(3) == "-S") {
      v.shaping = true;
      return v;
    }
  }
  throw InvalidArgumentError("unknown variant name '" + name + "'");
}

// ============================================================================
// Rows and summaries
// ============================================================================

struct EvalRow {
  std::string variant;
  std::string problem_id;
  int replication = 0;
  bool success = false;
  std::vector<std::int64_t> subgoal_costs;  // every planner invocation, in order
  std::int64_t total_cost = 0;              // sum of subgoal_costs
  double path_length = 0.0;                 // executed path, radians (joint L2)
  int subgoal_count = 0;                    // subgoal legs actually executed
  std::uint64_t seed = 0;
};

struct EvalSummary {
  std::string variant;
  std::size_t row_count = 0;
  std::size_t cost_count = 0;
  double success_rate = 0.0;
  double frac_1x = 0.0, frac_2x = 0.0, frac_4x = 0.0;  // costs within 1/2/4 x t_d
  double mean_cost = 0.0, std_cost = 0.0;
  double mean_length = 0.0;  // successful rows only
};

// Per-variant aggregate over the flattened plan costs, sorted by variant name.
inline std::vector<EvalSummary> summarize(std::span<const EvalRow> rows, double t_d) {
  if (!(t_d > 0.0)) throw InvalidArgumentError("summarize: t_d must be > 0");
  std::map<std::string, std::vector<const EvalRow*>> groups;
  for (const auto& row : rows) groups[row.variant].push_back(&row);
  std::vector<EvalSummary> out;
  for (const auto& [variant, group] : groups) {
    EvalSummary s;
    s.variant = variant;
    s.row_count = group.size();
    std::size_t successes = 0, lengths = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (const EvalRow* row : group) {
      if (row->success) {
        ++successes;
        s.mean_length += row->path_length;
        ++lengths;
      }
      for (const std::int64_t c : row->subgoal_costs) {
        const auto cd = static_cast<double>(c);
        ++s.cost_count;
        sum += cd;
        sum_sq += cd * cd;
        if (cd <= t_d) s.frac_1x += 1.0;
        if (cd <= 2.0 * t_d) s.frac_2x += 1.0;
        if (cd <= 4.0 * t_d) s.frac_4x += 1.0;
      }
    }
    s.success_rate = static_cast<double>(successes) / static_cast<double>(group.size());
    if (lengths > 0) s.mean_length /= static_cast<double>(lengths);
    if (s.cost_count > 0) {
      const auto n = static_cast<double>(s.cost_count);
      s.frac_1x /= n;
      s.frac_2x /= n;
      s.frac_4x /= n;
      s.mean_cost = sum / n;
      s.std_cost = std::sqrt(std::max(sum_sq / n - s.mean_cost * s.mean_cost, 0.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ============================================================================
// Evaluation parameters
// ============================================================================

struct EvalParams {
  PlannerParams planner{};
  std::vector<double> paddings;  // for range shaping
  double t_d = 1000.0;           // budget in checks
  double confidence = 0.95;
  int batch = 32;                // candidates per generation trial
  int runs_per_plan = 30;
  int max_trials = 10;
  int replications = 10;
  double goal_eps = 1e-6;

  void validate() const {
    planner.validate();
    if (!(t_d > 0.0)) throw InvalidArgumentError("eval: t_d must be > 0");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw InvalidArgumentError("eval: confidence must be in (0,1)");
    if (batch < 1) throw InvalidArgumentError("eval: batch must be >= 1");
    if (runs_per_plan < 1) throw InvalidArgumentError("eval: runs_per_plan must be >= 1");
    if (max_trials < 1) throw InvalidArgumentError("eval: max_trials must be >= 1");
    if (replications < 1) throw InvalidArgumentError("eval: replications must be >= 1");
    if (!(goal_eps > 0.0)) throw InvalidArgumentError("eval: goal_eps must be > 0");
  }
};

namespace detail {

// Seed-tag constants so matched variants (and the hard-problem miner) draw
// identical planner seeds.
inline constexpr std::uint64_t kTagDirect = 0xD1;
inline constexpr std::uint64_t kTagPlan = 0xB2;
inline constexpr std::uint64_t kTagSelect = 0xA1;
inline constexpr std::uint64_t kTagLoop = 0x6C;
inline constexpr std::uint64_t kTagDynamic = 0xD4;

inline void require_models(const EvalVariant& variant, const CvaeModel* cvae,
                           const TimeEstimator* est) {
  if (variant.needs_generator() && cvae == nullptr)
    throw InvalidRequestError("variant " + variant.name() + " needs a generator model");
  if (variant.needs_estimator() && est == nullptr)
    throw InvalidRequestError("variant " + variant.name() + " needs a time estimator");
}

// One generation+selection round. Returns the chosen configuration, or
// nothing when every candidate collides.
inline std::optional<JointConfig> pick_subgoal(const RobotModel& model,
                                               const EvalVariant& variant,
                                               const CvaeModel& cvae,
                                               const TimeEstimator* est,
                                               const World& world, const JointConfig& from,
                                               const JointConfig& goal,
                                               const EvalParams& params, Rng& rng) {
  const auto candidates = generate_candidates(model, cvae, world, from, goal,
                                              static_cast<std::size_t>(params.batch), rng);
  std::optional<std::size_t> idx;
  if (variant.policy == SelectPolicy::random) {
    const auto scored = flag_candidates(model, world, candidates);
    idx = select_random(scored, rng);
    if (idx) return scored[*idx].config;
    return std::nullopt;
  }
  const auto scored = score_candidates(model, *est, world, from, goal, candidates,
                                       params.confidence);
  const SelectionBudget budget{params.t_d, params.confidence};
  idx = variant.policy == SelectPolicy::best_effort
            ? select_best_effort(scored, budget, rng)
            : select_goal_oriented(scored, budget);
  if (idx) return scored[*idx].config;
  return std::nullopt;
}

}  // namespace detail

// ============================================================================
// Hard-problem mining
// ============================================================================

// Problems whose direct plan succeeds in all `runs` seeded attempts yet never
// fits the budget: the regime where subgoals matter and the direct baseline
// still scores 100% success.
inline std::vector<std::size_t> hard_problem_indices(
    const RobotModel& model, const std::vector<PlanningProblem>& problems,
    const PlannerParams& planner, int runs, double budget_checks, std::uint64_t seed) {
  if (runs < 1) throw InvalidArgumentError("hard_problem_indices: runs must be >= 1");
  std::vector<std::size_t> hard;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const auto& problem = problems[p];
    const JointBounds bounds = JointBounds::full(model);
    bool qualifies = true;
    for (int r = 0; r < runs && qualifies; ++r) {
      PlannerParams pp = planner;
      pp.seed = derive_seed(seed, p, static_cast<std::uint64_t>(r), detail::kTagDirect);
      const PlanResult res =
          rrt_connect(model, problem.world, problem.start, problem.goal, bounds, pp);
      qualifies = res.success && static_cast<double>(res.cost_checks) > budget_checks;
    }
    if (qualifies) hard.push_back(p);
  }
  return hard;
}

// ============================================================================
// Static evaluation, single-leg mode: select one subgoal per problem, then
// plan that leg repeatedly with per-run seeds (one row per run)
// ============================================================================

inline std::vector<EvalRow> eval_subgoal(const RobotModel& model,
                                         const std::vector<PlanningProblem>& problems,
                                         const EvalVariant& variant, const CvaeModel* cvae,
                                         const TimeEstimator* est, const EvalParams& params,
                                         std::uint64_t seed) {
  params.validate();
  detail::require_models(variant, cvae, est);
  const JointBounds full = JointBounds::full(model);
  std::vector<EvalRow> rows;
  rows.reserve(problems.size() * static_cast<std::size_t>(params.runs_per_plan));
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const auto& problem = problems[p];
    std::optional<JointConfig> target;
    if (variant.policy == SelectPolicy::baseline) {
      target = problem.goal;
    } else {
      Rng sel_rng(derive_seed(seed, p, detail::kTagSelect, 0));
      for (int trial = 0; trial < params.max_trials && !target; ++trial)
        target = detail::pick_subgoal(model, variant, *cvae, est, problem.world,
                                      problem.start, problem.goal, params, sel_rng);
    }
    const bool shaped = variant.shaping && variant.policy != SelectPolicy::baseline;
    for (int r = 0; r < params.runs_per_plan; ++r) {
      EvalRow row;
      row.variant = variant.name();
      row.problem_id = problem.id;
      row.replication = r;
      const std::uint64_t tag = variant.policy == SelectPolicy::baseline
                                    ? detail::kTagDirect
                                    : detail::kTagPlan;
      row.seed = derive_seed(seed, p, static_cast<std::uint64_t>(r), tag);
      if (target) {
        PlannerParams pp = params.planner;
        pp.seed = row.seed;
        const JointBounds bounds =
            shaped ? shape_range(problem.start, *target, params.paddings, model) : full;
        const PlanResult res =
            rrt_connect(model, problem.world, problem.start, *target, bounds, pp);
        row.success = res.success;
        row.subgoal_costs.push_back(res.cost_checks);
        row.total_cost = res.cost_checks;
        if (res.success) row.path_length = path_length(res.path);
        row.subgoal_count =
            variant.policy != SelectPolicy::baseline && res.success ? 1 : 0;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ============================================================================
// Static evaluation, goal-reaching mode: iterate subgoals until the goal is
// reached or the generation-trial cap is hit (one row per replication)
// ============================================================================

// True when `current` is within `epsilon` of the goal in joint space.
inline bool subgoal_reached_goal_test(const JointConfig& current, const JointConfig& goal,
                                      double epsilon) {
  if (!(epsilon > 0.0))
    throw InvalidArgumentError("subgoal_reached_goal_test: epsilon must be > 0");
  return joint_distance(current, goal) <= epsilon;
}

// Full goal test: proximity, or a direct budget-capped plan that reaches the
// goal. On a successful probe the leg and its cost are reported through the
// out-parameters; the probe cost is reported even on failure. Both endpoints
// must be collision-free (planner precondition).
inline bool subgoal_reached_goal_test(const RobotModel& model, const World& world,
                                      const JointConfig& current, const JointConfig& goal,
                                      double epsilon, const PlannerParams& planner,
                                      std::int64_t budget_checks,
                                      std::vector<JointConfig>* final_leg = nullptr,
                                      std::int64_t* checks_spent = nullptr) {
  if (checks_spent) *checks_spent = 0;
  if (subgoal_reached_goal_test(current, goal, epsilon)) return true;
  PlannerParams pp = planner;
  pp.max_checks = budget_checks;
  const PlanResult res =
      rrt_connect(model, world, current, goal, JointBounds::full(model), pp);
  if (checks_spent) *checks_spent = res.cost_checks;
  if (res.success && final_leg) *final_leg = res.path;
  return res.success;
}

inline EvalRow run_goal_loop(const RobotModel& model, const PlanningProblem& problem,
                             const EvalVariant& variant, const CvaeModel* cvae,
                             const TimeEstimator* est, const EvalParams& params,
                             int replication, std::uint64_t seed) {
  params.validate();
  detail::require_models(variant, cvae, est);
  const JointBounds full = JointBounds::full(model);
  EvalRow row;
  row.variant = variant.name();
  row.problem_id = problem.id;
  row.replication = replication;
  row.seed = seed;

  if (variant.policy == SelectPolicy::baseline) {
    PlannerParams pp = params.planner;
    pp.seed = derive_seed(seed, 0, 0, detail::kTagDirect);
    const PlanResult res =
        rrt_connect(model, problem.world, problem.start, problem.goal, full, pp);
    row.success = res.success;
    row.subgoal_costs.push_back(res.cost_checks);
    row.total_cost = res.cost_checks;
    if (res.success) row.path_length = path_length(res.path);
    return row;
  }

  Rng rng(derive_seed(seed, detail::kTagLoop, 0, 0));
  JointConfig cur = problem.start;
  std::uint64_t invocation = 0;
  auto planner_seed = [&] { return derive_seed(seed, detail::kTagLoop, ++invocation, 1); };

  auto goal_test = [&]() -> bool {  // proximity or budget-capped direct probe
    PlannerParams pp = params.planner;
    pp.seed = planner_seed();
    std::vector<JointConfig> leg;
    std::int64_t spent = 0;
    const bool ok =
        subgoal_reached_goal_test(model, problem.world, cur, problem.goal, params.goal_eps,
                                  pp, static_cast<std::int64_t>(params.t_d), &leg, &spent);
    if (spent > 0) row.subgoal_costs.push_back(spent);
    if (ok && !leg.empty()) {
      row.path_length += path_length(leg);
      cur = problem.goal;
    }
    return ok;
  };

  for (int trial = 0; trial < params.max_trials; ++trial) {
    if (goal_test()) {
      row.success = true;
      break;
    }
    const auto target = detail::pick_subgoal(model, variant, *cvae, est, problem.world,
                                             cur, problem.goal, params, rng);
    if (!target) continue;  // trial consumed; regenerate
    PlannerParams pp = params.planner;
    pp.seed = planner_seed();
    const JointBounds bounds =
        variant.shaping ? shape_range(cur, *target, params.paddings, model) : full;
    const PlanResult res = rrt_connect(model, problem.world, cur, *target, bounds, pp);
    row.subgoal_costs.push_back(res.cost_checks);
    if (!res.success) continue;
    row.path_length += path_length(res.path);
    cur = *target;
    ++row.subgoal_count;
  }
  if (!row.success) row.success = goal_test();
  for (const auto c : row.subgoal_costs) row.total_cost += c;
  return row;
}

inline std::vector<EvalRow> eval_to_goal(const RobotModel& model,
                                         const std::vector<PlanningProblem>& problems,
                                         const EvalVariant& variant, const CvaeModel* cvae,
                                         const TimeEstimator* est, const EvalParams& params,
                                         std::uint64_t seed) {
  params.validate();
  std::vector<EvalRow> rows;
  rows.reserve(problems.size() * static_cast<std::size_t>(params.replications));
  for (std::size_t p = 0; p < problems.size(); ++p)
    for (int rep = 0; rep < params.replications; ++rep)
      rows.push_back(run_goal_loop(model, problems[p], variant, cvae, est, params, rep,
                                   derive_seed(seed, p, static_cast<std::uint64_t>(rep),
                                               detail::kTagLoop)));
  return rows;
}

// ============================================================================
// Dynamic evaluation: replanning among moving obstacles
// ============================================================================

struct DynamicParams {
  double cycle_seconds = 0.5;
  double joint_speed = 1.0;  // rad/s along the path, joint L2
  double max_seconds = 60.0;

  void validate() const {
    if (!(cycle_seconds > 0.0))
      throw InvalidArgumentError("dynamic: cycle_seconds must be > 0");
    if (!(joint_speed > 0.0)) throw InvalidArgumentError("dynamic: joint_speed must be > 0");
    if (!(max_seconds > 0.0)) throw InvalidArgumentError("dynamic: max_seconds must be > 0");
  }
};

struct TraceStep {
  double t = 0.0;                      // cycle start time
  JointConfig config;                  // configuration at cycle start
  std::vector<JointConfig> executed;   // polyline traversed during the cycle
  std::optional<JointConfig> subgoal;  // subgoal selected this cycle, if any
  std::int64_t plan_cost = 0;          // checks spent planning this cycle
  std::size_t snapshot_id = 0;         // cycle index; snapshot time = t
};

struct DynamicOutcome {
  bool success = false;
  std::string reason;  // "goal", "trial-cap", "timeout", "blocked"
  std::vector<TraceStep> trace;
  std::int64_t total_cost = 0;
  double path_length = 0.0;
};

namespace detail {

// Largest mover displacement within one cycle; planning against snapshots
// inflated by this keeps every executed segment clear of the true movers for
// the whole cycle.
inline double cycle_inflation(const std::vector<MovingObstacle>& movers,
                              double cycle_seconds) {
  double v = 0.0;
  for (const auto& m : movers) v = std::max(v, m.max_speed());
  return v * cycle_seconds;
}

}  // namespace detail

inline DynamicOutcome eval_dynamic(const RobotModel& model, const Scene& scene,
                                   const JointConfig& start, const JointConfig& goal,
                                   const EvalVariant& variant, const CvaeModel* cvae,
                                   const TimeEstimator* est, const EvalParams& params,
                                   const DynamicParams& dynamic, std::uint64_t seed) {
  params.validate();
  dynamic.validate();
  detail::require_models(variant, cvae, est);
  if (variant.policy == SelectPolicy::baseline)
    throw InvalidRequestError("eval_dynamic: baseline has no replanning policy");
  const JointBounds full = JointBounds::full(model);
  const double inflate = detail::cycle_inflation(scene.movers, dynamic.cycle_seconds);

  DynamicOutcome out;
  Rng rng(derive_seed(seed, detail::kTagDynamic, 0, 0));
  std::uint64_t invocation = 0;
  auto planner_seed = [&] {
    return derive_seed(seed, detail::kTagDynamic, ++invocation, 1);
  };

  JointConfig cur = start;
  std::deque<JointConfig> pending;  // remaining planned waypoints, cur excluded

  for (std::size_t cycle = 0;; ++cycle) {
    const double t = static_cast<double>(cycle) * dynamic.cycle_seconds;
    if (t >= dynamic.max_seconds) {
      out.reason = "timeout";
      break;
    }
    if (joint_distance(cur, goal) <= params.goal_eps) {
      out.success = true;
      out.reason = "goal";
      break;
    }
    const World world = snapshot(scene.world, scene.movers, t, inflate);
    TraceStep step;
    step.t = t;
    step.config = cur;
    step.snapshot_id = cycle;

    // Drop the remaining plan if the next cycle window would invalidate it.
    if (!pending.empty()) {
      std::vector<JointConfig> check{cur};
      check.insert(check.end(), pending.begin(), pending.end());
      if (config_in_collision(model, world, cur) ||
          !path_valid(model, world, check, params.planner.resolution))
        pending.clear();
    }

    if (pending.empty()) {
      bool planned = false;
      if (!config_in_collision(model, world, cur)) {
        // Movers can cover the goal in this snapshot; probe only when clear.
        ++step.plan_cost;
        if (!config_in_collision(model, world, goal)) {
          PlannerParams pp = params.planner;
          pp.seed = planner_seed();
          pp.max_checks = static_cast<std::int64_t>(params.t_d);
          const PlanResult res = rrt_connect(model, world, cur, goal, full, pp);
          step.plan_cost += res.cost_checks;
          if (res.success) {
            pending.assign(res.path.begin() + 1, res.path.end());
            step.subgoal = goal;
            planned = true;
          }
        }
        for (int trial = 0; trial < params.max_trials && !planned; ++trial) {
          const auto target = detail::pick_subgoal(model, variant, *cvae, est, world, cur,
                                                   goal, params, rng);
          if (!target) continue;
          PlannerParams pp = params.planner;
          pp.seed = planner_seed();
          const JointBounds bounds = variant.shaping
                                         ? shape_range(cur, *target, params.paddings, model)
                                         : full;
          const PlanResult res = rrt_connect(model, world, cur, *target, bounds, pp);
          step.plan_cost += res.cost_checks;
          if (res.success) {
            pending.assign(res.path.begin() + 1, res.path.end());
            step.subgoal = *target;
            planned = true;
          }
        }
      }
      if (!planned) {
        out.total_cost += step.plan_cost;
        step.executed = {cur};
        out.trace.push_back(std::move(step));
        out.reason = config_in_collision(model, world, cur) ? "blocked" : "trial-cap";
        break;
      }
    }

    // Execute along the plan at constant joint speed for one cycle.
    double travel = dynamic.joint_speed * dynamic.cycle_seconds;
    step.executed = {cur};
    while (travel > 0.0 && !pending.empty()) {
      const double d = joint_distance(cur, pending.front());
      if (d <= travel) {
        cur = pending.front();
        pending.pop_front();
        travel -= d;
      } else {
        JointConfig next(cur.size());
        const double u = travel / d;
        for (std::size_t i = 0; i < cur.size(); ++i)
          next[i] = cur[i] + u * (pending.front()[i] - cur[i]);
        cur = std::move(next);
        travel = 0.0;
      }
      out.path_length += joint_distance(step.executed.back(), cur);
      step.executed.push_back(cur);
    }
    out.total_cost += step.plan_cost;
    out.trace.push_back(std::move(step));
  }
  return out;
}

// Post-hoc audit of a dynamic trace: every executed configuration, at its
// exact execution time, must be collision-free against the exactly
// interpolated movers (no inflation). Also enforces trace continuity.
inline bool validate_dynamic_trace(const RobotModel& model, const Scene& scene,
                                   const DynamicOutcome& outcome,
                                   const DynamicParams& dynamic, double resolution) {
  if (!(resolution > 0.0))
    throw InvalidArgumentError("validate_dynamic_trace: resolution must be > 0");
  for (std::size_t k = 0; k < outcome.trace.size(); ++k) {
    const TraceStep& step = outcome.trace[k];
    if (step.executed.empty() || step.executed.front() != step.config) return false;
    if (k + 1 < outcome.trace.size() &&
        outcome.trace[k + 1].config != step.executed.back())
      return false;
    double arc = 0.0;
    auto check_at = [&](const JointConfig& q, double tau) {
      const World w = snapshot(scene.world, scene.movers, tau, 0.0);
      return !config_in_collision(model, w, q);
    };
    if (!check_at(step.config, step.t)) return false;
    for (std::size_t i = 1; i < step.executed.size(); ++i) {
      const JointConfig& a = step.executed[i - 1];
      const JointConfig& b = step.executed[i];
      const double d = joint_distance(a, b);
      const auto pieces = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(d / resolution)));
      for (std::size_t s = 1; s <= pieces; ++s) {
        const double u = static_cast<double>(s) / static_cast<double>(pieces);
        JointConfig q(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) q[j] = a[j] + u * (b[j] - a[j]);
        const double tau = step.t + (arc + u * d) / dynamic.joint_speed;
        if (!check_at(q, tau)) return false;
      }
      arc += d;
    }
    // Idle tail of the cycle: the robot holds the last configuration until the
    // next cycle starts. The episode ends at the final step, so it has no tail.
    if (k + 1 < outcome.trace.size()) {
      const double t_end = step.t + dynamic.cycle_seconds;
      for (double tau = step.t + arc / dynamic.joint_speed; tau < t_end;
           tau += dynamic.cycle_seconds / 8.0)
        if (!check_at(step.executed.back(), tau)) return false;
      if (!check_at(step.executed.back(), t_end)) return false;
    }
  }
  return true;
}

// ============================================================================
// World generation
// ============================================================================

struct WorldGenParams {
  int count = 8;
  int obstacles = 4;
  double radius_min = 0.2;
  double radius_max = 0.5;
  double clearance = 0.4;  // obstacle-free disk around the arm base
  double bound = 3.0;      // workspace half-extent
  int retry_cap = 1000;

  void validate() const {
    if (count < 1) throw InvalidArgumentError("worlds: count must be >= 1");
    if (obstacles < 0) throw InvalidArgumentError("worlds: obstacles must be >= 0");
    if (!(radius_min > 0.0) || radius_max < radius_min)
      throw InvalidArgumentError("worlds: need 0 < radius_min <= radius_max");
    if (!(clearance >= 0.0)) throw InvalidArgumentError("worlds: clearance must be >= 0");
    if (!(bound > radius_max)) throw InvalidArgumentError("worlds: bound too small");
  }
};

inline std::vector<std::pair<std::string, World>> generate_worlds(
    const WorldGenParams& params, std::uint64_t seed) {
  params.validate();
  std::vector<std::pair<std::string, World>> out;
  for (int w = 0; w < params.count; ++w) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(w), 0x30, 0));
    World world;
    world.bounds = {-params.bound, -params.bound, params.bound, params.bound};
    for (int k = 0; k < params.obstacles; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < params.retry_cap && !placed; ++attempt) {
        const double r = rng.uniform(params.radius_min, params.radius_max);
        const double cx = rng.uniform(-(params.bound - r), params.bound - r);
        const double cy = rng.uniform(-(params.bound - r), params.bound - r);
        if (std::hypot(cx, cy) <= params.clearance + r) continue;
        world.obstacles.push_back({{cx, cy}, r});
        placed = true;
      }
      if (!placed)
        throw GenerationError("generate_worlds: cannot place obstacle in world w" +
                              std::to_string(w));
    }
    out.emplace_back("w" + std::to_string(w), std::move(world));
  }
  return out;
}

// ============================================================================
// Export: CSV and SVG
// ============================================================================

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_csv_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad floating-point field '" + s + "'", line_no);
  return v;
}

template <typename T>
inline T parse_csv_int(const std::string& s, std::size_t line_no) {
  T v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad integer field '" + s + "'", line_no);
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "variant,problem_id,replication,success,subgoal_costs,total_cost,path_length,"
    "subgoal_count,seed";

// Rows sorted by (variant, problem, replication); doubles printed shortest
// round-trip, so two exports of the same rows are byte-identical.
inline void write_csv(std::span<const EvalRow> rows, const std::string& path) {
  std::vector<const EvalRow*> sorted;
  sorted.reserve(rows.size());
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const EvalRow* a, const EvalRow* b) {
    if (a->variant != b->variant) return a->variant < b->variant;
    if (a->problem_id != b->problem_id) return a->problem_id < b->problem_id;
    return a->replication < b->replication;
  });
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << kCsvHeader << "\n";
  for (const EvalRow* row : sorted) {
    out << row->variant << "," << row->problem_id << "," << row->replication << ","
        << (row->success ? 1 : 0) << ",";
    for (std::size_t i = 0; i < row->subgoal_costs.size(); ++i) {
      if (i) out << ";";
      out << row->subgoal_costs[i];
    }
    out << "," << row->total_cost << "," << detail::format_double(row->path_length) << ","
        << row->subgoal_count << "," << row->seed << "\n";
  }
}

inline std::vector<EvalRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty results file", 0);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected results header", line_no);
  std::vector<EvalRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != 9) throw ParseError("expected 9 fields", line_no);
    EvalRow row;
    row.variant = fields[0];
    row.problem_id = fields[1];
    row.replication = detail::parse_csv_int<int>(fields[2], line_no);
    row.success = detail::parse_csv_int<int>(fields[3], line_no) != 0;
    if (!fields[4].empty())
      for (const auto& c : detail::split(fields[4], ';'))
        row.subgoal_costs.push_back(detail::parse_csv_int<std::int64_t>(c, line_no));
    row.total_cost = detail::parse_csv_int<std::int64_t>(fields[5], line_no);
    row.path_length = detail::parse_csv_double(fields[6], line_no);
    row.subgoal_count = detail::parse_csv_int<int>(fields[7], line_no);
    row.seed = detail::parse_csv_int<std::uint64_t>(fields[8], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Per-variant histogram of plan costs with threshold lines at t_d, 2 t_d and
// 4 t_d. Costs beyond the right edge land in the last bin.
inline void write_histogram_svg(std::span<const EvalRow> rows, double t_d,
                                const std::string& path) {
  if (!(t_d > 0.0)) throw InvalidArgumentError("histogram: t_d must be > 0");
  std::map<std::string, std::vector<double>> costs;
  for (const auto& row : rows)
    for (const auto c : row.subgoal_costs)
      costs[row.variant].push_back(static_cast<double>(c));

  constexpr int kBins = 24;
  constexpr double kPanelW = 640.0, kPanelH = 120.0, kMarginL = 60.0, kMarginT = 30.0;
  const double x_max = 4.8 * t_d;
  const double panel_count = static_cast<double>(std::max<std::size_t>(costs.size(), 1));
  const double height = kMarginT + panel_count * (kPanelH + 40.0);

  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  auto fd = detail::format_double;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << fd(kMarginL + kPanelW + 40.0) << "\" height=\"" << fd(height) << "\">\n";
  double y0 = kMarginT;
  for (const auto& [variant, samples] : costs) {
    std::vector<std::size_t> bins(kBins, 0);
    for (const double c : samples) {
      auto b = static_cast<std::size_t>(c / x_max * kBins);
      if (b >= kBins) b = kBins - 1;
      ++bins[b];
    }
    const std::size_t peak = std::max<std::size_t>(
        *std::max_element(bins.begin(), bins.end()), 1);
    out << "<text x=\"" << fd(kMarginL) << "\" y=\"" << fd(y0 - 8.0)
        << "\" font-family=\"monospace\" font-size=\"13\">" << variant << " (n="
        << samples.size() << ")</text>\n";
    for (int b = 0; b < kBins; ++b) {
      const double h = kPanelH * static_cast<double>(bins[b]) / static_cast<double>(peak);
      const double x = kMarginL + kPanelW * static_cast<double>(b) / kBins;
      out << "<rect x=\"" << fd(x) << "\" y=\"" << fd(y0 + kPanelH - h) << "\" width=\""
          << fd(kPanelW / kBins - 1.0) << "\" height=\"" << fd(h)
          << "\" fill=\"#6688cc\"/>\n";
    }
    for (const double mult : {1.0, 2.0, 4.0}) {
      const double x = kMarginL + kPanelW * (mult * t_d / x_max);
      out << "<line x1=\"" << fd(x) << "\" y1=\"" << fd(y0) << "\" x2=\"" << fd(x)
          << "\" y2=\"" << fd(y0 + kPanelH)
          << "\" stroke=\"#cc3333\" stroke-dasharray=\"4,3\"/>\n";
    }
    out << "<line x1=\"" << fd(kMarginL) << "\" y1=\"" << fd(y0 + kPanelH) << "\" x2=\""
        << fd(kMarginL + kPanelW) << "\" y2=\"" << fd(y0 + kPanelH)
        << "\" stroke=\"#333333\"/>\n";
    y0 += kPanelH + 40.0;
  }
  out << "</svg>\n";
}

// ============================================================================
// Bundled dynamic scenario: one disk sweeping across the arm's reach while
// the arm crosses from one side to the other
// ============================================================================

inline Scene demo_dynamic_scene() {
  Scene scene;
  scene.world.bounds = {-3.0, -3.0, 3.0, 3.0};
  scene.world.obstacles = {{{0.0, 2.2}, 0.45}, {{-1.9, -1.3}, 0.4}};
  MovingObstacle mover;
  mover.radius = 0.3;
  mover.schedule = {{0.0, {2.6, -2.4}},
                    {8.0, {1.2, 0.1}},
                    {16.0, {2.6, 2.4}},
                    {24.0, {1.2, 0.1}},
                    {32.0, {2.6, -2.4}}};
  scene.movers = {mover};
  return scene;
}

inline JointConfig demo_dynamic_start() { return {-1.1, -0.4, -0.3}; }
inline JointConfig demo_dynamic_goal() { return {1.9, 0.5, 0.4}; }

}  // namespace sgp
