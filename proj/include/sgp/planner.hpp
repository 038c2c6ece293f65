#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/world.hpp"

namespace sgp {

struct PlannerParams {
  double step_size = 0.5;          // extend distance, radians
  std::int64_t max_iterations = 10000;
  double resolution = 0.05;        // edge validation step, radians
  std::uint64_t seed = 0;
  std::int64_t max_checks = 0;     // abort threshold on collision checks; 0 = unlimited
  bool record_wall_time = false;

  void validate() const {
    if (!(step_size > 0.0)) throw InvalidArgumentError("PlannerParams: step_size must be > 0");
    if (max_iterations <= 0)
      throw InvalidArgumentError("PlannerParams: max_iterations must be > 0");
    if (!(resolution > 0.0)) throw InvalidArgumentError("PlannerParams: resolution must be > 0");
  }
};

// Per-joint sampling box for one planning query.
struct JointBounds {
  std::vector<double> lo, hi;

  static JointBounds full(const RobotModel& model) {
    return {model.joint_lo, model.joint_hi};
  }

  std::size_t dof() const { return lo.size(); }

  bool contains(const JointConfig& q) const {
    if (q.size() != lo.size()) return false;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] < lo[i] || q[i] > hi[i]) return false;
    return true;
  }

  void validate() const {
    if (lo.size() != hi.size() || lo.empty())
      throw InvalidArgumentError("JointBounds: malformed");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw InvalidArgumentError("JointBounds: lo must be <= hi");
  }
};

struct PlanResult {
  bool success = false;
  std::vector<JointConfig> path;       // start first, goal last on success
  std::int64_t cost_checks = 0;        // total collision checks, the plan-cost unit
  std::int64_t iterations_used = 0;
  std::optional<double> wall_seconds;
};

inline double path_length(const std::vector<JointConfig>& path) {
  if (path.empty()) throw InvalidArgumentError("path_length: empty path");
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    len += joint_distance(path[i - 1], path[i]);
  return len;
}

// Padded per-joint bounding box of start and subgoal, clamped to joint limits.
inline JointBounds shape_range(const JointConfig& start, const JointConfig& subgoal,
                               const std::vector<double>& paddings,
                               const RobotModel& model) {
  model.require_config(start);
  model.require_config(subgoal);
  if (paddings.size() != model.dof())
    throw InvalidArgumentError("shape_range: paddings size mismatch");
  for (double p : paddings)
    if (!(p >= 0.0)) throw InvalidArgumentError("shape_range: paddings must be >= 0");
  JointBounds b;
  b.lo.resize(model.dof());
  b.hi.resize(model.dof());
  for (std::size_t i = 0; i < model.dof(); ++i) {
    b.lo[i] = std::max(std::min(start[i], subgoal[i]) - paddings[i], model.joint_lo[i]);
    b.hi[i] = std::min(std::max(start[i], subgoal[i]) + paddings[i], model.joint_hi[i]);
  }
  return b;
}

// Proximal joints move more of the arm, so they get the widest padding:
// linear taper from 1.0 rad at the base joint down to 0.25 rad at the tip.
inline std::vector<double> default_paddings(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    p[i] = 1.0 + t * (0.25 - 1.0);
  }
  return p;
}

// ============================================================================
// RRT-Connect
// ============================================================================

namespace detail {

struct Tree {
  std::vector<JointConfig> nodes;
  std::vector<std::size_t> parents;

  void init(const JointConfig& root) {
    nodes.assign(1, root);
    parents.assign(1, 0);
  }

  std::size_t nearest(const JointConfig& q) const {
    std::size_t best = 0;
    double best_d = joint_distance(nodes[0], q);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const double d = joint_distance(nodes[i], q);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  std::vector<JointConfig> chain_to_root(std::size_t index) const {
    std::vector<JointConfig> out;
    std::size_t i = index;
    while (true) {
      out.push_back(nodes[i]);
      if (i == 0) break;
      i = parents[i];
    }
    return out;
  }
};

enum class ExtendStatus { trapped, advanced, reached };

}  // namespace detail

// Bidirectional RRT with greedy connection. Deterministic given params.seed;
// cost_checks counts every config_in_collision evaluation, including rejected
// samples and edge validation states.
inline PlanResult rrt_connect(const RobotModel& model, const World& world,
                              const JointConfig& start, const JointConfig& goal,
                              const JointBounds& bounds, const PlannerParams& params) {
  params.validate();
  bounds.validate();
  model.require_config(start);
  model.require_config(goal);
  if (bounds.dof() != model.dof())
    throw InvalidArgumentError("rrt_connect: bounds dimension mismatch");
  if (!bounds.contains(start)) throw InvalidRequestError("rrt_connect: start outside bounds");
  if (!bounds.contains(goal)) throw InvalidRequestError("rrt_connect: goal outside bounds");

  const auto t0 = std::chrono::steady_clock::now();
  PlanResult result;
  auto finish = [&](PlanResult r) {
    if (params.record_wall_time) {
      const auto t1 = std::chrono::steady_clock::now();
      r.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    }
    return r;
  };

  auto check = [&](const JointConfig& q) {
    ++result.cost_checks;
    return config_in_collision(model, world, q);
  };
  if (check(start)) throw InvalidRequestError("rrt_connect: start in collision");
  if (check(goal)) throw InvalidRequestError("rrt_connect: goal in collision");

  if (start == goal) {
    result.success = true;
    result.path = {start};
    return finish(result);
  }

  Rng rng(params.seed);
  detail::Tree tree_a, tree_b;
  tree_a.init(start);
  tree_b.init(goal);
  bool a_is_start = true;

  const std::size_t n = model.dof();
  JointConfig sample(n);
  constexpr int kSampleRetries = 100;

  auto over_budget = [&] {
    return params.max_checks > 0 && result.cost_checks >= params.max_checks;
  };

  // One bounded extension of `tree` toward `target`. Appends the new node on
  // success and reports whether the target itself was reached.
  auto extend = [&](detail::Tree& tree, const JointConfig& target) {
    const std::size_t near = tree.nearest(target);
    const JointConfig& q_near = tree.nodes[near];
    const double d = joint_distance(q_near, target);
    JointConfig q_new;
    bool reaches = d <= params.step_size;
    if (reaches) {
      q_new = target;
    } else {
      q_new.resize(n);
      const double s = params.step_size / d;
      for (std::size_t i = 0; i < n; ++i) q_new[i] = q_near[i] + s * (target[i] - q_near[i]);
    }
    const EdgeCheck ec = edge_valid(model, world, q_near, q_new, params.resolution);
    result.cost_checks += ec.checks;
    if (!ec.valid) return detail::ExtendStatus::trapped;
    tree.nodes.push_back(std::move(q_new));
    tree.parents.push_back(near);
    return reaches ? detail::ExtendStatus::reached : detail::ExtendStatus::advanced;
  };

  for (std::int64_t iter = 1; iter <= params.max_iterations; ++iter) {
    result.iterations_used = iter;
    if (over_budget()) break;

    // Rejection-sample a collision-free target inside the box.
    bool have_sample = false;
    for (int attempt = 0; attempt < kSampleRetries; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform(bounds.lo[i], bounds.hi[i]);
      if (!check(sample)) {
        have_sample = true;
        break;
      }
      if (over_budget()) break;
    }
    if (!have_sample) continue;

    if (extend(tree_a, sample) != detail::ExtendStatus::trapped) {
      const JointConfig target = tree_a.nodes.back();
      detail::ExtendStatus status = detail::ExtendStatus::advanced;
      while (status == detail::ExtendStatus::advanced && !over_budget())
        status = extend(tree_b, target);
      if (status == detail::ExtendStatus::reached) {
        // tree_b's tail equals tree_a's tail; stitch the two root chains.
        auto chain_a = tree_a.chain_to_root(tree_a.nodes.size() - 1);
        auto chain_b = tree_b.chain_to_root(tree_b.nodes.size() - 1);
        std::reverse(chain_a.begin(), chain_a.end());  // root ... connect point
        chain_b.erase(chain_b.begin());                // drop duplicated connect point
        std::vector<JointConfig> path = std::move(chain_a);
        path.insert(path.end(), chain_b.begin(), chain_b.end());
        if (!a_is_start) std::reverse(path.begin(), path.end());
        result.success = true;
        result.path = std::move(path);
        return finish(result);
      }
    }
    std::swap(tree_a, tree_b);
    a_is_start = !a_is_start;
  }
  return finish(result);
}

// Random-pair shortcutting. Output path stays valid, keeps its endpoints, and
// never gets longer in joint space. Deterministic given seed.
inline std::vector<JointConfig> shortcut(const RobotModel& model, const World& world,
                                         std::vector<JointConfig> path, int iterations,
                                         std::uint64_t seed, double resolution = 0.05) {
  if (path.empty()) throw ContractError("shortcut: empty path");
  for (const auto& q : path) model.require_config(q);
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!edge_valid(model, world, path[i - 1], path[i], resolution).valid)
      throw ContractError("shortcut: input path is not collision-free");

  Rng rng(seed);
  for (int it = 0; it < iterations; ++it) {
    const std::size_t m = path.size();
    if (m < 3) break;
    const std::size_t i = rng.uniform_index(m - 2);
    const std::size_t j = i + 2 + rng.uniform_index(m - 1 - (i + 1));
    if (edge_valid(model, world, path[i], path[j], resolution).valid)
      path.erase(path.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                 path.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return path;
}

// Re-validates a path edge by edge; used by evaluation harnesses to audit
// results after the fact.
inline bool path_valid(const RobotModel& model, const World& world,
                       const std::vector<JointConfig>& path, double resolution) {
  if (path.empty()) return false;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!edge_valid(model, world, path[i - 1], path[i], resolution).valid) return false;
  return path.size() > 1 || !config_in_collision(model, world, path[0]);
}

}  // namespace sgp
