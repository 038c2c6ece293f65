#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/time_estimator.hpp"
#include "sgp/world.hpp"

namespace sgp {

struct ScoredCandidate {
  JointConfig config;
  double t95_start = std::numeric_limits<double>::quiet_NaN();
  double t95_goal = std::numeric_limits<double>::quiet_NaN();
  bool in_collision = false;
};

struct SelectionBudget {
  double t_d = 0.0;          // cost budget in collision checks
  double confidence = 0.95;

  void validate() const {
    if (!(t_d > 0.0)) throw InvalidArgumentError("selection: t_d must be > 0");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw InvalidArgumentError("selection: confidence must be in (0,1)");
  }
};

// Scores every candidate with both metrics: upper-confidence cost of planning
// start->candidate and goal->candidate (one estimator serves both queries).
inline std::vector<ScoredCandidate> score_candidates(
    const RobotModel& model, const TimeEstimator& est, const World& world,
    const JointConfig& start, const JointConfig& goal,
    const std::vector<JointConfig>& candidates, double confidence = 0.95) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto& q : candidates) {
    ScoredCandidate s;
    s.config = q;
    s.in_collision = config_in_collision(model, world, q);
    if (!s.in_collision) {
      s.t95_start = predict_t95(est, world, start, q, confidence);
      s.t95_goal = predict_t95(est, world, goal, q, confidence);
    }
    scored.push_back(std::move(s));
  }
  return scored;
}

// Collision flags only; for the random policy, which never consults the
// estimator.
inline std::vector<ScoredCandidate> flag_candidates(
    const RobotModel& model, const World& world,
    const std::vector<JointConfig>& candidates) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto& q : candidates) {
    ScoredCandidate s;
    s.config = q;
    s.in_collision = config_in_collision(model, world, q);
    scored.push_back(std::move(s));
  }
  return scored;
}

namespace detail {

inline std::vector<std::size_t> valid_indices(const std::vector<ScoredCandidate>& scored) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scored.size(); ++i)
    if (!scored[i].in_collision) idx.push_back(i);
  return idx;
}

inline std::vector<std::size_t> qualifiers(const std::vector<ScoredCandidate>& scored,
                                           double t_d) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scored.size(); ++i)
    if (!scored[i].in_collision && scored[i].t95_start <= t_d) idx.push_back(i);
  return idx;
}

inline std::size_t argmin_start(const std::vector<ScoredCandidate>& scored,
                                const std::vector<std::size_t>& over) {
  std::size_t best = over.front();
  for (const std::size_t i : over)
    if (scored[i].t95_start < scored[best].t95_start) best = i;
  return best;
}

}  // namespace detail

// Uniform choice among candidates predicted to fit the budget; if none fit,
// the cheapest start-side candidate. Empty optional when every candidate
// collides (caller should regenerate).
inline std::optional<std::size_t> select_best_effort(
    const std::vector<ScoredCandidate>& scored, const SelectionBudget& budget, Rng& rng) {
  budget.validate();
  const auto valid = detail::valid_indices(scored);
  if (valid.empty()) return std::nullopt;
  const auto qual = detail::qualifiers(scored, budget.t_d);
  if (!qual.empty()) return qual[rng.uniform_index(qual.size())];
  return detail::argmin_start(scored, valid);
}

// Among budget qualifiers, the one predicted cheapest to continue from toward
// the goal; same fallback as best-effort when nothing qualifies.
inline std::optional<std::size_t> select_goal_oriented(
    const std::vector<ScoredCandidate>& scored, const SelectionBudget& budget) {
  budget.validate();
  const auto valid = detail::valid_indices(scored);
  if (valid.empty()) return std::nullopt;
  const auto qual = detail::qualifiers(scored, budget.t_d);
  if (qual.empty()) return detail::argmin_start(scored, valid);
  std::size_t best = qual.front();
  for (const std::size_t i : qual)
    if (scored[i].t95_goal < scored[best].t95_goal) best = i;
  return best;
}

// Uniform over non-colliding candidates.
inline std::optional<std::size_t> select_random(const std::vector<ScoredCandidate>& scored,
                                                Rng& rng) {
  const auto valid = detail::valid_indices(scored);
  if (valid.empty()) return std::nullopt;
  return valid[rng.uniform_index(valid.size())];
}

}  // namespace sgp
