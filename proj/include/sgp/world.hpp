#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/kinematics.hpp"

namespace sgp {

inline constexpr std::size_t kDefaultMaxObstacles = 8;
// Sentinel radius marking an empty obstacle slot in the condition encoding.
inline constexpr double kEmptySlotRadius = -1.0;

struct Obstacle {
  Point2 center;
  double radius = 0.0;
};

struct WorkspaceBounds {
  double xmin = -3.0, ymin = -3.0, xmax = 3.0, ymax = 3.0;

  bool contains(Point2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

struct World {
  WorkspaceBounds bounds;
  std::vector<Obstacle> obstacles;

  void validate(std::size_t k_max = kDefaultMaxObstacles) const {
    if (obstacles.size() > k_max)
      throw CapacityError("World: obstacle count exceeds K_max");
    for (const auto& ob : obstacles) {
      if (!(ob.radius > 0.0))
        throw InvalidArgumentError("World: obstacle radius must be positive");
      if (!bounds.contains(ob.center))
        throw InvalidArgumentError("World: obstacle center outside bounds");
    }
  }
};

// ============================================================================
// Collision checking: each link is a swept disk (segment inflated by
// link_radius) tested against circular obstacles in closed form.
// ============================================================================

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

inline bool config_in_collision(const RobotModel& model, const World& world,
                                const JointConfig& q) {
  const auto pts = forward_kinematics(model, q);
  for (const auto& ob : world.obstacles) {
    const double limit = ob.radius + model.link_radius;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (point_segment_distance(ob.center, pts[i], pts[i + 1]) < limit) return true;
    }
  }
  return false;
}

struct EdgeCheck {
  bool valid = false;
  std::int64_t checks = 0;  // config_in_collision calls, the plan-cost unit
};

// Walks the straight joint-space segment from a to b with per-joint step at
// most `resolution`, endpoint-inclusive, failing fast at the first colliding
// state. q1 == q2 degenerates to a single state check.
inline EdgeCheck edge_valid(const RobotModel& model, const World& world,
                            const JointConfig& a, const JointConfig& b,
                            double resolution) {
  if (!(resolution > 0.0))
    throw InvalidArgumentError("edge_valid: resolution must be positive");
  model.require_config(a);
  model.require_config(b);
  const double span = joint_distance_inf(a, b);
  std::int64_t steps = 0;
  if (span > 0.0) {
    // Tolerance guards against span/resolution landing just above an integer.
    steps = static_cast<std::int64_t>(std::ceil(span / resolution - 1e-9));
    steps = std::max<std::int64_t>(steps, 1);
  }
  EdgeCheck result;
  JointConfig q(a.size());
  for (std::int64_t s = 0; s <= steps; ++s) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(steps);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = a[i] + t * (b[i] - a[i]);
    ++result.checks;
    if (config_in_collision(model, world, q)) {
      result.valid = false;
      return result;
    }
  }
  result.valid = true;
  return result;
}

// ============================================================================
// Condition encoding: fixed-size obstacle vector for model conditioning
// ============================================================================

// Slots of (cx, cy, r) in insertion order; empty slots carry (0, 0, -1).
inline std::vector<double> encode_world(const World& world, std::size_t k_max) {
  if (world.obstacles.size() > k_max)
    throw CapacityError("encode_world: obstacle count exceeds K_max");
  std::vector<double> out(3 * k_max, 0.0);
  for (std::size_t i = 0; i < k_max; ++i) {
    if (i < world.obstacles.size()) {
      out[3 * i] = world.obstacles[i].center.x;
      out[3 * i + 1] = world.obstacles[i].center.y;
      out[3 * i + 2] = world.obstacles[i].radius;
    } else {
      out[3 * i + 2] = kEmptySlotRadius;
    }
  }
  return out;
}

// Inverse slot unpacking; exact for any world that fit the encoding.
inline std::vector<Obstacle> decode_world(const std::vector<double>& encoding) {
  if (encoding.size() % 3 != 0)
    throw InvalidArgumentError("decode_world: encoding length must be a multiple of 3");
  std::vector<Obstacle> obstacles;
  for (std::size_t i = 0; i * 3 < encoding.size(); ++i) {
    const double r = encoding[3 * i + 2];
    if (r == kEmptySlotRadius) continue;
    obstacles.push_back({{encoding[3 * i], encoding[3 * i + 1]}, r});
  }
  return obstacles;
}

// ============================================================================
// Moving obstacles: piecewise-linear schedules, clamped at the ends
// ============================================================================

struct MovingObstacle {
  double radius = 0.0;
  std::vector<std::pair<double, Point2>> schedule;  // (time, center), times strictly increasing

  void validate() const {
    if (!(radius > 0.0))
      throw InvalidArgumentError("MovingObstacle: radius must be positive");
    if (schedule.empty())
      throw InvalidArgumentError("MovingObstacle: schedule must be nonempty");
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (!(schedule[i - 1].first < schedule[i].first))
        throw InvalidArgumentError("MovingObstacle: schedule times must be strictly increasing");
  }

  Point2 position_at(double t) const {
    if (t <= schedule.front().first) return schedule.front().second;
    if (t >= schedule.back().first) return schedule.back().second;
    for (std::size_t i = 1; i < schedule.size(); ++i) {
      if (t <= schedule[i].first) {
        const auto& [t0, p0] = schedule[i - 1];
        const auto& [t1, p1] = schedule[i];
        const double u = (t - t0) / (t1 - t0);
        return {p0.x + u * (p1.x - p0.x), p0.y + u * (p1.y - p0.y)};
      }
    }
    return schedule.back().second;
  }

  double max_speed() const {
    double v = 0.0;
    for (std::size_t i = 1; i < schedule.size(); ++i) {
      const double dt = schedule[i].first - schedule[i - 1].first;
      const double dx = schedule[i].second.x - schedule[i - 1].second.x;
      const double dy = schedule[i].second.y - schedule[i - 1].second.y;
      v = std::max(v, std::sqrt(dx * dx + dy * dy) / dt);
    }
    return v;
  }
};

// Static obstacles plus each mover materialized at its interpolated position.
// `inflate` grows the mover radii; the replanning loop uses it to cover motion
// within one planning cycle.
inline World snapshot(const World& static_world,
                      const std::vector<MovingObstacle>& movers, double t,
                      double inflate = 0.0) {
  if (!(t >= 0.0)) throw InvalidArgumentError("snapshot: t must be >= 0");
  World w = static_world;
  for (const auto& mover : movers) {
    w.obstacles.push_back({mover.position_at(t), mover.radius + inflate});
  }
  return w;
}

/// A world file: static obstacles plus the moving-obstacle schedules.
struct Scene {
  World world;
  std::vector<MovingObstacle> movers;
};

}  // namespace sgp
